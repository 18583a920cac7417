#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ofm/errors.hpp"

namespace ofm {

enum class Direction { lower_is_better, higher_is_better };

// Provenance of the canonicalization transform applied to a series.
enum class Transform { none, negated, complemented };

inline const char* to_string(Direction d) {
    return d == Direction::lower_is_better ? "lower" : "higher";
}

inline Direction direction_from_string(const std::string& s) {
    if (s == "lower") return Direction::lower_is_better;
    if (s == "higher") return Direction::higher_is_better;
    throw parse_error("unknown direction '" + s + "' (expected 'lower' or 'higher')");
}

/// One metric measured over ordered training steps.
///
/// `measured` is empty when every point was observed directly; otherwise it
/// holds one flag per point (1 = observed, 0 = interpolated).
struct MetricSeries {
    std::vector<std::int64_t> steps;
    std::vector<double> values;
    Direction direction = Direction::lower_is_better;
    std::string metric_name;
    std::string unit;

    Transform transform = Transform::none;
    double complement_base = 0.0; // meaningful only when transform == complemented
    std::vector<std::uint8_t> measured;

    std::size_t size() const { return steps.size(); }

    bool point_measured(std::size_t i) const {
        return measured.empty() || measured[i] != 0;
    }

    void validate() const {
        if (steps.empty())
            throw validation_error("metric series '" + metric_name + "' is empty");
        if (steps.size() != values.size())
            throw validation_error("metric series '" + metric_name +
                                   "': steps and values lengths differ");
        if (!measured.empty() && measured.size() != steps.size())
            throw validation_error("metric series '" + metric_name +
                                   "': measured flags length differs");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i] < 0)
                throw validation_error("metric series '" + metric_name +
                                       "': negative step " + std::to_string(steps[i]));
            if (i > 0 && steps[i] <= steps[i - 1])
                throw validation_error("metric series '" + metric_name +
                                       "': steps not strictly increasing at index " +
                                       std::to_string(i));
            if (!std::isfinite(values[i]))
                throw numeric_error("metric series '" + metric_name +
                                    "': non-finite value at step " +
                                    std::to_string(steps[i]));
        }
    }

    bool canonical() const { return direction == Direction::lower_is_better; }
};

/// Rewrites a series so that lower values mean better performance.
///
/// Higher-is-better values v become (complement_base - v) when a base is
/// given (accuracy -> error with base 100), else (-v). The transform is
/// recorded so it can be undone exactly.
inline MetricSeries canonicalize(const MetricSeries& series,
                                 std::optional<double> complement_base = std::nullopt) {
    series.validate();
    if (series.direction == Direction::lower_is_better) {
        if (complement_base)
            throw validation_error("complement base given for a lower-is-better series '" +
                                   series.metric_name + "'; ambiguous intent");
        return series;
    }
    MetricSeries out = series;
    out.direction = Direction::lower_is_better;
    if (complement_base) {
        out.transform = Transform::complemented;
        out.complement_base = *complement_base;
        for (auto& v : out.values) v = *complement_base - v;
    } else {
        out.transform = Transform::negated;
        for (auto& v : out.values) v = -v;
    }
    return out;
}

/// Undoes canonicalize(); restores the original direction and values exactly.
inline MetricSeries invert_canonicalization(const MetricSeries& series) {
    MetricSeries out = series;
    switch (series.transform) {
    case Transform::none:
        return out;
    case Transform::negated:
        for (auto& v : out.values) v = -v;
        break;
    case Transform::complemented:
        for (auto& v : out.values) v = series.complement_base - v;
        break;
    }
    out.direction = Direction::higher_is_better;
    out.transform = Transform::none;
    out.complement_base = 0.0;
    return out;
}

inline void require_canonical(const MetricSeries& series, const char* op) {
    if (!series.canonical())
        throw validation_error(std::string(op) + " requires a canonical " +
                               "(lower-is-better) series; canonicalize first");
}

} // namespace ofm
