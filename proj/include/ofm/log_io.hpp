#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ofm/detail/format.hpp"
#include "ofm/series.hpp"

namespace ofm {

enum class SeriesKind { pretext_eval, pretext_train, target_eval, target_train };

inline const char* to_string(SeriesKind s) {
    switch (s) {
    case SeriesKind::pretext_eval: return "pretext_eval";
    case SeriesKind::pretext_train: return "pretext_train";
    case SeriesKind::target_eval: return "target_eval";
    case SeriesKind::target_train: return "target_train";
    }
    return "?";
}

inline SeriesKind series_kind_from_string(const std::string& s) {
    if (s == "pretext_eval") return SeriesKind::pretext_eval;
    if (s == "pretext_train") return SeriesKind::pretext_train;
    if (s == "target_eval") return SeriesKind::target_eval;
    if (s == "target_train") return SeriesKind::target_train;
    throw parse_error("unknown series kind '" + s + "'");
}

inline bool is_target(SeriesKind s) {
    return s == SeriesKind::target_eval || s == SeriesKind::target_train;
}

/// One measurement emitted by a trainer. Target records carry the pretext
/// snapshot step whose representations the target model was trained on;
/// pretext records must not.
struct LogRecord {
    std::string run_id;
    std::int64_t fold = 0;
    SeriesKind series = SeriesKind::pretext_eval;
    std::optional<std::int64_t> snapshot_step;
    std::int64_t epoch = 0;
    std::string metric;
    double value = 0.0;
    Direction direction = Direction::lower_is_better;
};

/// One record per line, key order fixed, values in shortest round-trip form.
inline std::string write_log_line(const LogRecord& r) {
    nlohmann::ordered_json j;
    j["run_id"] = r.run_id;
    j["fold"] = r.fold;
    j["series"] = to_string(r.series);
    if (r.snapshot_step) j["snapshot_step"] = *r.snapshot_step;
    j["epoch"] = r.epoch;
    j["metric"] = r.metric;
    j["value"] = nlohmann::json(); // placeholder, replaced below
    j["direction"] = to_string(r.direction);
    std::string line = j.dump();
    // nlohmann prints doubles in its own style; splice in our formatting so
    // log bytes follow one policy everywhere.
    const std::string needle = "\"value\":null";
    const auto pos = line.find(needle);
    line.replace(pos, needle.size(), "\"value\":" + detail::format_shortest(r.value));
    return line;
}

inline std::string write_log(const std::vector<LogRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += write_log_line(r);
        out += '\n';
    }
    return out;
}

namespace detail {

using RecordKey = std::tuple<std::string, std::int64_t, int, std::int64_t, std::int64_t,
                             std::string>;

inline RecordKey key_of(const LogRecord& r) {
    return {r.run_id, r.fold, static_cast<int>(r.series),
            r.snapshot_step.value_or(-1), r.epoch, r.metric};
}

template <typename T>
T get_field(const nlohmann::json& j, const char* name, std::size_t line_no) {
    if (!j.contains(name))
        throw parse_error("log line " + std::to_string(line_no) + ": missing field '" +
                          name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw parse_error("log line " + std::to_string(line_no) + ": field '" +
                          std::string(name) + "' has the wrong type");
    }
}

} // namespace detail

/// Parses line-delimited log records, attaching the line number to every
/// error. Duplicate keys and non-finite values are rejected.
inline std::vector<LogRecord> parse_log(const std::string& bytes) {
    std::vector<LogRecord> records;
    std::map<detail::RecordKey, std::size_t> seen; // key -> line number
    std::istringstream in(bytes);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("log line " + std::to_string(line_no) + ": " + e.what());
        }
        LogRecord r;
        r.run_id = detail::get_field<std::string>(j, "run_id", line_no);
        r.fold = detail::get_field<std::int64_t>(j, "fold", line_no);
        if (r.fold < 0)
            throw parse_error("log line " + std::to_string(line_no) + ": fold must be >= 0");
        r.series = series_kind_from_string(
            detail::get_field<std::string>(j, "series", line_no));
        if (j.contains("snapshot_step"))
            r.snapshot_step = detail::get_field<std::int64_t>(j, "snapshot_step", line_no);
        if (is_target(r.series) && !r.snapshot_step)
            throw parse_error("log line " + std::to_string(line_no) +
                              ": target record without snapshot_step");
        if (!is_target(r.series) && r.snapshot_step)
            throw parse_error("log line " + std::to_string(line_no) +
                              ": pretext record must not carry snapshot_step");
        r.epoch = detail::get_field<std::int64_t>(j, "epoch", line_no);
        r.metric = detail::get_field<std::string>(j, "metric", line_no);
        r.value = detail::get_field<double>(j, "value", line_no);
        if (!std::isfinite(r.value))
            throw parse_error("log line " + std::to_string(line_no) +
                              ": non-finite value");
        r.direction = direction_from_string(
            detail::get_field<std::string>(j, "direction", line_no));

        const auto [it, inserted] = seen.emplace(detail::key_of(r), line_no);
        if (!inserted)
            throw parse_error("log line " + std::to_string(line_no) +
                              ": duplicate record key, first seen at line " +
                              std::to_string(it->second));
        records.push_back(std::move(r));
    }
    return records;
}

/// Unit label attached to reduced/extracted series, keyed by metric name.
/// Trainers log bare metric names; the unit is how comparability is judged.
inline std::string unit_for_metric(const std::string& metric) {
    if (metric == "accuracy" || metric == "error") return "percent";
    return metric;
}

/// Collapses raw target evaluation logs to one point per snapshot and fold:
/// the best (canonical-space minimum) value over that snapshot's target
/// training epochs. target_train records are ignored.
inline std::map<std::int64_t, MetricSeries>
reduce_target_runs(const std::vector<LogRecord>& records, const std::string& metric,
                   std::optional<double> complement_base = std::nullopt) {
    // fold -> snapshot -> best canonical value
    std::map<std::int64_t, std::map<std::int64_t, double>> best;
    std::optional<Direction> direction;
    for (const auto& r : records) {
        if (r.series != SeriesKind::target_eval || r.metric != metric) continue;
        if (direction && *direction != r.direction)
            throw validation_error("target metric '" + metric +
                                   "' has inconsistent directions across records");
        direction = r.direction;
        double v = r.value;
        if (r.direction == Direction::higher_is_better)
            v = complement_base ? *complement_base - v : -v;
        auto& slot = best[r.fold];
        auto it = slot.find(*r.snapshot_step);
        if (it == slot.end() || v < it->second) slot[*r.snapshot_step] = v;
    }
    if (best.empty())
        throw validation_error("no target_eval records for metric '" + metric + "'");

    std::map<std::int64_t, MetricSeries> out;
    for (auto& [fold, by_step] : best) {
        MetricSeries s;
        s.metric_name = metric;
        s.unit = unit_for_metric(metric);
        s.direction = Direction::lower_is_better;
        if (*direction == Direction::higher_is_better)
            s.transform = complement_base ? Transform::complemented : Transform::negated;
        if (s.transform == Transform::complemented) s.complement_base = *complement_base;
        for (const auto& [step, value] : by_step) {
            s.steps.push_back(step);
            s.values.push_back(value);
        }
        s.measured.assign(s.steps.size(), 1);
        s.validate();
        out.emplace(fold, std::move(s));
    }
    return out;
}

/// Extracts the per-fold pretext evaluation curve for one metric,
/// canonicalized the same way as reduce_target_runs.
inline std::map<std::int64_t, MetricSeries>
pretext_eval_series(const std::vector<LogRecord>& records, const std::string& metric,
                    std::optional<double> complement_base = std::nullopt) {
    std::map<std::int64_t, std::map<std::int64_t, double>> values;
    std::optional<Direction> direction;
    for (const auto& r : records) {
        if (r.series != SeriesKind::pretext_eval || r.metric != metric) continue;
        if (direction && *direction != r.direction)
            throw validation_error("pretext metric '" + metric +
                                   "' has inconsistent directions across records");
        direction = r.direction;
        double v = r.value;
        if (r.direction == Direction::higher_is_better)
            v = complement_base ? *complement_base - v : -v;
        values[r.fold][r.epoch] = v;
    }
    if (values.empty())
        throw validation_error("no pretext_eval records for metric '" + metric + "'");

    std::map<std::int64_t, MetricSeries> out;
    for (auto& [fold, by_step] : values) {
        MetricSeries s;
        s.metric_name = metric;
        s.unit = unit_for_metric(metric);
        s.direction = Direction::lower_is_better;
        if (*direction == Direction::higher_is_better)
            s.transform = complement_base ? Transform::complemented : Transform::negated;
        if (s.transform == Transform::complemented) s.complement_base = *complement_base;
        for (const auto& [step, value] : by_step) {
            s.steps.push_back(step);
            s.values.push_back(value);
        }
        s.measured.assign(s.steps.size(), 1);
        s.validate();
        out.emplace(fold, std::move(s));
    }
    return out;
}

} // namespace ofm
