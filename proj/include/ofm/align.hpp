#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ofm/convergence.hpp"
#include "ofm/series.hpp"

namespace ofm {

/// Resamples a series onto `grid`. Measured steps reproduce their stored
/// values bit-exactly; steps between measurements are filled by linear
/// interpolation. Extrapolation is refused: every grid step must lie inside
/// the measured range.
inline MetricSeries align_on_grid(const MetricSeries& series,
                                  const std::vector<std::int64_t>& grid) {
    series.validate();
    if (grid.empty())
        throw validation_error("align_on_grid: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw validation_error("align_on_grid: grid not strictly increasing");
    if (grid.front() < series.steps.front() || grid.back() > series.steps.back())
        throw validation_error("align_on_grid: grid step outside the measured range [" +
                               std::to_string(series.steps.front()) + ", " +
                               std::to_string(series.steps.back()) +
                               "]; extrapolation is not supported");

    MetricSeries out = series;
    out.steps = grid;
    out.values.assign(grid.size(), 0.0);
    out.measured.assign(grid.size(), 0);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::int64_t s = grid[i];
        auto it = std::lower_bound(series.steps.begin(), series.steps.end(), s);
        if (it != series.steps.end() && *it == s) {
            const auto j = static_cast<std::size_t>(it - series.steps.begin());
            out.values[i] = series.values[j];
            out.measured[i] = series.point_measured(j) ? 1 : 0;
            continue;
        }
        if (series.size() < 2)
            throw validation_error("align_on_grid: interpolation needs at least two "
                                   "measured points");
        const auto hi = static_cast<std::size_t>(it - series.steps.begin());
        const auto lo = hi - 1;
        const double t = static_cast<double>(s - series.steps[lo]) /
                         static_cast<double>(series.steps[hi] - series.steps[lo]);
        out.values[i] = series.values[lo] + t * (series.values[hi] - series.values[lo]);
    }
    return out;
}

/// Pretext and target series over a shared step grid.
struct PairedRun {
    MetricSeries pretext;
    MetricSeries target;

    std::size_t size() const { return pretext.size(); }
    const std::vector<std::int64_t>& steps() const { return pretext.steps; }

    void validate() const {
        pretext.validate();
        target.validate();
        if (pretext.steps != target.steps)
            throw validation_error("paired run: pretext and target step grids differ; "
                                   "align first");
    }
};

inline PairedRun make_paired_run(MetricSeries pretext, MetricSeries target) {
    PairedRun run{std::move(pretext), std::move(target)};
    run.validate();
    return run;
}

namespace detail {
inline MetricSeries truncate_series(const MetricSeries& s, std::size_t count) {
    MetricSeries out = s;
    out.steps.assign(s.steps.begin(), s.steps.begin() + count);
    out.values.assign(s.values.begin(), s.values.begin() + count);
    if (!s.measured.empty())
        out.measured.assign(s.measured.begin(), s.measured.begin() + count);
    return out;
}
} // namespace detail

/// Truncates both series to steps <= result.stop_step. The resulting length n
/// is the tuple length every mean metric sums over.
inline PairedRun truncate_at_convergence(const PairedRun& run,
                                         const ConvergenceResult& result) {
    run.validate();
    auto it = std::lower_bound(run.pretext.steps.begin(), run.pretext.steps.end(),
                               result.stop_step);
    if (it == run.pretext.steps.end() || *it != result.stop_step)
        throw validation_error("truncate_at_convergence: stop step " +
                               std::to_string(result.stop_step) +
                               " is not a step of the run");
    const auto count = static_cast<std::size_t>(it - run.pretext.steps.begin()) + 1;
    return PairedRun{detail::truncate_series(run.pretext, count),
                     detail::truncate_series(run.target, count)};
}

} // namespace ofm
