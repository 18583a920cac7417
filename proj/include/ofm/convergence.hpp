#pragma once

#include <cstdint>
#include <limits>

#include "ofm/series.hpp"

namespace ofm {

/// Early-stopping criterion: stop after `patience` consecutive epochs without
/// an improvement of more than `min_delta`.
struct ConvergencePolicy {
    double min_delta = 0.0;
    std::int64_t patience = 3;

    void validate() const {
        if (!(min_delta >= 0.0))
            throw validation_error("convergence policy: min_delta must be >= 0");
        if (patience < 1)
            throw validation_error("convergence policy: patience must be >= 1");
    }
};

struct ConvergenceResult {
    std::int64_t stop_step = 0; // step where training halts (s_n)
    std::int64_t best_step = 0; // step of the best observed value up to stop_step
    bool converged = false;     // false when the curve ends before patience exhausts
};

/// Scans left to right with keras-style early stopping: an epoch improves iff
/// value < best_so_far - min_delta, and an improvement resets both the wait
/// counter and best_so_far. stop_step is the first step at which `patience`
/// non-improving epochs have accumulated since the last improvement; if that
/// never happens, stop_step is the last step and converged is false.
///
/// best_step reports the earliest step attaining the minimum observed value
/// up to stop_step (independent of min_delta).
inline ConvergenceResult detect_convergence(const MetricSeries& series,
                                            const ConvergencePolicy& policy) {
    series.validate();
    require_canonical(series, "detect_convergence");
    policy.validate();

    double best_tracked = std::numeric_limits<double>::infinity();
    std::int64_t wait = 0;
    std::size_t stop_idx = series.size() - 1;
    bool converged = false;

    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.values[i] < best_tracked - policy.min_delta) {
            best_tracked = series.values[i];
            wait = 0;
        } else {
            ++wait;
            if (wait >= policy.patience) {
                stop_idx = i;
                converged = true;
                break;
            }
        }
    }

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i <= stop_idx; ++i)
        if (series.values[i] < series.values[best_idx]) best_idx = i;

    return ConvergenceResult{series.steps[stop_idx], series.steps[best_idx], converged};
}

} // namespace ofm
