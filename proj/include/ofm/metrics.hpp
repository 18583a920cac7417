#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ofm/align.hpp"
#include "ofm/series.hpp"

namespace ofm {

// ---------------------------------------------------------------------------
// Value model
// ---------------------------------------------------------------------------

/// A metric value that may be the distinguished infinite marker.
struct MismatchValue {
    double value = 0.0;
    bool infinite = false;

    static MismatchValue finite(double v) { return MismatchValue{v, false}; }
    static MismatchValue inf() { return MismatchValue{0.0, true}; }

    friend bool operator==(const MismatchValue& a, const MismatchValue& b) {
        if (a.infinite != b.infinite) return false;
        return a.infinite || a.value == b.value;
    }
};

/// Percent normalization anchors from the target curve: the untrained
/// baseline (first value), the global best, and the earliest index attaining
/// it. `scale` is 100 / (baseline - best) and only meaningful when
/// baseline > best; `infinite` marks the degenerate baseline == best curve
/// that later regresses.
struct NormalizationContext {
    double baseline = 0.0;
    double best = 0.0;
    std::size_t best_index = 0; // 0-based, earliest argmin
    double scale = 0.0;
    bool has_scale = false;
    bool infinite = false;
};

// ---------------------------------------------------------------------------
// Hard mismatch (target minus pretext, comparable metrics only)
// ---------------------------------------------------------------------------

namespace detail {
inline void require_comparable(const PairedRun& run, bool allow_incomparable) {
    if (allow_incomparable) return;
    if (run.pretext.unit != run.target.unit)
        throw validation_error("hard mismatch requires comparable metrics: pretext unit '" +
                               run.pretext.unit + "' vs target unit '" + run.target.unit +
                               "' (pass the comparable-units override to force)");
}

inline void require_canonical_run(const PairedRun& run, const char* op) {
    require_canonical(run.pretext, op);
    require_canonical(run.target, op);
}
} // namespace detail

/// Per-step difference target - pretext. Positive means the target model
/// performs worse than the pretext model at that step.
inline std::vector<double> m3_curve(const PairedRun& run, bool allow_incomparable = false) {
    run.validate();
    detail::require_canonical_run(run, "m3_curve");
    detail::require_comparable(run, allow_incomparable);
    std::vector<double> out(run.size());
    for (std::size_t i = 0; i < run.size(); ++i)
        out[i] = run.target.values[i] - run.pretext.values[i];
    return out;
}

/// Mean of the per-step hard mismatch over the n steps up to convergence.
/// This is a bias: positive and negative steps cancel.
inline double mm3(const PairedRun& run, bool allow_incomparable = false) {
    const auto curve = m3_curve(run, allow_incomparable);
    double sum = 0.0;
    for (double v : curve) sum += v;
    return sum / static_cast<double>(curve.size());
}

// ---------------------------------------------------------------------------
// Soft mismatch (target excess over its running minimum)
// ---------------------------------------------------------------------------

/// Per-step excess of the target value over the running (prefix) minimum.
/// Never looks at future values, so the curve is causal.
inline std::vector<double> sm3_curve(const MetricSeries& target) {
    target.validate();
    require_canonical(target, "sm3_curve");
    std::vector<double> out(target.size());
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < target.size(); ++i) {
        running_min = std::min(running_min, target.values[i]);
        out[i] = target.values[i] - running_min;
    }
    return out;
}

inline double msm3(const MetricSeries& target) {
    const auto curve = sm3_curve(target);
    double sum = 0.0;
    for (double v : curve) sum += v;
    return sum / static_cast<double>(curve.size());
}

/// Soft mismatch at the convergence step (the value one would naively ship).
inline double csm3(const MetricSeries& target) {
    return sm3_curve(target).back();
}

/// Maximum soft mismatch over the whole training run.
inline double msm3_max(const MetricSeries& target) {
    const auto curve = sm3_curve(target);
    return *std::max_element(curve.begin(), curve.end());
}

// ---------------------------------------------------------------------------
// Percent normalization and the objective function mismatch
// ---------------------------------------------------------------------------

struct NormalizeResult {
    NormalizationContext context;
    std::vector<double> values; // empty when context.infinite
};

/// Scales the target curve to percent of learned improvement between the
/// untrained baseline (first value, step 0) and the global best. All values
/// are scaled, including those above the baseline, so values > 100 remain
/// representable. A flat baseline == best curve maps to all-zero; a flat
/// baseline that some later value exceeds has no interval to normalize by
/// and is flagged infinite.
inline NormalizeResult normalize(const MetricSeries& target,
                                 bool allow_missing_baseline = false) {
    target.validate();
    require_canonical(target, "normalize");
    if (!allow_missing_baseline && target.steps.front() != 0)
        throw validation_error(
            "normalize: the first step must be 0 (target of the untrained pretext "
            "model defines the baseline); pass the missing-baseline override to use "
            "the first available point instead");

    NormalizeResult res;
    auto& ctx = res.context;
    ctx.baseline = target.values.front();
    ctx.best_index = 0;
    for (std::size_t i = 1; i < target.size(); ++i)
        if (target.values[i] < target.values[ctx.best_index]) ctx.best_index = i;
    ctx.best = target.values[ctx.best_index];

    if (ctx.baseline > ctx.best) {
        const double denom = ctx.baseline - ctx.best;
        ctx.scale = 100.0 / denom;
        ctx.has_scale = true;
        res.values.resize(target.size());
        for (std::size_t i = 0; i < target.size(); ++i)
            res.values[i] = 100.0 * target.values[i] / denom;
        return res;
    }

    // baseline == best (the baseline is never above the global minimum)
    const bool all_equal = std::all_of(target.values.begin(), target.values.end(),
                                       [&](double v) { return v == ctx.baseline; });
    if (all_equal) {
        res.values.assign(target.size(), 0.0);
        return res;
    }
    ctx.infinite = true;
    return res;
}

/// Soft mismatch of the normalized curve. In the infinite case the mismatch
/// is 0 until the first value exceeding the flat baseline and infinite from
/// that step on (the model forgot what it never measurably learned).
inline std::vector<MismatchValue> ofm_curve(const MetricSeries& target,
                                            bool allow_missing_baseline = false) {
    const auto norm = normalize(target, allow_missing_baseline);
    std::vector<MismatchValue> out(target.size());
    if (!norm.context.infinite) {
        MetricSeries normalized = target;
        normalized.values = norm.values;
        const auto sm3 = sm3_curve(normalized);
        for (std::size_t i = 0; i < sm3.size(); ++i) out[i] = MismatchValue::finite(sm3[i]);
        return out;
    }
    bool forgotten = false;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target.values[i] > norm.context.baseline) forgotten = true;
        out[i] = forgotten ? MismatchValue::inf() : MismatchValue::finite(0.0);
    }
    return out;
}

namespace detail {
inline MismatchValue mean_of(const std::vector<MismatchValue>& curve) {
    double sum = 0.0;
    for (const auto& v : curve) {
        if (v.infinite) return MismatchValue::inf();
        sum += v.value;
    }
    return MismatchValue::finite(sum / static_cast<double>(curve.size()));
}

inline MismatchValue max_of(const std::vector<MismatchValue>& curve) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : curve) {
        if (v.infinite) return MismatchValue::inf();
        best = std::max(best, v.value);
    }
    return MismatchValue::finite(best);
}
} // namespace detail

/// Mean percent mismatch over the run.
inline MismatchValue mofm(const MetricSeries& target, bool allow_missing_baseline = false) {
    return detail::mean_of(ofm_curve(target, allow_missing_baseline));
}

/// Percent mismatch at the convergence step.
inline MismatchValue cofm(const MetricSeries& target, bool allow_missing_baseline = false) {
    return ofm_curve(target, allow_missing_baseline).back();
}

/// Maximum percent mismatch over the run.
inline MismatchValue mofm_max(const MetricSeries& target,
                              bool allow_missing_baseline = false) {
    return detail::max_of(ofm_curve(target, allow_missing_baseline));
}

// ---------------------------------------------------------------------------
// Report model
// ---------------------------------------------------------------------------

/// A scalar metric with its cross-fold spread. `center` is computed on the
/// fold-mean curves (the headline value); plus/minus span the per-fold
/// extrema, clamped at zero since an aggregate computed on mean curves can
/// fall outside the per-fold hull for normalized metrics.
struct RangedValue {
    MismatchValue center;
    std::vector<MismatchValue> per_fold; // empty for single-run reports
    double plus = 0.0;
    double minus = 0.0;
    bool range_infinite = false; // center or any fold infinite
    bool skipped = false;        // metric not computed (incomparable units)
};

struct FoldConvergence {
    std::int64_t stop_step = 0;
    std::int64_t best_step = 0;
    bool converged = false;
};

/// Everything one mismatch evaluation produces: aligned mean curves, the
/// per-step mismatch curves, scalar summaries with fold ranges, and the
/// normalization anchors they were computed from.
struct MismatchReport {
    std::string run_id;
    std::size_t k = 1; // fold count (1 = single run)
    std::size_t n = 0; // tuple length after convergence truncation

    std::vector<std::int64_t> steps;
    std::vector<double> pretext_curve;
    std::vector<double> target_curve;
    std::vector<std::uint8_t> target_measured;

    bool m3_available = false;
    std::string m3_skipped_reason;
    std::vector<double> m3;
    std::vector<double> sm3;
    std::vector<MismatchValue> ofm;

    NormalizationContext normalization;

    ConvergenceResult convergence;           // on the (mean) pretext curve
    std::vector<FoldConvergence> fold_convergence;

    RangedValue mm3, msm3, csm3, msm3_max, mofm, cofm, mofm_max;
};

} // namespace ofm
