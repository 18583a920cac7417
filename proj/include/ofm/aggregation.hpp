#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ofm/metrics.hpp"

namespace ofm {

/// k cross-validation folds sharing one step grid and one metric pairing.
struct FoldSet {
    std::vector<PairedRun> folds;

    std::size_t k() const { return folds.size(); }

    void validate() const {
        if (folds.size() < 2)
            throw validation_error("fold set needs k >= 2 folds");
        for (const auto& f : folds) f.validate();
        const auto& first = folds.front();
        for (std::size_t i = 1; i < folds.size(); ++i) {
            const auto& f = folds[i];
            if (f.pretext.steps != first.pretext.steps)
                throw validation_error("fold " + std::to_string(i) +
                                       " is on a different step grid");
            if (f.pretext.metric_name != first.pretext.metric_name ||
                f.target.metric_name != first.target.metric_name ||
                f.pretext.unit != first.pretext.unit ||
                f.target.unit != first.target.unit ||
                f.pretext.direction != first.pretext.direction ||
                f.target.direction != first.target.direction)
                throw validation_error("fold " + std::to_string(i) +
                                       " disagrees on metric name/unit/direction");
        }
    }
};

/// Elementwise unweighted mean of the fold curves. Interpolation flags are
/// intersected: a mean point counts as measured only if every fold measured it.
inline PairedRun mean_curves(const FoldSet& folds) {
    folds.validate();
    PairedRun out = folds.folds.front();
    const std::size_t n = out.size();
    const double k = static_cast<double>(folds.k());
    for (std::size_t i = 0; i < n; ++i) {
        double ps = 0.0, ts = 0.0;
        bool measured = true;
        for (const auto& f : folds.folds) {
            ps += f.pretext.values[i];
            ts += f.target.values[i];
            measured = measured && f.target.point_measured(i);
        }
        out.pretext.values[i] = ps / k;
        out.target.values[i] = ts / k;
        if (out.target.measured.empty()) out.target.measured.assign(n, 1);
        out.target.measured[i] = measured ? 1 : 0;
    }
    return out;
}

namespace detail {

inline RangedValue ranged_from(MismatchValue center, std::vector<MismatchValue> per_fold) {
    RangedValue rv;
    rv.center = center;
    rv.per_fold = std::move(per_fold);
    rv.range_infinite = center.infinite;
    for (const auto& v : rv.per_fold) rv.range_infinite = rv.range_infinite || v.infinite;
    // an infinite fold poisons the headline value rather than being dropped
    if (rv.range_infinite) rv.center = MismatchValue::inf();
    if (!rv.range_infinite && !rv.per_fold.empty()) {
        double lo = rv.per_fold.front().value, hi = lo;
        for (const auto& v : rv.per_fold) {
            lo = std::min(lo, v.value);
            hi = std::max(hi, v.value);
        }
        rv.plus = std::max(0.0, hi - center.value);
        rv.minus = std::max(0.0, center.value - lo);
    }
    return rv;
}

inline RangedValue ranged_scalar(const FoldSet& folds, const PairedRun& mean_run,
                                 const std::function<MismatchValue(const PairedRun&)>& f) {
    std::vector<MismatchValue> per_fold;
    per_fold.reserve(folds.k());
    for (const auto& fold : folds.folds) per_fold.push_back(f(fold));
    return ranged_from(f(mean_run), std::move(per_fold));
}

} // namespace detail

struct ReportOptions {
    bool allow_incomparable_units = false;
    bool allow_missing_baseline = false;
};

/// Report for a single run: no fold ranges, scalars carry only the center.
inline MismatchReport make_report(const PairedRun& run, const ReportOptions& opt = {}) {
    run.validate();
    MismatchReport rep;
    rep.k = 1;
    rep.n = run.size();
    rep.steps = run.steps();
    rep.pretext_curve = run.pretext.values;
    rep.target_curve = run.target.values;
    rep.target_measured.assign(run.size(), 1);
    for (std::size_t i = 0; i < run.size(); ++i)
        rep.target_measured[i] = run.target.point_measured(i) ? 1 : 0;

    if (run.pretext.unit == run.target.unit || opt.allow_incomparable_units) {
        rep.m3_available = true;
        rep.m3 = m3_curve(run, opt.allow_incomparable_units);
        rep.mm3.center = MismatchValue::finite(mm3(run, opt.allow_incomparable_units));
    } else {
        rep.m3_skipped_reason = "incomparable units: pretext '" + run.pretext.unit +
                                "' vs target '" + run.target.unit + "'";
        rep.mm3.skipped = true;
    }

    rep.sm3 = sm3_curve(run.target);
    rep.msm3.center = MismatchValue::finite(msm3(run.target));
    rep.csm3.center = MismatchValue::finite(csm3(run.target));
    rep.msm3_max.center = MismatchValue::finite(msm3_max(run.target));

    rep.normalization = normalize(run.target, opt.allow_missing_baseline).context;
    rep.ofm = ofm_curve(run.target, opt.allow_missing_baseline);
    rep.mofm.center = mofm(run.target, opt.allow_missing_baseline);
    rep.cofm.center = cofm(run.target, opt.allow_missing_baseline);
    rep.mofm_max.center = mofm_max(run.target, opt.allow_missing_baseline);
    rep.mofm.range_infinite = rep.mofm.center.infinite;
    rep.cofm.range_infinite = rep.cofm.center.infinite;
    rep.mofm_max.range_infinite = rep.mofm_max.center.infinite;
    return rep;
}

/// Report over a fold set truncated at a common convergence step: every
/// scalar is computed on the fold-mean curves (the headline value) and per
/// fold, with plus/minus spans over the per-fold extrema. A fold with an
/// infinite normalized metric poisons that metric's aggregate rather than
/// being dropped.
inline MismatchReport report_with_ranges(const FoldSet& folds,
                                         const ReportOptions& opt = {}) {
    folds.validate();
    const PairedRun mean_run = mean_curves(folds);
    MismatchReport rep = make_report(mean_run, opt);
    rep.k = folds.k();

    if (rep.m3_available) {
        rep.mm3 = detail::ranged_scalar(folds, mean_run, [&](const PairedRun& r) {
            return MismatchValue::finite(mm3(r, opt.allow_incomparable_units));
        });
    }
    rep.msm3 = detail::ranged_scalar(folds, mean_run, [](const PairedRun& r) {
        return MismatchValue::finite(msm3(r.target));
    });
    rep.csm3 = detail::ranged_scalar(folds, mean_run, [](const PairedRun& r) {
        return MismatchValue::finite(csm3(r.target));
    });
    rep.msm3_max = detail::ranged_scalar(folds, mean_run, [](const PairedRun& r) {
        return MismatchValue::finite(msm3_max(r.target));
    });
    rep.mofm = detail::ranged_scalar(folds, mean_run, [&](const PairedRun& r) {
        return mofm(r.target, opt.allow_missing_baseline);
    });
    rep.cofm = detail::ranged_scalar(folds, mean_run, [&](const PairedRun& r) {
        return cofm(r.target, opt.allow_missing_baseline);
    });
    rep.mofm_max = detail::ranged_scalar(folds, mean_run, [&](const PairedRun& r) {
        return mofm_max(r.target, opt.allow_missing_baseline);
    });
    return rep;
}

} // namespace ofm
