#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ofm/aggregation.hpp"
#include "ofm/align.hpp"
#include "ofm/convergence.hpp"
#include "ofm/log_io.hpp"
#include "ofm/metrics.hpp"
#include "ofm/plot.hpp"
#include "ofm/report_io.hpp"

namespace ofm {

struct AnalyzeConfig {
    std::vector<std::string> log_paths;
    std::string run_id; // empty = the single run id present in the logs

    ConvergencePolicy policy{0.0, 3};
    std::string pretext_metric = "loss";
    std::string target_metric = "loss";
    std::optional<double> complement_base; // for higher-is-better metrics

    bool allow_incomparable_units = false;
    bool allow_missing_baseline = false;

    std::string report_path; // empty = no file written
    std::string plot_dir;    // empty = no plot emission
};

namespace detail {

inline std::string config_echo_json(const AnalyzeConfig& cfg) {
    JsonWriter w;
    w.begin_object();
    w.key("logs");
    w.begin_array();
    for (const auto& p : cfg.log_paths) w.value(p);
    w.end_array();
    w.key("run_id");
    w.value(cfg.run_id);
    w.key("patience");
    w.value(cfg.policy.patience);
    w.key("min_delta");
    w.value(cfg.policy.min_delta);
    w.key("pretext_metric");
    w.value(cfg.pretext_metric);
    w.key("target_metric");
    w.value(cfg.target_metric);
    w.key("complement_base");
    if (cfg.complement_base)
        w.value(*cfg.complement_base);
    else
        w.null();
    w.key("allow_incomparable_units");
    w.value(cfg.allow_incomparable_units);
    w.key("allow_missing_baseline");
    w.value(cfg.allow_missing_baseline);
    w.end_object();
    return w.take();
}

} // namespace detail

/// Full mismatch evaluation over already-parsed log records:
/// reduce target runs to best-of-run points, align them onto the pretext
/// step grid by linear interpolation, detect pretext convergence, truncate
/// every fold at the common stop step, and compute all metrics with fold
/// ranges. Returns the report; file outputs are handled by run_analysis.
inline MismatchReport analyze_records(const std::vector<LogRecord>& all_records,
                                      const AnalyzeConfig& cfg) {
    // run id selection
    std::set<std::string> run_ids;
    for (const auto& r : all_records) run_ids.insert(r.run_id);
    if (run_ids.empty()) throw validation_error("no records in the input logs");
    std::string run = cfg.run_id;
    if (run.empty()) {
        if (run_ids.size() > 1) {
            std::string names;
            for (const auto& id : run_ids) names += " '" + id + "'";
            throw validation_error("multiple run ids in the logs:" + names +
                                   "; select one with --run");
        }
        run = *run_ids.begin();
    } else if (!run_ids.count(run)) {
        throw validation_error("run id '" + run + "' not present in the logs");
    }
    std::vector<LogRecord> records;
    for (const auto& r : all_records)
        if (r.run_id == run) records.push_back(r);

    auto pretext_by_fold = pretext_eval_series(records, cfg.pretext_metric,
                                               cfg.complement_base);
    auto target_by_fold = reduce_target_runs(records, cfg.target_metric,
                                             cfg.complement_base);
    if (pretext_by_fold.size() != target_by_fold.size())
        throw validation_error("pretext and target folds disagree: " +
                               std::to_string(pretext_by_fold.size()) + " vs " +
                               std::to_string(target_by_fold.size()));

    std::vector<PairedRun> runs;
    std::vector<FoldConvergence> fold_conv;
    std::optional<std::int64_t> common_stop;

    for (auto& [fold, pretext] : pretext_by_fold) {
        auto it = target_by_fold.find(fold);
        if (it == target_by_fold.end())
            throw validation_error("fold " + std::to_string(fold) +
                                   " has pretext records but no target records");
        MetricSeries& target = it->second;

        if (!cfg.allow_missing_baseline && target.steps.front() != 0)
            throw validation_error(
                "fold " + std::to_string(fold) +
                ": target curve does not start at step 0 (the untrained-pretext "
                "baseline anchors the percent normalization); pass the "
                "missing-baseline override to analyze anyway");

        // Grid: every pretext step inside the target's measured span.
        std::vector<std::int64_t> grid;
        for (auto s : pretext.steps)
            if (s >= target.steps.front() && s <= target.steps.back()) grid.push_back(s);
        if (grid.size() < 1)
            throw validation_error("fold " + std::to_string(fold) +
                                   ": no pretext steps inside the target range");
        MetricSeries pretext_g = align_on_grid(pretext, grid);
        MetricSeries target_g = align_on_grid(target, grid);
        PairedRun paired = make_paired_run(std::move(pretext_g), std::move(target_g));

        const ConvergenceResult conv = detect_convergence(paired.pretext, cfg.policy);
        fold_conv.push_back({conv.stop_step, conv.best_step, conv.converged});
        common_stop = common_stop ? std::min(*common_stop, conv.stop_step)
                                  : conv.stop_step;
        runs.push_back(std::move(paired));
    }

    // Truncate every fold at the common (minimum) stop step.
    for (auto& r : runs)
        r = truncate_at_convergence(
            r, ConvergenceResult{*common_stop, *common_stop, false});

    ReportOptions opt{cfg.allow_incomparable_units, cfg.allow_missing_baseline};
    MismatchReport rep;
    if (runs.size() == 1) {
        rep = make_report(runs.front(), opt);
    } else {
        FoldSet folds{std::move(runs)};
        rep = report_with_ranges(folds, opt);
    }
    rep.run_id = run;
    rep.fold_convergence = fold_conv;

    // Headline convergence: re-detected on the mean pretext curve, but the
    // tuple length is pinned by the common per-fold stop step.
    MetricSeries mean_pretext;
    mean_pretext.steps = rep.steps;
    mean_pretext.values = rep.pretext_curve;
    mean_pretext.metric_name = cfg.pretext_metric;
    mean_pretext.unit = unit_for_metric(cfg.pretext_metric);
    const ConvergenceResult head = detect_convergence(mean_pretext, cfg.policy);
    rep.convergence.stop_step = *common_stop;
    rep.convergence.best_step = head.best_step;
    bool all_converged = true;
    for (const auto& f : fold_conv) all_converged = all_converged && f.converged;
    rep.convergence.converged = all_converged;
    return rep;
}

struct AnalysisOutput {
    MismatchReport report;
    std::string report_bytes;
};

/// End-to-end analyze: read log files, compute the report, write outputs.
inline AnalysisOutput run_analysis(const AnalyzeConfig& cfg) {
    if (cfg.log_paths.empty()) throw validation_error("no input logs given");
    std::vector<LogRecord> records;
    for (const auto& path : cfg.log_paths) {
        auto part = parse_log(load_text(path));
        records.insert(records.end(), part.begin(), part.end());
    }
    AnalysisOutput out;
    out.report = analyze_records(records, cfg);
    out.report_bytes = write_report(out.report, detail::config_echo_json(cfg));
    if (!cfg.report_path.empty()) save_text(cfg.report_path, out.report_bytes);
    if (!cfg.plot_dir.empty()) {
        std::filesystem::create_directories(cfg.plot_dir);
        const PlotData plots = emit_plot_data(out.report);
        const auto dir = std::filesystem::path(cfg.plot_dir);
        save_text((dir / "curves.tsv").string(), plots.curves);
        save_text((dir / "mismatch.tsv").string(), plots.mismatch);
        save_text((dir / "normalized.tsv").string(), plots.normalized);
        save_text((dir / "chart.svg").string(), plots.chart_svg);
    }
    return out;
}

} // namespace ofm
