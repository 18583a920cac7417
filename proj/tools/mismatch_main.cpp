// Command-line front end: `analyze` computes mismatch reports from curve
// logs, `lab` runs the toy self-supervised protocol end to end, `plot`
// re-emits plot tables from an existing report.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofm/analyze.hpp"
#include "ofm/lab/protocol.hpp"
#include "ofm/plot.hpp"
#include "ofm/report_io.hpp"
#include "ofm/version.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_parse = 3;
constexpr int exit_validation = 4;
constexpr int exit_numeric = 5;

namespace fs = std::filesystem;

// OFM_OUT_DIR overrides where outputs land; nothing else is overridable from
// the environment.
fs::path resolve_out(const std::string& path) {
    const char* base = std::getenv("OFM_OUT_DIR");
    fs::path p(path);
    if (base && *base && p.is_relative()) return fs::path(base) / p;
    return p;
}

void print_scalar_line(const char* name, const ofm::RangedValue& rv) {
    std::cout << "  " << name << ": ";
    if (rv.skipped) {
        std::cout << "skipped\n";
        return;
    }
    if (rv.center.infinite)
        std::cout << "inf";
    else
        std::cout << ofm::detail::format_sig9(rv.center.value);
    if (!rv.per_fold.empty()) {
        if (rv.range_infinite)
            std::cout << " (+inf, -inf)";
        else
            std::cout << " (+" << ofm::detail::format_sig9(rv.plus) << ", -"
                      << ofm::detail::format_sig9(rv.minus) << ")";
    }
    std::cout << "\n";
}

void print_report_summary(const ofm::MismatchReport& rep) {
    std::cout << "run " << rep.run_id << ": k=" << rep.k << " n=" << rep.n
              << " stop_step=" << rep.convergence.stop_step
              << (rep.convergence.converged ? " (converged)" : " (not converged)")
              << "\n";
    print_scalar_line("mm3", rep.mm3);
    print_scalar_line("msm3", rep.msm3);
    print_scalar_line("csm3", rep.csm3);
    print_scalar_line("msm3_max", rep.msm3_max);
    print_scalar_line("mofm", rep.mofm);
    print_scalar_line("cofm", rep.cofm);
    print_scalar_line("mofm_max", rep.mofm_max);
}

void write_plot_files(const ofm::MismatchReport& rep, const fs::path& dir) {
    fs::create_directories(dir);
    const ofm::PlotData plots = ofm::emit_plot_data(rep);
    ofm::save_text((dir / "curves.tsv").string(), plots.curves);
    ofm::save_text((dir / "mismatch.tsv").string(), plots.mismatch);
    ofm::save_text((dir / "normalized.tsv").string(), plots.normalized);
    ofm::save_text((dir / "chart.svg").string(), plots.chart_svg);
}

std::string sweep_cell(const ofm::RangedValue& rv) {
    if (rv.skipped) return "";
    if (rv.center.infinite || rv.range_infinite) return "inf";
    return ofm::detail::format_shortest(rv.center.value);
}

int run_lab(const std::string& spec_path, std::optional<std::uint64_t> seed_override,
            std::optional<int> workers_override, std::optional<std::string> out_override) {
    ofm::lab::ProtocolRunSpec base = ofm::lab::parse_run_spec(ofm::load_text(spec_path));
    if (seed_override) base.seed = *seed_override;
    if (workers_override) base.workers = *workers_override;
    if (out_override) base.out_dir = *out_override;
    const fs::path out_dir = resolve_out(base.out_dir);
    fs::create_directories(out_dir);

    std::vector<int> sizes = base.representation_sizes;
    const bool sweep = !sizes.empty();
    if (!sweep) sizes = {base.pretext.representation_size};

    std::string sweep_table =
        "representation_size\tmofm\tcofm\tmofm_max\tmsm3\tcsm3\tmsm3_max\n";
    std::vector<std::string> log_files;

    for (int size : sizes) {
        ofm::lab::ProtocolRunSpec spec = base;
        spec.pretext.representation_size = size;
        if (sweep) spec.run_id = base.run_id + "_r" + std::to_string(size);

        const ofm::lab::ProtocolOutcome outcome = ofm::lab::run_protocol(spec);
        const std::string log_name = "curves_" + spec.run_id + ".jsonl";
        ofm::save_text((out_dir / log_name).string(), ofm::write_log(outcome.records));
        log_files.push_back(log_name);

        ofm::AnalyzeConfig cfg;
        cfg.log_paths = {(out_dir / log_name).string()};
        cfg.run_id = spec.run_id;
        cfg.policy = spec.analysis_policy;
        cfg.pretext_metric = ofm::lab::pretext_loss_metric(spec.pretext.task);
        cfg.target_metric = ofm::lab::target_loss_metric;
        cfg.report_path = (out_dir / ("report_" + spec.run_id + ".json")).string();
        cfg.plot_dir = (out_dir / ("plots_" + spec.run_id)).string();
        const ofm::AnalysisOutput analysis = ofm::run_analysis(cfg);
        print_report_summary(analysis.report);

        sweep_table += std::to_string(size) + '\t' + sweep_cell(analysis.report.mofm) +
                       '\t' + sweep_cell(analysis.report.cofm) + '\t' +
                       sweep_cell(analysis.report.mofm_max) + '\t' +
                       sweep_cell(analysis.report.msm3) + '\t' +
                       sweep_cell(analysis.report.csm3) + '\t' +
                       sweep_cell(analysis.report.msm3_max) + '\n';
    }

    if (sweep) {
        ofm::save_text((out_dir / "sweep.tsv").string(), sweep_table);
        std::cout << "sweep table: " << (out_dir / "sweep.tsv").string() << "\n";
    }
    ofm::save_text((out_dir / ("manifest_" + base.run_id + ".json")).string(),
                   ofm::lab::write_manifest(base, log_files));
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"training-trajectory mismatch analyzer and toy lab"};
    app.set_version_flag("--version", ofm::tool_version);
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand(
        "analyze", "compute mismatch metrics from curve logs and write a report");
    ofm::AnalyzeConfig cfg;
    double complement_base = 0.0;
    bool has_complement = false;
    analyze->add_option("--log", cfg.log_paths, "curve log file(s) (line-delimited)")
        ->required();
    analyze->add_option("--run", cfg.run_id, "run id to analyze (default: the only one)");
    analyze->add_option("--patience", cfg.policy.patience,
                        "early-stopping patience (default 3)");
    analyze->add_option("--min-delta", cfg.policy.min_delta,
                        "early-stopping improvement threshold (default 0)");
    analyze->add_option("--pretext-metric", cfg.pretext_metric,
                        "pretext metric name (default loss)");
    analyze->add_option("--target-metric", cfg.target_metric,
                        "target metric name (default loss)");
    analyze
        ->add_option("--complement-base", complement_base,
                     "base for higher-is-better metrics (e.g. 100 for accuracy)")
        ->each([&](const std::string&) { has_complement = true; });
    analyze->add_flag("--allow-incomparable-units", cfg.allow_incomparable_units,
                      "compute M3/MM3 even when the units differ");
    analyze->add_flag("--allow-missing-baseline", cfg.allow_missing_baseline,
                      "normalize from the first available step instead of step 0");
    analyze->add_option("--report", cfg.report_path, "report output path");
    analyze->add_option("--plots", cfg.plot_dir, "directory for plot tables");

    // lab
    auto* lab = app.add_subcommand("lab", "run the toy protocol from a run-spec file");
    std::string spec_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers_override;
    std::optional<std::string> out_override;
    lab->add_option("spec", spec_path, "run-spec file (JSON)")->required();
    lab->add_option("--seed", seed_override, "override the spec seed");
    lab->add_option("--workers", workers_override, "worker threads (0 = hardware)");
    lab->add_option("--out", out_override, "override the spec output directory");

    // plot
    auto* plot = app.add_subcommand("plot", "emit plot tables from an existing report");
    std::string report_path, plot_out;
    plot->add_option("--report", report_path, "report file")->required();
    plot->add_option("--out", plot_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (analyze->parsed()) {
            if (has_complement) cfg.complement_base = complement_base;
            if (!cfg.report_path.empty())
                cfg.report_path = resolve_out(cfg.report_path).string();
            if (!cfg.plot_dir.empty()) cfg.plot_dir = resolve_out(cfg.plot_dir).string();
            const ofm::AnalysisOutput out = ofm::run_analysis(cfg);
            print_report_summary(out.report);
            if (cfg.report_path.empty()) std::cout << out.report_bytes;
            return exit_ok;
        }
        if (lab->parsed())
            return run_lab(spec_path, seed_override, workers_override, out_override);
        if (plot->parsed()) {
            const ofm::MismatchReport rep =
                ofm::parse_report(ofm::load_text(report_path));
            write_plot_files(rep, resolve_out(plot_out));
            return exit_ok;
        }
    } catch (const ofm::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_parse;
    } catch (const ofm::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const ofm::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
