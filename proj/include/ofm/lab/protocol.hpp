#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ofm/convergence.hpp"
#include "ofm/lab/dataset.hpp"
#include "ofm/lab/trainer.hpp"
#include "ofm/log_io.hpp"
#include "ofm/report_io.hpp"
#include "ofm/version.hpp"

namespace ofm::lab {

/// Declarative description of one end-to-end toy run: dataset, pretext task,
/// target probe, snapshot schedule, folds and seeds.
struct ProtocolRunSpec {
    std::string run_id = "run";
    std::uint64_t seed = 1;
    int dataset_n = 720;
    int folds = 5;
    PretextSpec pretext;
    TargetSpec target;
    ConvergencePolicy analysis_policy{0.0, 3};
    std::vector<int> representation_sizes; // non-empty = sweep over sizes
    std::string out_dir = "out";
    int workers = 0; // 0 = hardware concurrency

    void validate() const {
        if (folds < 2) throw validation_error("run spec: folds must be >= 2");
        if (dataset_n < folds) throw validation_error("run spec: dataset too small");
        pretext.validate();
        target.validate();
        analysis_policy.validate();
    }
};

inline ProtocolRunSpec parse_run_spec(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("run spec: ") + e.what());
    }
    ProtocolRunSpec spec;
    try {
        spec.run_id = j.value("run_id", spec.run_id);
        spec.seed = j.value("seed", spec.seed);
        spec.dataset_n = j.value("dataset_n", spec.dataset_n);
        spec.folds = j.value("folds", spec.folds);
        spec.out_dir = j.value("out_dir", spec.out_dir);
        spec.workers = j.value("workers", spec.workers);
        if (j.contains("representation_sizes"))
            spec.representation_sizes = j.at("representation_sizes").get<std::vector<int>>();
        if (j.contains("pretext")) {
            const auto& p = j.at("pretext");
            spec.pretext.task = pretext_task_from_string(p.value("task", "autoencode"));
            spec.pretext.representation_size =
                p.value("representation_size", spec.pretext.representation_size);
            spec.pretext.hidden = p.value("hidden", spec.pretext.hidden);
            spec.pretext.epochs = p.value("epochs", spec.pretext.epochs);
            if (p.contains("snapshot_steps"))
                spec.pretext.snapshot_steps =
                    p.at("snapshot_steps").get<std::vector<std::int64_t>>();
            spec.pretext.color_jitter = p.value("color_jitter", false);
            spec.pretext.horizontal_flip = p.value("horizontal_flip", false);
            spec.pretext.batch_size = p.value("batch_size", spec.pretext.batch_size);
            spec.pretext.lr = p.value("lr", spec.pretext.lr);
            spec.pretext.init_scale = p.value("init_scale", spec.pretext.init_scale);
            spec.pretext.noise_std = p.value("noise_std", spec.pretext.noise_std);
        }
        if (j.contains("target")) {
            const auto& t = j.at("target");
            spec.target.head = head_kind_from_string(t.value("head", "linear"));
            spec.target.task = factor_from_string(t.value("task", "hue"));
            spec.target.epochs = t.value("epochs", spec.target.epochs);
            spec.target.hidden = t.value("hidden", spec.target.hidden);
            spec.target.batch_size = t.value("batch_size", spec.target.batch_size);
            spec.target.lr = t.value("lr", spec.target.lr);
            spec.target.patience = t.value("patience", spec.target.patience);
            spec.target.min_delta = t.value("min_delta", spec.target.min_delta);
        }
        if (j.contains("analysis")) {
            const auto& a = j.at("analysis");
            spec.analysis_policy.patience = a.value("patience", spec.analysis_policy.patience);
            spec.analysis_policy.min_delta =
                a.value("min_delta", spec.analysis_policy.min_delta);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("run spec: ") + e.what());
    }
    if (spec.pretext.snapshot_steps.empty()) {
        // default schedule: 0, then powers-of-two-ish up to epochs
        spec.pretext.snapshot_steps = {0};
        for (std::int64_t s = 1; s < spec.pretext.epochs; s *= 2)
            spec.pretext.snapshot_steps.push_back(s);
        spec.pretext.snapshot_steps.push_back(spec.pretext.epochs);
    }
    spec.validate();
    return spec;
}

namespace detail {

template <typename F>
void parallel_for(std::size_t jobs, int workers, F&& body) {
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1))
                    body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

struct ProtocolOutcome {
    std::vector<LogRecord> records; // deterministic order
    std::string log_path;
    std::string manifest_path;
};

/// Runs the full toy protocol for one spec: per fold, train the pretext
/// model with snapshots, fully retrain a probe per snapshot, and merge all
/// curve logs in (fold, snapshot, epoch) order. Fold results are computed in
/// parallel but each job is seeded independently, so the merged log bytes do
/// not depend on the worker count.
inline ProtocolOutcome run_protocol(const ProtocolRunSpec& spec) {
    spec.validate();
    const SyntheticDataset ds = generate_dataset(spec.seed, spec.dataset_n);

    // fold f evaluates on indices with i % folds == f, trains on the rest
    std::vector<std::vector<int>> fold_eval(static_cast<std::size_t>(spec.folds));
    std::vector<std::vector<int>> fold_train(static_cast<std::size_t>(spec.folds));
    for (int i = 0; i < ds.n; ++i)
        for (int f = 0; f < spec.folds; ++f)
            (i % spec.folds == f ? fold_eval : fold_train)[static_cast<std::size_t>(f)]
                .push_back(i);

    // Phase 1: pretext training per fold.
    std::vector<PretextOutcome> pretext(static_cast<std::size_t>(spec.folds));
    detail::parallel_for(static_cast<std::size_t>(spec.folds), spec.workers,
                         [&](std::size_t f) {
                             pretext[f] = train_pretext(
                                 spec.pretext, ds, fold_train[f], fold_eval[f], spec.seed,
                                 spec.run_id, static_cast<std::int64_t>(f));
                         });

    // Phase 2: one probe per (fold, snapshot).
    struct Job {
        std::size_t fold;
        std::int64_t step;
    };
    std::vector<Job> jobs;
    for (std::size_t f = 0; f < pretext.size(); ++f)
        for (const auto& [step, enc] : pretext[f].snapshots) jobs.push_back({f, step});
    std::vector<std::vector<LogRecord>> probe_logs(jobs.size());
    detail::parallel_for(jobs.size(), spec.workers, [&](std::size_t j) {
        const auto [f, step] = jobs[j];
        probe_logs[j] = train_target_on_snapshot(
            pretext[f].snapshots.at(step), spec.target, ds, fold_train[f], fold_eval[f],
            spec.seed, spec.run_id, static_cast<std::int64_t>(f), step);
    });

    ProtocolOutcome outcome;
    for (std::size_t f = 0; f < pretext.size(); ++f) {
        outcome.records.insert(outcome.records.end(), pretext[f].records.begin(),
                               pretext[f].records.end());
        for (std::size_t j = 0; j < jobs.size(); ++j)
            if (jobs[j].fold == f)
                outcome.records.insert(outcome.records.end(), probe_logs[j].begin(),
                                       probe_logs[j].end());
    }
    return outcome;
}

/// JSON manifest describing one protocol run: the seed, the full effective
/// configuration and the emitted files.
inline std::string write_manifest(const ProtocolRunSpec& spec,
                                  const std::vector<std::string>& log_files) {
    ofm::detail::JsonWriter w;
    w.begin_object();
    w.key("tool_version");
    w.value(tool_version);
    w.key("run_id");
    w.value(spec.run_id);
    w.key("seed");
    w.value(static_cast<std::int64_t>(spec.seed));
    w.key("dataset_n");
    w.value(spec.dataset_n);
    w.key("folds");
    w.value(spec.folds);
    w.key("pretext");
    w.begin_object();
    w.key("task");
    w.value(to_string(spec.pretext.task));
    w.key("representation_size");
    w.value(spec.pretext.representation_size);
    w.key("hidden");
    w.value(spec.pretext.hidden);
    w.key("epochs");
    w.value(spec.pretext.epochs);
    w.key("snapshot_steps");
    w.begin_array();
    for (auto s : spec.pretext.snapshot_steps) w.value(s);
    w.end_array();
    w.key("color_jitter");
    w.value(spec.pretext.color_jitter);
    w.key("horizontal_flip");
    w.value(spec.pretext.horizontal_flip);
    w.key("batch_size");
    w.value(spec.pretext.batch_size);
    w.key("lr");
    w.value(spec.pretext.lr);
    w.key("init_scale");
    w.value(spec.pretext.init_scale);
    w.key("noise_std");
    w.value(spec.pretext.noise_std);
    w.end_object();
    w.key("target");
    w.begin_object();
    w.key("head");
    w.value(to_string(spec.target.head));
    w.key("task");
    w.value(to_string(spec.target.task));
    w.key("epochs");
    w.value(spec.target.epochs);
    w.key("hidden");
    w.value(spec.target.hidden);
    w.key("batch_size");
    w.value(spec.target.batch_size);
    w.key("lr");
    w.value(spec.target.lr);
    w.key("patience");
    w.value(spec.target.patience);
    w.key("min_delta");
    w.value(spec.target.min_delta);
    w.end_object();
    w.key("analysis");
    w.begin_object();
    w.key("patience");
    w.value(spec.analysis_policy.patience);
    w.key("min_delta");
    w.value(spec.analysis_policy.min_delta);
    w.end_object();
    w.key("representation_sizes");
    w.begin_array();
    for (int s : spec.representation_sizes) w.value(s);
    w.end_array();
    w.key("logs");
    w.begin_array();
    for (const auto& f : log_files) w.value(f);
    w.end_array();
    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

} // namespace ofm::lab
