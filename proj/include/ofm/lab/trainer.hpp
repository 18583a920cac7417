#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ofm/errors.hpp"
#include "ofm/lab/dataset.hpp"
#include "ofm/lab/net.hpp"
#include "ofm/log_io.hpp"

namespace ofm::lab {

enum class PretextTask { autoencode, denoise, grayscale_reconstruct, rotate4 };

inline const char* to_string(PretextTask t) {
    switch (t) {
    case PretextTask::autoencode: return "autoencode";
    case PretextTask::denoise: return "denoise";
    case PretextTask::grayscale_reconstruct: return "grayscale_reconstruct";
    case PretextTask::rotate4: return "rotate4";
    }
    return "?";
}

inline PretextTask pretext_task_from_string(const std::string& s) {
    if (s == "autoencode") return PretextTask::autoencode;
    if (s == "denoise") return PretextTask::denoise;
    if (s == "grayscale_reconstruct") return PretextTask::grayscale_reconstruct;
    if (s == "rotate4") return PretextTask::rotate4;
    throw parse_error("unknown pretext task '" + s + "'");
}

enum class HeadKind { linear, mlp2, mlp3 };

inline const char* to_string(HeadKind h) {
    switch (h) {
    case HeadKind::linear: return "linear";
    case HeadKind::mlp2: return "mlp2";
    case HeadKind::mlp3: return "mlp3";
    }
    return "?";
}

inline HeadKind head_kind_from_string(const std::string& s) {
    if (s == "linear") return HeadKind::linear;
    if (s == "mlp2") return HeadKind::mlp2;
    if (s == "mlp3") return HeadKind::mlp3;
    throw parse_error("unknown target head '" + s + "'");
}

struct PretextSpec {
    PretextTask task = PretextTask::autoencode;
    int representation_size = 8;
    int hidden = 64;
    int epochs = 32;
    std::vector<std::int64_t> snapshot_steps; // must start at 0
    bool color_jitter = false;
    bool horizontal_flip = false;
    int batch_size = 32;
    double lr = 2e-3;
    double init_scale = 1.0;
    double noise_std = 0.25; // denoise only

    void validate() const {
        if (representation_size < 1 || hidden < 1 || epochs < 1 || batch_size < 1)
            throw validation_error("pretext spec: sizes and epochs must be positive");
        if (snapshot_steps.empty() || snapshot_steps.front() != 0)
            throw validation_error("pretext spec: snapshot steps must start at 0 "
                                   "(the untrained model anchors the baseline)");
        for (std::size_t i = 0; i < snapshot_steps.size(); ++i) {
            if (i > 0 && snapshot_steps[i] <= snapshot_steps[i - 1])
                throw validation_error("pretext spec: snapshot steps must increase");
            if (snapshot_steps[i] > epochs)
                throw validation_error("pretext spec: snapshot step beyond epochs");
        }
    }
};

struct TargetSpec {
    HeadKind head = HeadKind::linear;
    Factor task = Factor::hue;
    int epochs = 40;
    int hidden = 16;
    int batch_size = 32;
    double lr = 1e-2;
    std::int64_t patience = 10; // probe early stopping; epochs is the hard cap
    double min_delta = 0.0;

    void validate() const {
        if (epochs < 1 || hidden < 1 || batch_size < 1 || patience < 1)
            throw validation_error("target spec: epochs/hidden/batch/patience must be "
                                   "positive");
    }
};

// ---------------------------------------------------------------------------
// Pretext model = encoder (tanh bottleneck) + task head
// ---------------------------------------------------------------------------

struct PretextModel {
    TinyNet encoder;
    TinyNet head;
    PretextTask task;
};

inline PretextModel make_pretext_model(const PretextSpec& spec, Rng& rng) {
    PretextModel m;
    m.task = spec.task;
    m.encoder = make_net({image_dim, spec.hidden, spec.representation_size}, {1, 1}, rng,
                         spec.init_scale);
    switch (spec.task) {
    case PretextTask::autoencode:
    case PretextTask::denoise:
        m.head = make_net({spec.representation_size, spec.hidden, image_dim}, {1, 0},
                          rng, spec.init_scale);
        break;
    case PretextTask::grayscale_reconstruct:
        m.head = make_net({spec.representation_size, spec.hidden,
                           image_side * image_side},
                          {1, 0}, rng, spec.init_scale);
        break;
    case PretextTask::rotate4:
        m.head = make_net({spec.representation_size, 4}, {0}, rng, spec.init_scale);
        break;
    }
    return m;
}

/// One training/evaluation example for a pretext task.
struct PretextExample {
    std::array<double, image_dim> input;
    std::vector<double> target; // reconstruction tasks
    int label = 0;              // rotate4
};

namespace detail {

inline void apply_augmentations(const PretextSpec& spec, const double* src, double* dst,
                                Rng& rng) {
    std::array<double, image_dim> tmp;
    const double* cur = src;
    if (spec.color_jitter) {
        const int perm = static_cast<int>(rng.below(6));
        permute_channels(cur, tmp.data(), perm);
        std::copy(tmp.begin(), tmp.end(), dst);
        cur = dst;
    }
    if (spec.horizontal_flip && rng.below(2) == 1) {
        flip_horizontal(cur, tmp.data());
        std::copy(tmp.begin(), tmp.end(), dst);
        cur = dst;
    }
    if (cur != dst) std::copy(cur, cur + image_dim, dst);
}

inline void finish_example(const PretextSpec& spec, PretextTask task,
                           const std::array<double, image_dim>& base, Rng& rng,
                           int fixed_rotation, PretextExample& ex) {
    switch (task) {
    case PretextTask::autoencode:
        ex.input = base;
        ex.target.assign(base.begin(), base.end());
        break;
    case PretextTask::denoise:
        ex.target.assign(base.begin(), base.end());
        ex.input = base;
        for (auto& v : ex.input) v += spec.noise_std * rng.normal();
        break;
    case PretextTask::grayscale_reconstruct:
        ex.input = base;
        ex.target.resize(image_side * image_side);
        luminance(base.data(), ex.target.data());
        break;
    case PretextTask::rotate4: {
        const int k = fixed_rotation >= 0 ? fixed_rotation : static_cast<int>(rng.below(4));
        rotate90(base.data(), ex.input.data(), k);
        ex.label = k;
        break;
    }
    }
}

} // namespace detail

/// Training example for sample `idx` at this point in the epoch stream.
/// Augmentation and noise draws come from `rng` in call order, so the stream
/// is a pure function of the seed and the (shuffled) sample order.
inline void build_train_example(const PretextSpec& spec, const SyntheticDataset& ds,
                                int idx, Rng& rng, PretextExample& ex) {
    std::array<double, image_dim> base;
    std::copy(ds.image(idx), ds.image(idx) + image_dim, base.data());
    detail::apply_augmentations(spec, ds.image(idx), base.data(), rng);
    detail::finish_example(spec, spec.task, base, rng, -1, ex);
}

/// Evaluation examples for sample `idx`: augmentation-free, with per-sample
/// fixed noise (denoise) or all four rotations (rotate4), so eval curves are
/// smooth functions of the weights alone.
inline void build_eval_examples(const PretextSpec& spec, const SyntheticDataset& ds,
                                int idx, std::uint64_t seed,
                                std::vector<PretextExample>& out) {
    out.clear();
    std::array<double, image_dim> base;
    std::copy(ds.image(idx), ds.image(idx) + image_dim, base.data());
    if (spec.task == PretextTask::rotate4) {
        out.resize(4);
        for (int k = 0; k < 4; ++k) {
            Rng unused(0);
            detail::finish_example(spec, spec.task, base, unused, k, out[k]);
        }
        return;
    }
    out.resize(1);
    Rng noise_rng(derive_seed(seed, 0xE7A1, static_cast<std::uint64_t>(idx)));
    detail::finish_example(spec, spec.task, base, noise_rng, -1, out[0]);
}

struct EvalStats {
    double loss = 0.0;
    double accuracy = 0.0; // classification tasks only, percent
    bool has_accuracy = false;
};

inline EvalStats evaluate_pretext(const PretextModel& model, const PretextSpec& spec,
                                  const SyntheticDataset& ds,
                                  const std::vector<int>& eval_idx, std::uint64_t seed) {
    Activations enc_acts, head_acts;
    std::vector<double> d_unused;
    std::vector<PretextExample> examples;
    double loss_sum = 0.0;
    std::int64_t count = 0, correct = 0;
    for (int idx : eval_idx) {
        build_eval_examples(spec, ds, idx, seed, examples);
        for (const auto& ex : examples) {
            const auto& repr = forward(model.encoder, ex.input.data(), enc_acts);
            const auto& out = forward(model.head, repr.data(), head_acts);
            if (spec.task == PretextTask::rotate4) {
                std::vector<double> d;
                loss_sum += cross_entropy_loss(out, ex.label, d);
                int argmax = 0;
                for (std::size_t i = 1; i < out.size(); ++i)
                    if (out[i] > out[static_cast<std::size_t>(argmax)])
                        argmax = static_cast<int>(i);
                if (argmax == ex.label) ++correct;
            } else {
                std::vector<double> d;
                loss_sum += mse_loss(out, ex.target.data(), d);
            }
            ++count;
        }
    }
    EvalStats stats;
    stats.loss = loss_sum / static_cast<double>(count);
    if (spec.task == PretextTask::rotate4) {
        stats.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(count);
        stats.has_accuracy = true;
    }
    return stats;
}

/// Metric name a pretext task logs its evaluation loss under. Reconstruction
/// losses and classification losses are deliberately distinct names so the
/// hard-mismatch comparability check refuses to subtract them.
inline const char* pretext_loss_metric(PretextTask task) {
    return task == PretextTask::rotate4 ? "cross_entropy" : "mse_loss";
}

inline constexpr const char* target_loss_metric = "cross_entropy";

struct PretextOutcome {
    std::map<std::int64_t, TinyNet> snapshots; // encoder copies, keyed by epoch
    std::vector<LogRecord> records;
};

/// Trains the pretext model, logging the evaluation curve per epoch (epoch 0
/// is the untrained model) and snapshotting encoder weights at the requested
/// steps. Aborts with the offending epoch if the loss turns non-finite.
inline PretextOutcome train_pretext(const PretextSpec& spec, const SyntheticDataset& ds,
                                    const std::vector<int>& train_idx,
                                    const std::vector<int>& eval_idx, std::uint64_t seed,
                                    const std::string& run_id, std::int64_t fold) {
    spec.validate();
    if (train_idx.empty() || eval_idx.empty())
        throw validation_error("pretext training needs non-empty train and eval splits");

    Rng init_rng(derive_seed(seed, 0x9E7, static_cast<std::uint64_t>(fold)));
    PretextModel model = make_pretext_model(spec, init_rng);
    Adam opt_enc, opt_head;
    opt_enc.lr = spec.lr;
    opt_head.lr = spec.lr;
    opt_enc.reset(model.encoder);
    opt_head.reset(model.head);

    PretextOutcome outcome;
    auto log_eval = [&](std::int64_t epoch) {
        const EvalStats stats = evaluate_pretext(model, spec, ds, eval_idx, seed);
        if (!std::isfinite(stats.loss))
            throw numeric_error("pretext training diverged: non-finite eval loss at "
                                "epoch " + std::to_string(epoch));
        outcome.records.push_back({run_id, fold, SeriesKind::pretext_eval, std::nullopt,
                                   epoch, pretext_loss_metric(spec.task), stats.loss,
                                   Direction::lower_is_better});
        if (stats.has_accuracy)
            outcome.records.push_back({run_id, fold, SeriesKind::pretext_eval,
                                       std::nullopt, epoch, "accuracy", stats.accuracy,
                                       Direction::higher_is_better});
    };
    auto maybe_snapshot = [&](std::int64_t epoch) {
        for (auto s : spec.snapshot_steps)
            if (s == epoch) outcome.snapshots.emplace(epoch, model.encoder);
    };

    log_eval(0);
    maybe_snapshot(0);

    std::vector<int> order = train_idx;
    Activations enc_acts, head_acts;
    Grads g_enc, g_head;
    std::vector<double> d_out, d_repr;
    PretextExample ex;

    for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
        Rng epoch_rng(derive_seed(seed, 0x3718, static_cast<std::uint64_t>(fold),
                                  static_cast<std::uint64_t>(epoch)));
        epoch_rng.shuffle(order);
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t batch_start = pos;
            const std::size_t batch_end =
                std::min(order.size(), pos + static_cast<std::size_t>(spec.batch_size));
            g_enc.reset(model.encoder);
            g_head.reset(model.head);
            double batch_loss = 0.0;
            for (; pos < batch_end; ++pos) {
                build_train_example(spec, ds, order[pos], epoch_rng, ex);
                const auto& repr = forward(model.encoder, ex.input.data(), enc_acts);
                const auto& out = forward(model.head, repr.data(), head_acts);
                batch_loss += spec.task == PretextTask::rotate4
                                  ? cross_entropy_loss(out, ex.label, d_out)
                                  : mse_loss(out, ex.target.data(), d_out);
                backward(model.head, head_acts, d_out, g_head, &d_repr);
                backward(model.encoder, enc_acts, d_repr, g_enc);
            }
            if (!std::isfinite(batch_loss))
                throw numeric_error("pretext training diverged at epoch " +
                                    std::to_string(epoch));
            const double inv_batch = 1.0 / static_cast<double>(batch_end - batch_start);
            opt_enc.step(model.encoder, g_enc, inv_batch);
            opt_head.step(model.head, g_head, inv_batch);
        }
        log_eval(epoch);
        maybe_snapshot(epoch);
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Target probes
// ---------------------------------------------------------------------------

inline TinyNet make_probe(const TargetSpec& spec, int repr_dim, int classes, Rng& rng) {
    switch (spec.head) {
    case HeadKind::linear: return make_net({repr_dim, classes}, {0}, rng);
    case HeadKind::mlp2: return make_net({repr_dim, spec.hidden, classes}, {1, 0}, rng);
    case HeadKind::mlp3:
        return make_net({repr_dim, spec.hidden, spec.hidden, classes}, {1, 1, 0}, rng);
    }
    throw error("unreachable");
}

/// Frozen-encoder representations for a set of samples.
inline std::vector<std::vector<double>> encode_all(const TinyNet& encoder,
                                                   const SyntheticDataset& ds,
                                                   const std::vector<int>& idx) {
    std::vector<std::vector<double>> out;
    out.reserve(idx.size());
    Activations acts;
    for (int i : idx) {
        forward(encoder, ds.image(i), acts);
        out.push_back(acts.a.back());
    }
    return out;
}

/// Fully retrains a probe on the frozen encoder's representations and logs
/// its evaluation curve (loss and accuracy per probe epoch) with the
/// snapshot step attached. Early-stops on the eval loss to save time; the
/// best-of-run reduction downstream is what the analysis consumes.
inline std::vector<LogRecord>
train_target_on_snapshot(const TinyNet& encoder, const TargetSpec& spec,
                         const SyntheticDataset& ds, const std::vector<int>& train_idx,
                         const std::vector<int>& eval_idx, std::uint64_t seed,
                         const std::string& run_id, std::int64_t fold,
                         std::int64_t snapshot_step) {
    spec.validate();
    const int classes = factor_classes(spec.task);
    const auto train_repr = encode_all(encoder, ds, train_idx);
    const auto eval_repr = encode_all(encoder, ds, eval_idx);
    const int repr_dim = static_cast<int>(train_repr.front().size());

    Rng init_rng(derive_seed(seed, 0x9B0E, static_cast<std::uint64_t>(fold),
                             static_cast<std::uint64_t>(snapshot_step)));
    TinyNet probe = make_probe(spec, repr_dim, classes, init_rng);
    Adam opt;
    opt.lr = spec.lr;
    opt.reset(probe);

    std::vector<LogRecord> records;
    std::vector<std::size_t> order(train_repr.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Activations acts;
    Grads grads;
    std::vector<double> d_out;

    double best_eval = std::numeric_limits<double>::infinity();
    std::int64_t wait = 0;

    for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
        Rng epoch_rng(derive_seed(seed, 0x7A26, static_cast<std::uint64_t>(fold),
                                  (static_cast<std::uint64_t>(snapshot_step) << 20) ^
                                      static_cast<std::uint64_t>(epoch)));
        epoch_rng.shuffle(order);
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t batch_start = pos;
            const std::size_t batch_end =
                std::min(order.size(), pos + static_cast<std::size_t>(spec.batch_size));
            grads.reset(probe);
            double batch_loss = 0.0;
            for (; pos < batch_end; ++pos) {
                const std::size_t i = order[pos];
                const auto& out = forward(probe, train_repr[i].data(), acts);
                batch_loss += cross_entropy_loss(
                    out, ds.label(spec.task, train_idx[i]), d_out);
                backward(probe, acts, d_out, grads);
            }
            if (!std::isfinite(batch_loss))
                throw numeric_error("probe training diverged at epoch " +
                                    std::to_string(epoch));
            opt.step(probe, grads, 1.0 / static_cast<double>(batch_end - batch_start));
        }

        double loss_sum = 0.0;
        std::int64_t correct = 0;
        for (std::size_t i = 0; i < eval_repr.size(); ++i) {
            const auto& out = forward(probe, eval_repr[i].data(), acts);
            loss_sum += cross_entropy_loss(out, ds.label(spec.task, eval_idx[i]), d_out);
            int argmax = 0;
            for (std::size_t c = 1; c < out.size(); ++c)
                if (out[c] > out[static_cast<std::size_t>(argmax)])
                    argmax = static_cast<int>(c);
            if (argmax == ds.label(spec.task, eval_idx[i])) ++correct;
        }
        const double eval_loss = loss_sum / static_cast<double>(eval_repr.size());
        if (!std::isfinite(eval_loss))
            throw numeric_error("probe eval diverged at epoch " + std::to_string(epoch));
        const double accuracy =
            100.0 * static_cast<double>(correct) / static_cast<double>(eval_repr.size());
        records.push_back({run_id, fold, SeriesKind::target_eval, snapshot_step, epoch,
                           target_loss_metric, eval_loss, Direction::lower_is_better});
        records.push_back({run_id, fold, SeriesKind::target_eval, snapshot_step, epoch,
                           "accuracy", accuracy, Direction::higher_is_better});

        if (eval_loss < best_eval - spec.min_delta) {
            best_eval = eval_loss;
            wait = 0;
        } else if (++wait >= spec.patience) {
            break;
        }
    }
    return records;
}

} // namespace ofm::lab
