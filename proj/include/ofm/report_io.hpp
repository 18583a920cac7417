#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofm/detail/format.hpp"
#include "ofm/metrics.hpp"
#include "ofm/version.hpp"

namespace ofm {

namespace detail {

// Minimal JSON emitter with fully controlled key order and float policy:
// finite numbers at 9 significant digits, infinities as the string "inf".
class JsonWriter {
public:
    std::string take() { return std::move(out_); }

    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(const std::string& k) {
        comma();
        out_ += quote(k);
        out_ += ':';
        pending_value_ = true;
    }

    void value(const std::string& s) { raw(quote(s)); }
    void value(const char* s) { raw(quote(s)); }
    void value(bool b) { raw(b ? "true" : "false"); }
    void value(std::int64_t v) { raw(std::to_string(v)); }
    void value(int v) { raw(std::to_string(v)); }
    void value(std::size_t v) { raw(std::to_string(v)); }
    void value(double v) { raw(format_sig9(v)); }
    void value(const MismatchValue& v) {
        if (v.infinite)
            raw("\"inf\"");
        else
            raw(format_sig9(v.value));
    }
    void null() { raw("null"); }

    /// Splices an already-serialized JSON value in place.
    void raw_value(const std::string& json) { raw(json); }

    static std::string quote(const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            switch (c) {
            case '"': q += "\\\""; break;
            case '\\': q += "\\\\"; break;
            case '\n': q += "\\n"; break;
            case '\t': q += "\\t"; break;
            case '\r': q += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    q += buf;
                } else {
                    q += c;
                }
            }
        }
        q += '"';
        return q;
    }

private:
    void open(char c) {
        comma();
        out_ += c;
        first_.push_back(true);
        pending_value_ = false;
    }
    void close(char c) {
        out_ += c;
        first_.pop_back();
        pending_value_ = false;
    }
    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!first_.empty()) {
            if (!first_.back()) out_ += ',';
            first_.back() = false;
        }
    }
    void raw(const std::string& s) {
        comma();
        out_ += s;
    }

    std::string out_;
    std::vector<bool> first_;
    bool pending_value_ = false;
};

inline void write_ranged(JsonWriter& w, const RangedValue& rv, bool with_folds) {
    w.begin_object();
    if (rv.skipped) {
        w.key("skipped");
        w.value(true);
        w.end_object();
        return;
    }
    w.key("center");
    w.value(rv.center);
    if (with_folds) {
        w.key("plus");
        if (rv.range_infinite)
            w.value("inf");
        else
            w.value(rv.plus);
        w.key("minus");
        if (rv.range_infinite)
            w.value("inf");
        else
            w.value(rv.minus);
        w.key("per_fold");
        w.begin_array();
        for (const auto& v : rv.per_fold) w.value(v);
        w.end_array();
    }
    w.end_object();
}

} // namespace detail

/// Deterministic report serialization: fixed key order, 9-significant-digit
/// floats, "inf" for infinite values. Same report and config in, same bytes
/// out. `config_object_json` must be a serialized JSON object (or empty).
inline std::string write_report(const MismatchReport& rep,
                                const std::string& config_object_json = {}) {
    detail::JsonWriter w;
    const bool folds = rep.k > 1;
    w.begin_object();
    w.key("schema_version");
    w.value(report_schema_version);
    w.key("tool_version");
    w.value(tool_version);
    w.key("run_id");
    w.value(rep.run_id);
    w.key("config");
    w.raw_value(config_object_json.empty() ? "{}" : config_object_json);

    w.key("k");
    w.value(rep.k);
    w.key("n");
    w.value(rep.n);

    w.key("convergence");
    w.begin_object();
    w.key("stop_step");
    w.value(rep.convergence.stop_step);
    w.key("best_step");
    w.value(rep.convergence.best_step);
    w.key("converged");
    w.value(rep.convergence.converged);
    w.key("per_fold");
    w.begin_array();
    for (const auto& f : rep.fold_convergence) {
        w.begin_object();
        w.key("stop_step");
        w.value(f.stop_step);
        w.key("best_step");
        w.value(f.best_step);
        w.key("converged");
        w.value(f.converged);
        w.end_object();
    }
    w.end_array();
    w.end_object();

    w.key("normalization");
    w.begin_object();
    w.key("baseline");
    w.value(rep.normalization.baseline);
    w.key("best");
    w.value(rep.normalization.best);
    w.key("best_index");
    w.value(rep.normalization.best_index);
    w.key("best_step");
    w.value(rep.steps.empty() ? std::int64_t{0}
                              : rep.steps[rep.normalization.best_index]);
    w.key("scale");
    if (rep.normalization.has_scale)
        w.value(rep.normalization.scale);
    else
        w.null();
    w.key("infinite");
    w.value(rep.normalization.infinite);
    w.end_object();

    w.key("steps");
    w.begin_array();
    for (auto s : rep.steps) w.value(s);
    w.end_array();

    w.key("curves");
    w.begin_object();
    w.key("pretext");
    w.begin_array();
    for (double v : rep.pretext_curve) w.value(v);
    w.end_array();
    w.key("target");
    w.begin_array();
    for (double v : rep.target_curve) w.value(v);
    w.end_array();
    w.key("target_measured");
    w.begin_array();
    for (auto m : rep.target_measured) w.value(static_cast<std::int64_t>(m));
    w.end_array();
    w.key("m3");
    if (rep.m3_available) {
        w.begin_array();
        for (double v : rep.m3) w.value(v);
        w.end_array();
    } else {
        w.null();
    }
    w.key("sm3");
    w.begin_array();
    for (double v : rep.sm3) w.value(v);
    w.end_array();
    w.key("ofm");
    w.begin_array();
    for (const auto& v : rep.ofm) w.value(v);
    w.end_array();
    w.end_object();

    w.key("m3_skipped_reason");
    if (rep.m3_available)
        w.null();
    else
        w.value(rep.m3_skipped_reason);

    w.key("scalars");
    w.begin_object();
    w.key("mm3");
    detail::write_ranged(w, rep.mm3, folds);
    w.key("msm3");
    detail::write_ranged(w, rep.msm3, folds);
    w.key("csm3");
    detail::write_ranged(w, rep.csm3, folds);
    w.key("msm3_max");
    detail::write_ranged(w, rep.msm3_max, folds);
    w.key("mofm");
    detail::write_ranged(w, rep.mofm, folds);
    w.key("cofm");
    detail::write_ranged(w, rep.cofm, folds);
    w.key("mofm_max");
    detail::write_ranged(w, rep.mofm_max, folds);
    w.end_object();

    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

namespace detail {

inline MismatchValue mismatch_value_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return MismatchValue::inf();
        throw parse_error("report: expected a number or \"inf\"");
    }
    return MismatchValue::finite(j.get<double>());
}

inline RangedValue ranged_from_json(const nlohmann::json& j) {
    RangedValue rv;
    if (j.contains("skipped") && j.at("skipped").get<bool>()) {
        rv.skipped = true;
        return rv;
    }
    rv.center = mismatch_value_from_json(j.at("center"));
    if (j.contains("plus")) {
        if (j.at("plus").is_string()) {
            rv.range_infinite = true;
        } else {
            rv.plus = j.at("plus").get<double>();
            rv.minus = j.at("minus").get<double>();
        }
        for (const auto& v : j.at("per_fold"))
            rv.per_fold.push_back(mismatch_value_from_json(v));
        for (const auto& v : rv.per_fold)
            rv.range_infinite = rv.range_infinite || v.infinite;
    }
    rv.range_infinite = rv.range_infinite || rv.center.infinite;
    return rv;
}

} // namespace detail

/// Parses a report document back into the in-memory model (round-trip of
/// write_report up to the 9-significant-digit float policy).
inline MismatchReport parse_report(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("report: ") + e.what());
    }
    if (!j.contains("schema_version") ||
        j.at("schema_version").get<int>() != report_schema_version)
        throw parse_error("report: missing or unsupported schema_version");

    MismatchReport rep;
    rep.run_id = j.at("run_id").get<std::string>();
    rep.k = j.at("k").get<std::size_t>();
    rep.n = j.at("n").get<std::size_t>();
    const auto& conv = j.at("convergence");
    rep.convergence.stop_step = conv.at("stop_step").get<std::int64_t>();
    rep.convergence.best_step = conv.at("best_step").get<std::int64_t>();
    rep.convergence.converged = conv.at("converged").get<bool>();
    for (const auto& f : conv.at("per_fold"))
        rep.fold_convergence.push_back({f.at("stop_step").get<std::int64_t>(),
                                        f.at("best_step").get<std::int64_t>(),
                                        f.at("converged").get<bool>()});
    const auto& norm = j.at("normalization");
    rep.normalization.baseline = norm.at("baseline").get<double>();
    rep.normalization.best = norm.at("best").get<double>();
    rep.normalization.best_index = norm.at("best_index").get<std::size_t>();
    rep.normalization.infinite = norm.at("infinite").get<bool>();
    if (!norm.at("scale").is_null()) {
        rep.normalization.scale = norm.at("scale").get<double>();
        rep.normalization.has_scale = true;
    }
    rep.steps = j.at("steps").get<std::vector<std::int64_t>>();
    const auto& curves = j.at("curves");
    rep.pretext_curve = curves.at("pretext").get<std::vector<double>>();
    rep.target_curve = curves.at("target").get<std::vector<double>>();
    for (const auto& m : curves.at("target_measured"))
        rep.target_measured.push_back(static_cast<std::uint8_t>(m.get<int>()));
    rep.m3_available = !curves.at("m3").is_null();
    if (rep.m3_available)
        rep.m3 = curves.at("m3").get<std::vector<double>>();
    else
        rep.m3_skipped_reason = j.at("m3_skipped_reason").get<std::string>();
    rep.sm3 = curves.at("sm3").get<std::vector<double>>();
    for (const auto& v : curves.at("ofm"))
        rep.ofm.push_back(detail::mismatch_value_from_json(v));
    const auto& sc = j.at("scalars");
    rep.mm3 = detail::ranged_from_json(sc.at("mm3"));
    rep.msm3 = detail::ranged_from_json(sc.at("msm3"));
    rep.csm3 = detail::ranged_from_json(sc.at("csm3"));
    rep.msm3_max = detail::ranged_from_json(sc.at("msm3_max"));
    rep.mofm = detail::ranged_from_json(sc.at("mofm"));
    rep.cofm = detail::ranged_from_json(sc.at("cofm"));
    rep.mofm_max = detail::ranged_from_json(sc.at("mofm_max"));
    return rep;
}

inline void save_text(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw error("write failed for " + path);
}

inline std::string load_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot read " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return bytes;
}

} // namespace ofm
