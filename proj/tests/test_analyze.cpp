#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "ofm/analyze.hpp"

// Pipeline-level tests over in-memory log records: reduction, alignment,
// convergence truncation and fold handling, without touching the filesystem.

namespace {

ofm::LogRecord pretext(const std::string& run, std::int64_t fold, std::int64_t epoch,
                       double value) {
    return {run, fold, ofm::SeriesKind::pretext_eval, std::nullopt, epoch,
            "loss", value, ofm::Direction::lower_is_better};
}

ofm::LogRecord target(const std::string& run, std::int64_t fold, std::int64_t snap,
                      std::int64_t epoch, double value) {
    return {run, fold, ofm::SeriesKind::target_eval, snap, epoch,
            "loss", value, ofm::Direction::lower_is_better};
}

} // namespace

TEST_CASE("analyze_records: folds truncate at the common stop step") {
    std::vector<ofm::LogRecord> records;
    // fold 0 pretext: improves through step 5, then flat; patience 2 stops at 7
    const double f0[] = {9, 8, 7, 6, 5, 4, 4, 4, 4};
    // fold 1 pretext: flat from step 2; patience 2 stops at 4
    const double f1[] = {9, 8, 7, 7, 7, 7, 7, 7, 7};
    for (int e = 0; e <= 8; ++e) {
        records.push_back(pretext("r", 0, e, f0[e]));
        records.push_back(pretext("r", 1, e, f1[e]));
        records.push_back(target("r", 0, e, 1, 10.0 - e));
        records.push_back(target("r", 1, e, 1, 12.0 - e));
    }
    ofm::AnalyzeConfig cfg;
    cfg.policy = {0.0, 2};
    const auto rep = ofm::analyze_records(records, cfg);
    CHECK(rep.k == 2);
    CHECK(rep.convergence.stop_step == 4); // min of the two fold stops
    CHECK(rep.n == 5);
    REQUIRE(rep.fold_convergence.size() == 2);
    CHECK(rep.fold_convergence[0].stop_step == 7);
    CHECK(rep.fold_convergence[1].stop_step == 4);
    CHECK(rep.convergence.converged);
}

TEST_CASE("analyze_records: snapshot gaps are interpolated and flagged") {
    std::vector<ofm::LogRecord> records;
    for (int e = 0; e <= 4; ++e) records.push_back(pretext("r", 0, e, 5.0 - e));
    // target measured only at snapshots 0, 2, 4
    records.push_back(target("r", 0, 0, 1, 10.0));
    records.push_back(target("r", 0, 2, 1, 2.0));
    records.push_back(target("r", 0, 4, 1, 4.0));
    ofm::AnalyzeConfig cfg;
    const auto rep = ofm::analyze_records(records, cfg);
    CHECK(rep.n == 5);
    CHECK(rep.target_curve == std::vector<double>{10.0, 6.0, 2.0, 3.0, 4.0});
    CHECK(rep.target_measured == std::vector<std::uint8_t>{1, 0, 1, 0, 1});
    // the interpolated grid is what the metrics see:
    // normalized (125,75,25,37.5,50) -> sm3 (0,0,0,12.5,25) -> mean 7.5
    CHECK(rep.mofm.center.value == 7.5);
}

TEST_CASE("analyze_records: run id selection") {
    std::vector<ofm::LogRecord> records;
    for (int e = 0; e <= 1; ++e) {
        records.push_back(pretext("a", 0, e, 2.0 - e));
        records.push_back(pretext("b", 0, e, 2.0 - e));
        records.push_back(target("a", 0, e, 1, 3.0 - e));
        records.push_back(target("b", 0, e, 1, 4.0 - e));
    }
    ofm::AnalyzeConfig cfg;
    CHECK_THROWS_AS(ofm::analyze_records(records, cfg), ofm::validation_error);
    cfg.run_id = "b";
    CHECK(ofm::analyze_records(records, cfg).target_curve ==
          std::vector<double>{4.0, 3.0});
    cfg.run_id = "c";
    CHECK_THROWS_AS(ofm::analyze_records(records, cfg), ofm::validation_error);
}

TEST_CASE("analyze_records: fold mismatch between pretext and target is rejected") {
    std::vector<ofm::LogRecord> records;
    records.push_back(pretext("r", 0, 0, 1.0));
    records.push_back(pretext("r", 1, 0, 1.0));
    records.push_back(target("r", 0, 0, 1, 2.0));
    ofm::AnalyzeConfig cfg;
    CHECK_THROWS_AS(ofm::analyze_records(records, cfg), ofm::validation_error);
}

TEST_CASE("analyze_records: single-fold reports carry no ranges") {
    std::vector<ofm::LogRecord> records;
    for (int e = 0; e <= 3; ++e) {
        records.push_back(pretext("r", 0, e, 4.0 - e));
        records.push_back(target("r", 0, e, 1, 10.0 - 2 * e));
    }
    ofm::AnalyzeConfig cfg;
    const auto rep = ofm::analyze_records(records, cfg);
    CHECK(rep.k == 1);
    CHECK(rep.mofm.per_fold.empty());
    REQUIRE(rep.fold_convergence.size() == 1);
}
