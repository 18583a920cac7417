#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "ofm/aggregation.hpp"
#include "ofm/log_io.hpp"
#include "ofm/report_io.hpp"

using ofm::LogRecord;
using ofm::SeriesKind;

namespace {

std::string line(const std::string& run, int fold, const std::string& series, int snap,
                 int epoch, const std::string& metric, const std::string& value,
                 const std::string& direction = "lower") {
    std::string s = "{\"run_id\":\"" + run + "\",\"fold\":" + std::to_string(fold) +
                    ",\"series\":\"" + series + "\"";
    if (snap >= 0) s += ",\"snapshot_step\":" + std::to_string(snap);
    s += ",\"epoch\":" + std::to_string(epoch) + ",\"metric\":\"" + metric +
         "\",\"value\":" + value + ",\"direction\":\"" + direction + "\"}";
    return s;
}

} // namespace

TEST_CASE("parse_log: valid three-line file") {
    const std::string text = line("r", 0, "pretext_eval", -1, 0, "loss", "0.5") + "\n" +
                             line("r", 0, "pretext_eval", -1, 1, "loss", "0.4") + "\n" +
                             line("r", 0, "target_eval", 0, 1, "loss", "1.5") + "\n";
    const auto records = ofm::parse_log(text);
    REQUIRE(records.size() == 3);
    CHECK(records[0].series == SeriesKind::pretext_eval);
    CHECK(records[2].snapshot_step == 0);
    CHECK(records[2].value == 1.5);
}

TEST_CASE("parse_log: duplicate key names both lines") {
    const std::string text = line("r", 0, "pretext_eval", -1, 1, "loss", "0.5") + "\n" +
                             line("r", 0, "pretext_eval", -1, 2, "loss", "0.4") + "\n" +
                             line("r", 0, "pretext_eval", -1, 1, "loss", "0.3") + "\n";
    CHECK_THROWS_WITH(ofm::parse_log(text),
                      Catch::Matchers::ContainsSubstring("line 3") &&
                          Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("parse_log: rejects bad records with line context") {
    CHECK_THROWS_WITH(ofm::parse_log(line("r", 0, "pretext_eval", -1, 0, "loss", "NaN")),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_AS(ofm::parse_log(line("r", 0, "pretext_eval", -1, 0, "loss", "1e999")),
                    ofm::parse_error);
    CHECK_THROWS_AS(ofm::parse_log(line("r", 0, "nonsense", -1, 0, "loss", "1.0")),
                    ofm::parse_error);
    CHECK_THROWS_AS(ofm::parse_log(line("r", 0, "target_eval", -1, 0, "loss", "1.0")),
                    ofm::parse_error); // target without snapshot_step
    CHECK_THROWS_AS(ofm::parse_log(line("r", 0, "pretext_eval", 3, 0, "loss", "1.0")),
                    ofm::parse_error); // pretext with snapshot_step
    CHECK_THROWS_AS(ofm::parse_log("{\"run_id\":\"r\"}"), ofm::parse_error);
    CHECK_THROWS_AS(ofm::parse_log("not json"), ofm::parse_error);
}

TEST_CASE("log round-trip: write then parse preserves records") {
    std::vector<LogRecord> records{
        {"run", 0, SeriesKind::pretext_eval, std::nullopt, 0, "loss", 0.125,
         ofm::Direction::lower_is_better},
        {"run", 1, SeriesKind::target_eval, 4, 2, "accuracy", 81.25,
         ofm::Direction::higher_is_better},
    };
    const auto parsed = ofm::parse_log(ofm::write_log(records));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].value == 0.125);
    CHECK(parsed[1].snapshot_step == 4);
    CHECK(parsed[1].direction == ofm::Direction::higher_is_better);
}

TEST_CASE("reduce_target_runs: best value per snapshot") {
    const std::string text = line("r", 0, "target_eval", 10, 1, "loss", "0.9") + "\n" +
                             line("r", 0, "target_eval", 10, 2, "loss", "0.7") + "\n" +
                             line("r", 0, "target_eval", 10, 3, "loss", "0.8") + "\n" +
                             line("r", 0, "target_eval", 20, 1, "loss", "0.6") + "\n";
    const auto series = ofm::reduce_target_runs(ofm::parse_log(text), "loss");
    REQUIRE(series.size() == 1);
    const auto& s = series.at(0);
    CHECK(s.steps == std::vector<std::int64_t>{10, 20});
    CHECK(s.values == std::vector<double>{0.7, 0.6});
    CHECK(s.measured == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("reduce_target_runs: accuracy with complement base") {
    const std::string text =
        line("r", 0, "target_eval", 0, 1, "accuracy", "80", "higher") + "\n" +
        line("r", 0, "target_eval", 0, 2, "accuracy", "85", "higher") + "\n" +
        line("r", 0, "target_eval", 0, 3, "accuracy", "83", "higher") + "\n";
    const auto series = ofm::reduce_target_runs(ofm::parse_log(text), "accuracy", 100.0);
    CHECK(series.at(0).values == std::vector<double>{15.0});
    CHECK(series.at(0).transform == ofm::Transform::complemented);
}

TEST_CASE("reduce_target_runs is invariant to record order") {
    std::mt19937 rng(9);
    std::vector<std::string> lines;
    for (int snap : {0, 5, 9})
        for (int epoch = 1; epoch <= 6; ++epoch)
            lines.push_back(line("r", 0, "target_eval", snap, epoch, "loss",
                                 std::to_string(0.1 * ((snap * 7 + epoch * 3) % 11))));
    auto joined = [](const std::vector<std::string>& ls) {
        std::string out;
        for (const auto& l : ls) out += l + "\n";
        return out;
    };
    const auto a = ofm::reduce_target_runs(ofm::parse_log(joined(lines)), "loss");
    auto shuffled = lines;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = ofm::reduce_target_runs(ofm::parse_log(joined(shuffled)), "loss");
    CHECK(a.at(0).steps == b.at(0).steps);
    CHECK(a.at(0).values == b.at(0).values);
}

TEST_CASE("reduce_target_runs: target_train records are ignored") {
    const std::string text = line("r", 0, "target_eval", 0, 1, "loss", "0.9") + "\n" +
                             line("r", 0, "target_train", 0, 1, "loss", "0.1") + "\n";
    const auto series = ofm::reduce_target_runs(ofm::parse_log(text), "loss");
    CHECK(series.at(0).values == std::vector<double>{0.9});
}

TEST_CASE("report serialization is deterministic and round-trips") {
    const auto run = testutil::paired({4.0, 3.0, 2.0, 2.5}, {10.0, 6.0, 2.0, 4.0});
    auto rep = ofm::make_report(run);
    rep.run_id = "worked";
    rep.convergence = {3, 2, false};
    rep.fold_convergence = {{3, 2, false}};

    const std::string bytes1 = ofm::write_report(rep, "{\"patience\":3}");
    const std::string bytes2 = ofm::write_report(rep, "{\"patience\":3}");
    CHECK(bytes1 == bytes2);
    CHECK(bytes1.find("\"mofm\":{\"center\":6.25}") != std::string::npos);

    const auto parsed = ofm::parse_report(bytes1);
    CHECK(parsed.run_id == "worked");
    CHECK(parsed.n == 4);
    CHECK(parsed.mofm.center.value == 6.25);
    CHECK(parsed.normalization.scale == 12.5);
    // a second write of the parsed report reproduces the bytes
    CHECK(ofm::write_report(parsed, "{\"patience\":3}") == bytes1);
}

TEST_CASE("fold reports round-trip, including infinite folds and skipped m3") {
    ofm::FoldSet fs;
    fs.folds.push_back(testutil::paired({1.0, 1.0, 1.0}, {2.0, 2.0, 3.0}, "mse",
                                        "cross_entropy"));
    fs.folds.push_back(testutil::paired({1.0, 0.5, 0.2}, {5.0, 2.0, 3.0}, "mse",
                                        "cross_entropy"));
    auto rep = ofm::report_with_ranges(fs);
    rep.run_id = "folds";
    rep.fold_convergence = {{2, 0, false}, {2, 1, false}};
    const std::string bytes = ofm::write_report(rep, "{\"k\":2}");
    CHECK(bytes.find("\"mm3\":{\"skipped\":true}") != std::string::npos);
    // fold 2 target (5,2,3): normalized (166.67, 66.67, 100) -> mofm 100/9
    CHECK(bytes.find("\"per_fold\":[\"inf\",11.1111111]") != std::string::npos);
    const auto parsed = ofm::parse_report(bytes);
    CHECK(parsed.k == 2);
    CHECK(parsed.mm3.skipped);
    CHECK(parsed.mofm.range_infinite);
    REQUIRE(parsed.mofm.per_fold.size() == 2);
    CHECK(parsed.mofm.per_fold[0].infinite);
    CHECK(ofm::write_report(parsed, "{\"k\":2}") == bytes);
}

TEST_CASE("report serialization: the infinite marker is the string inf") {
    ofm::MetricSeries t = testutil::series({2.0, 2.0, 3.0});
    const auto run = testutil::paired({1.0, 1.0, 1.0}, {2.0, 2.0, 3.0});
    auto rep = ofm::make_report(run);
    rep.run_id = "infinite";
    const std::string bytes = ofm::write_report(rep);
    CHECK(bytes.find("\"mofm\":{\"center\":\"inf\"}") != std::string::npos);
    const auto parsed = ofm::parse_report(bytes);
    CHECK(parsed.mofm.center.infinite);
    CHECK(parsed.ofm.back().infinite);
    CHECK(ofm::write_report(parsed) == bytes);
}
