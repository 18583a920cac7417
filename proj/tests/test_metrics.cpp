#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ofm/metrics.hpp"
#include "oracle.hpp"

using ofm::MismatchValue;
using testutil::paired;
using testutil::series;

namespace {

bool matches(const MismatchValue& got, double want, double tol = 0.0) {
    if (std::isinf(want)) return got.infinite;
    return !got.infinite && std::abs(got.value - want) <= tol;
}

} // namespace

TEST_CASE("m3_curve: direct subtraction") {
    const auto run = paired({10.0}, {30.0});
    CHECK(ofm::m3_curve(run) == std::vector<double>{20.0});
}

TEST_CASE("m3_curve: equal curves give an all-zero mismatch") {
    const auto run = paired({3.0, 2.0, 1.0}, {3.0, 2.0, 1.0});
    CHECK(ofm::m3_curve(run) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("m3_curve: elementwise example") {
    const auto run = paired({4.0, 2.0, 1.0}, {5.0, 4.0, 3.0});
    CHECK(ofm::m3_curve(run) == std::vector<double>{1.0, 2.0, 2.0});
}

TEST_CASE("m3_curve refuses incomparable units unless overridden") {
    const auto run = paired({1.0, 2.0}, {3.0, 4.0}, "mse", "cross_entropy");
    CHECK_THROWS_AS(ofm::m3_curve(run), ofm::validation_error);
    CHECK(ofm::m3_curve(run, true) == std::vector<double>{2.0, 2.0});
}

TEST_CASE("mm3: mean of the m3 curve") {
    const auto run = paired({4.0, 2.0, 1.0}, {5.0, 4.0, 3.0});
    CHECK(ofm::mm3(run) == Catch::Approx(5.0 / 3.0).margin(1e-15));
    CHECK(ofm::mm3(paired({1.0, 1.0}, {1.0, 1.0})) == 0.0);
}

TEST_CASE("mm3: positive and negative steps cancel") {
    const auto run = paired({1.0, 5.0}, {3.0, 3.0}); // m3 = (+2, -2)
    CHECK(ofm::mm3(run) == 0.0);
}

TEST_CASE("sm3_curve uses the running minimum, never future values") {
    CHECK(ofm::sm3_curve(series({5.0, 3.0, 4.0})) == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(ofm::sm3_curve(series({5.0, 4.0, 3.0})) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(ofm::sm3_curve(series({2.0, 2.0, 2.0})) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("msm3 examples") {
    CHECK(ofm::msm3(series({5.0, 3.0, 4.0})) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(ofm::msm3(series({5.0, 4.0, 3.0})) == 0.0);
    CHECK(ofm::msm3(series({5.0, 3.0, 6.0, 4.0})) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("csm3 and msm3_max examples") {
    CHECK(ofm::csm3(series({5.0, 3.0, 4.0})) == 1.0);
    CHECK(ofm::msm3_max(series({5.0, 3.0, 4.0})) == 1.0);
    CHECK(ofm::csm3(series({5.0, 3.0, 6.0, 4.0})) == 1.0);
    CHECK(ofm::msm3_max(series({5.0, 3.0, 6.0, 4.0})) == 3.0);
    CHECK(ofm::csm3(series({5.0, 4.0, 3.0})) == 0.0);
    CHECK(ofm::msm3_max(series({5.0, 4.0, 3.0})) == 0.0);
}

TEST_CASE("normalize: worked example") {
    const auto res = ofm::normalize(series({10.0, 6.0, 2.0, 4.0}));
    CHECK_FALSE(res.context.infinite);
    CHECK(res.context.baseline == 10.0);
    CHECK(res.context.best == 2.0);
    CHECK(res.context.best_index == 2);
    CHECK(res.context.scale == 12.5);
    CHECK(res.values == std::vector<double>{125.0, 75.0, 25.0, 50.0});
}

TEST_CASE("normalize: flat curve maps to all-zero, finite") {
    const auto res = ofm::normalize(series({2.0, 2.0, 2.0}));
    CHECK_FALSE(res.context.infinite);
    CHECK(res.values == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("normalize: flat start that later regresses is infinite") {
    const auto res = ofm::normalize(series({2.0, 2.0, 3.0}));
    CHECK(res.context.infinite);
    CHECK(res.values.empty());
}

TEST_CASE("normalize requires the untrained baseline at step 0") {
    const auto s = series({5.0, 3.0}, {4, 8});
    CHECK_THROWS_WITH(ofm::normalize(s), Catch::Matchers::ContainsSubstring("baseline"));
    CHECK_NOTHROW(ofm::normalize(s, true));
}

TEST_CASE("ofm_curve examples") {
    std::vector<MismatchValue> want{MismatchValue::finite(0), MismatchValue::finite(0),
                                    MismatchValue::finite(0), MismatchValue::finite(25)};
    CHECK(ofm::ofm_curve(series({10.0, 6.0, 2.0, 4.0})) == want);

    const auto zero = ofm::ofm_curve(series({9.0, 7.0, 7.0, 1.0}));
    for (const auto& v : zero) CHECK(matches(v, 0.0));

    const auto above100 = ofm::ofm_curve(series({10.0, 2.0, 12.0}));
    CHECK(matches(above100[2], 125.0, 1e-12));

    const auto infinite = ofm::ofm_curve(series({2.0, 2.0, 3.0}));
    CHECK(matches(infinite[0], 0.0));
    CHECK(matches(infinite[1], 0.0));
    CHECK(infinite[2].infinite);
}

TEST_CASE("ofm_curve: infinite mismatch persists once the model forgets") {
    const auto curve = ofm::ofm_curve(series({2.0, 2.0, 3.0, 2.0}));
    CHECK(matches(curve[1], 0.0));
    CHECK(curve[2].infinite);
    CHECK(curve[3].infinite);
}

TEST_CASE("mofm, cofm, mofm_max: worked example and degenerate cases") {
    const auto t = series({10.0, 6.0, 2.0, 4.0});
    CHECK(matches(ofm::mofm(t), 6.25, 1e-12));
    CHECK(matches(ofm::cofm(t), 25.0, 1e-12));
    CHECK(matches(ofm::mofm_max(t), 25.0, 1e-12));

    CHECK(ofm::mofm(series({2.0, 2.0, 3.0})).infinite);
    CHECK(ofm::cofm(series({2.0, 2.0, 3.0})).infinite);
    CHECK(ofm::mofm_max(series({2.0, 2.0, 3.0})).infinite);

    const auto single = series({7.0}, {0});
    CHECK(matches(ofm::mofm(single), 0.0));
    CHECK(matches(ofm::cofm(single), 0.0));
    CHECK(matches(ofm::mofm_max(single), 0.0));
}

TEST_CASE("single-point run: MM3 is the single difference, soft metrics zero") {
    const auto run = paired({4.0}, {9.0});
    CHECK(ofm::mm3(run) == 5.0);
    CHECK(ofm::msm3(run.target) == 0.0);
    CHECK(ofm::csm3(run.target) == 0.0);
    CHECK(ofm::msm3_max(run.target) == 0.0);
}

TEST_CASE("every metric matches the literal formula transcription") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<std::size_t> len(2, 50);
    constexpr double tol = 1e-9;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = len(rng);
        const auto target_values = testutil::random_curve(rng, n);
        const auto pretext_values = testutil::random_curve(rng, n);
        const auto t = series(target_values);
        const auto run = paired(pretext_values, target_values);

        const auto m3_ref = oracle::m3(target_values, pretext_values);
        const auto m3_got = ofm::m3_curve(run);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(std::abs(m3_got[i] - m3_ref[i]) <= tol);
        REQUIRE(std::abs(ofm::mm3(run) - oracle::mm3(target_values, pretext_values)) <= tol);

        const auto sm3_ref = oracle::sm3(target_values);
        const auto sm3_got = ofm::sm3_curve(t);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(std::abs(sm3_got[i] - sm3_ref[i]) <= tol);
        REQUIRE(std::abs(ofm::msm3(t) - oracle::msm3(target_values)) <= tol);
        REQUIRE(std::abs(ofm::csm3(t) - oracle::csm3(target_values)) <= tol);
        REQUIRE(std::abs(ofm::msm3_max(t) - oracle::msm3_max(target_values)) <= tol);

        const auto norm_ref = oracle::normalize(target_values);
        const auto norm_got = ofm::normalize(t);
        REQUIRE(norm_got.context.infinite == norm_ref.infinite);
        if (!norm_ref.infinite) {
            REQUIRE(norm_got.context.best_index == norm_ref.best_index);
            for (std::size_t i = 0; i < n; ++i)
                REQUIRE(std::abs(norm_got.values[i] - norm_ref.values[i]) <= tol);
        }

        const auto ofm_ref = oracle::ofm(target_values);
        const auto ofm_got = ofm::ofm_curve(t);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(ofm_got[i].infinite == std::isinf(ofm_ref[i]));
            if (!ofm_got[i].infinite)
                REQUIRE(std::abs(ofm_got[i].value - ofm_ref[i]) <= tol);
        }
        REQUIRE(matches(ofm::mofm(t), oracle::mofm(target_values), tol));
        REQUIRE(matches(ofm::cofm(t), oracle::cofm(target_values), tol));
        REQUIRE(matches(ofm::mofm_max(t), oracle::mofm_max(target_values), tol));
    }
}

TEST_CASE("quantified soft-metric invariants") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<std::size_t> len(2, 50);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto values = testutil::random_curve(rng, len(rng));
        const auto t = series(values);
        for (double v : ofm::sm3_curve(t)) REQUIRE(v >= 0.0);
        REQUIRE(ofm::msm3(t) <= ofm::msm3_max(t) + 1e-12);
        REQUIRE(ofm::csm3(t) <= ofm::msm3_max(t) + 1e-12);
        for (const auto& v : ofm::ofm_curve(t))
            if (!v.infinite) REQUIRE(v.value >= 0.0);
        const auto mo = ofm::mofm(t);
        const auto co = ofm::cofm(t);
        const auto mx = ofm::mofm_max(t);
        if (!mx.infinite) {
            REQUIRE_FALSE(mo.infinite);
            REQUIRE_FALSE(co.infinite);
            REQUIRE(mo.value <= mx.value + 1e-9);
            REQUIRE(co.value <= mx.value + 1e-9);
        }
        // definitional identity: mm3 equals the mean of m3_curve
        const auto run = paired(testutil::random_curve(rng, values.size()), values);
        const auto curve = ofm::m3_curve(run);
        double mean = 0.0;
        for (double v : curve) mean += v;
        mean /= static_cast<double>(curve.size());
        REQUIRE(ofm::mm3(run) == Catch::Approx(mean).margin(1e-12));
    }
}

TEST_CASE("OFM is invariant under positive affine transforms of the target") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<std::size_t> len(2, 40);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto values = testutil::random_curve(rng, len(rng));
        const double a = scale(rng);
        const double c = shift(rng);
        std::vector<double> transformed(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) transformed[i] = a * values[i] + c;
        const auto base = ofm::ofm_curve(series(values));
        const auto moved = ofm::ofm_curve(series(transformed));
        for (std::size_t i = 0; i < base.size(); ++i) {
            REQUIRE(base[i].infinite == moved[i].infinite);
            if (!base[i].infinite) {
                const double ref = std::max(1.0, std::abs(base[i].value));
                REQUIRE(std::abs(base[i].value - moved[i].value) <= 1e-9 * ref);
            }
        }
    }
}

TEST_CASE("OFM commutes with the constant-scale route") {
    // 100 * SM3(M) / (baseline - best) must equal SM3 of the normalized tuple.
    std::mt19937 rng(32);
    std::uniform_int_distribution<std::size_t> len(2, 40);
    for (int trial = 0; trial < 300; ++trial) {
        const auto values = testutil::random_curve(rng, len(rng));
        const auto t = series(values);
        const auto norm = ofm::normalize(t);
        if (norm.context.infinite || !norm.context.has_scale) continue;
        if (norm.context.scale > 2000.0) continue; // degenerate interval, ulp-dominated
        const auto direct = ofm::sm3_curve(t);
        const auto via_norm = ofm::ofm_curve(t);
        for (std::size_t i = 0; i < direct.size(); ++i) {
            const double route_b = direct[i] * norm.context.scale;
            REQUIRE_FALSE(via_norm[i].infinite);
            REQUIRE(std::abs(via_norm[i].value - route_b) <=
                    1e-12 * std::max(100.0, std::abs(route_b)));
        }
    }
}

TEST_CASE("SM3 is causal; OFM is not (witness)") {
    std::mt19937 rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const auto values = testutil::random_curve(rng, 30);
        const auto full = ofm::sm3_curve(series(values));
        std::uniform_int_distribution<std::size_t> cut(1, 29);
        const std::size_t c = cut(rng);
        const std::vector<double> prefix_values(values.begin(),
                                                values.begin() + static_cast<long>(c));
        const auto prefix = ofm::sm3_curve(series(prefix_values));
        for (std::size_t i = 0; i < c; ++i) REQUIRE(prefix[i] == full[i]);
    }
    // witness: truncation changes an earlier OFM value because the scale
    // uses the global minimum
    const auto full = ofm::ofm_curve(series({10.0, 8.0, 9.0, 2.0}));
    const auto prefix = ofm::ofm_curve(series({10.0, 8.0, 9.0}));
    REQUIRE(full[2].value == Catch::Approx(12.5).margin(1e-12));
    REQUIRE(prefix[2].value == Catch::Approx(50.0).margin(1e-12));
    REQUIRE(full[2].value != prefix[2].value);
}
