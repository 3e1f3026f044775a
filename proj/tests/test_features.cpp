#include "emorec/error.hpp"
#include "emorec/features.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace emorec;

namespace {

std::size_t stat_index(std::string_view name) {
    const auto it = std::find(kStatisticalFeatureNames.begin(), kStatisticalFeatureNames.end(), name);
    REQUIRE(it != kStatisticalFeatureNames.end());
    return static_cast<std::size_t>(it - kStatisticalFeatureNames.begin());
}

WindowGroup make_group(std::initializer_list<ChannelKind> channels, std::mt19937_64& rng, std::size_t n = 50) {
    WindowGroup g;
    g.participant_id = "P05";
    g.scenario = Scenario::S_EA;
    g.window_index = 12;
    g.emotion = EmotionLabel::HPHA;
    g.activity = ActivityLabel::STANDING;
    for (ChannelKind c : channels) {
        Window w;
        w.channel = c;
        w.samples = oracle::random_signal(rng, n);
        g.windows.emplace(c, std::move(w));
    }
    return g;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("linear fit examples") {
    auto f = linear_fit(std::vector<double>{1, 2, 3});
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.intercept) <= 1e-12);
    f = linear_fit(std::vector<double>{5, 5, 5});
    CHECK(f.slope == 0.0);
    CHECK(f.intercept == doctest::Approx(5.0).epsilon(1e-12));
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("linear fit matches the two-pass oracle") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = oracle::random_signal(rng, 200, -1e3, 1e3);
        const auto f = linear_fit(x);
        const auto o = oracle::regression(x);
        CHECK(std::abs(f.slope - o.slope) <= 1e-10);
        CHECK(std::abs(f.intercept - o.intercept) <= 1e-10 * std::max(1.0, std::abs(o.intercept)));
    }
}

TEST_CASE("regression features examples") {
    auto r = regression_features(std::vector<double>{2, 4, 6, 8});
    CHECK(std::abs(r.f_slope - std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(r.f_slope - 1.414214) <= 1e-6);
    r = regression_features(std::vector<double>{5, 5, 5});
    CHECK(std::abs(r.f_intercept - 2.236068) <= 1e-6);
    CHECK(std::abs(r.f_intercept_cubed - 11.180340) <= 1e-6);
    r = regression_features(std::vector<double>{1, 2, 3});
    CHECK(std::abs(r.f_slope - 1.0) <= 1e-12);
    CHECK(std::abs(r.f_intercept) <= 1e-6);
    CHECK(std::abs(r.f_intercept_cubed) <= 1e-12);
}

TEST_CASE("mean absolute first difference") {
    CHECK(mean_abs_first_diff(std::vector<double>{5, 5, 5}) == 0.0);
    CHECK(mean_abs_first_diff(std::vector<double>{0, 1, 0, 1}) == 1.0);
    CHECK(mean_abs_first_diff(std::vector<double>{1, 4, 2}) == 2.5);
    CHECK_THROWS_AS(mean_abs_first_diff(std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("regression feature invariances") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> offset(-50, 50), scale(0.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = oracle::random_signal(rng, 3 + trial % 60);
        const auto base = regression_features(x);

        const double c = offset(rng);
        auto shifted = x;
        for (auto& v : shifted) v += c;
        const auto s = regression_features(shifted);
        CHECK(std::abs(s.f_slope - base.f_slope) <= 1e-10);
        CHECK(std::abs(mean_abs_first_diff(shifted) - mean_abs_first_diff(x)) <= 1e-10);

        const double k = scale(rng);
        auto scaled = x;
        for (auto& v : scaled) v *= k;
        const auto sc = regression_features(scaled);
        CHECK(std::abs(sc.f_slope - std::sqrt(k) * base.f_slope) <= 1e-9);
        CHECK(std::abs(sc.f_intercept - std::sqrt(k) * base.f_intercept) <= 1e-9);

        auto reversed = x;
        std::reverse(reversed.begin(), reversed.end());
        CHECK(std::abs(linear_fit(reversed).slope + linear_fit(x).slope) <= 1e-10);
        CHECK(std::abs(regression_features(reversed).f_slope - base.f_slope) <= 1e-10);

        CHECK(base.f_slope >= 0.0);
        CHECK(base.f_intercept >= 0.0);
        CHECK(base.f_intercept_cubed >= 0.0);
    }
    // the intercept does move with an offset
    const std::vector<double> x{3, 1, 4, 1, 5};
    auto y = x;
    for (auto& v : y) v += 10.0;
    CHECK(std::abs(regression_features(y).f_intercept - regression_features(x).f_intercept) > 0.1);
}

TEST_CASE("statistical features examples") {
    const auto c = statistical_features(std::vector<double>(10, 4.25));
    CHECK(c[stat_index("mean")] == 4.25);
    for (auto name : {"std", "variance", "range", "abs_diff1_mean", "abs_diff1_mean_z", "abs_diff2_mean",
                      "abs_diff2_mean_z", "skewness", "kurtosis", "slope"})
        CHECK(c[stat_index(name)] == 0.0);

    const auto r = statistical_features(std::vector<double>{1, 2, 3, 4});
    CHECK(r[stat_index("mean")] == 2.5);
    CHECK(r[stat_index("min")] == 1.0);
    CHECK(r[stat_index("max")] == 4.0);
    CHECK(r[stat_index("range")] == 3.0);
    CHECK(r[stat_index("abs_diff1_mean")] == 1.0);
    CHECK_THROWS_AS(statistical_features(std::vector<double>{1, 2}), InvalidArgument);
}

TEST_CASE("statistical features match the definitional oracle") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = oracle::random_signal(rng, trial == 0 ? 500 : 3 + trial * 7);
        const auto got = statistical_features(x);
        const auto want = oracle::statistics(x);
        for (std::size_t i = 0; i < kStatisticalFeatureCount; ++i)
            CHECK_MESSAGE(std::abs(got[i] - want[i]) <= 1e-9, kStatisticalFeatureNames[i]);
    }
}

TEST_CASE("feature sets") {
    std::mt19937_64 rng(61);
    const auto full = make_group({ChannelKind::BVP, ChannelKind::ST, ChannelKind::EMG_H, ChannelKind::EMG_L}, rng);

    SUBCASE("selected gives 16 named values") {
        const auto v = extract(full, FeatureSetKind::Selected);
        CHECK(v.values.size() == 16);
        CHECK(v.names.size() == 16);
        CHECK(v.emotion == EmotionLabel::HPHA);
        CHECK(v.activity == ActivityLabel::STANDING);
        CHECK(v.participant_id == "P05");
        CHECK(v.window_index == 12);
        for (double x : v.values) CHECK(x >= 0.0);
        const auto& st = full.windows.at(ChannelKind::ST).samples;
        CHECK(v.value("ST.abs_diff1_mean") == mean_abs_first_diff(st));
        CHECK(v.value("ST.f_intercept_cubed") == regression_features(st).f_intercept_cubed);
        CHECK_THROWS_AS((void)v.value("ST.nope"), InvalidArgument);
    }
    SUBCASE("all on six channels gives 90 values") {
        const auto g = make_group({ChannelKind::EMG_H, ChannelKind::EMG_L, ChannelKind::EDA, ChannelKind::ST,
                                   ChannelKind::PZT, ChannelKind::BVP},
                                  rng);
        const auto v = extract(g, FeatureSetKind::All);
        CHECK(v.values.size() == 90);
        CHECK(v.names.front() == "EMG_H.mean");
        CHECK(v.names.back() == "BVP.slope");
        for (double x : v.values) CHECK(std::isfinite(x));
    }
    SUBCASE("selected without EMG_L names the channel") {
        const auto g = make_group({ChannelKind::BVP, ChannelKind::ST, ChannelKind::EMG_H}, rng);
        CHECK_THROWS_WITH_AS(extract(g, FeatureSetKind::Selected), doctest::Contains("EMG_L"), InvalidArgument);
    }
    SUBCASE("name sets agree for the same channels") {
        const auto g = make_group({ChannelKind::BVP, ChannelKind::ST, ChannelKind::EMG_H, ChannelKind::EMG_L}, rng);
        CHECK(extract(g, FeatureSetKind::All).names == extract(full, FeatureSetKind::All).names);
        const auto ch = feature_channels(FeatureSetKind::All, g);
        CHECK(feature_names(FeatureSetKind::All, ch) == extract(g, FeatureSetKind::All).names);
        std::vector<double> values;
        extract_values(g, FeatureSetKind::All, ch, values);
        CHECK(values == extract(g, FeatureSetKind::All).values);
    }
}

TEST_CASE("feature CSV export") {
    std::mt19937_64 rng(67);
    const auto g = make_group({ChannelKind::BVP, ChannelKind::ST, ChannelKind::EMG_H, ChannelKind::EMG_L}, rng);
    const std::vector<FeatureVector> rows{extract(g, FeatureSetKind::Selected), extract(g, FeatureSetKind::Selected)};
    std::ostringstream out;
    write_feature_csv(out, rows);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    CHECK(header.find("BVP.abs_diff1_mean") == 0);
    CHECK(header.size() >= 41);
    CHECK(header.substr(header.size() - 41) == "emotion,activity,participant,window_index");
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        CHECK(std::count(line.begin(), line.end(), ',') == 19);
        CHECK(line.find("HPHA,STANDING,P05,12") != std::string::npos);
    }
    CHECK(n == 2);
    CHECK(parse_feature_set(to_string(FeatureSetKind::All)) == FeatureSetKind::All);
    CHECK(parse_feature_set(to_string(FeatureSetKind::Selected)) == FeatureSetKind::Selected);
}

}  // TEST_SUITE
