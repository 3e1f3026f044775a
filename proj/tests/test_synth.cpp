#include "emorec/error.hpp"
#include "emorec/features.hpp"
#include "emorec/protocol.hpp"
#include "emorec/synth.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace emorec;

namespace {

std::vector<double> samples_in(const TimeSeries& ts, double start_s, double end_s) {
    std::vector<double> out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts.time_at(i);
        if (t >= start_s && t < end_s) out.push_back(ts.samples[i]);
    }
    return out;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("config validation") {
    SynthConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK_NOTHROW(cfg.noiseless().validate());
    auto bad = cfg;
    bad.interference.motion[3] = bad.interference.motion[2];
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = cfg;
    bad.n_participants = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = cfg;
    bad.emotion_effect[1].st_drift = NAN;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = cfg;
    bad.fs_hz[ChannelKind::EMG_L] = 100.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    for (std::size_t r = 1; r < kActivityCount; ++r) {
        CHECK(cfg.interference.motion[r] > cfg.interference.motion[r - 1]);
        CHECK(cfg.interference.wander[r] > cfg.interference.wander[r - 1]);
    }
}

TEST_CASE("noiseless ST follows baseline plus a linear drift") {
    const auto cfg = SynthConfig{}.noiseless();
    const auto [rec, truth] = generate_recording(0, Scenario::S_E, cfg);
    const auto& st = rec.channels.at(ChannelKind::ST);
    REQUIRE(rec.emotion_annotations.size() == 5);
    // the participant's effect gain multiplies every configured effect, so
    // the slope-to-drift ratio is the same constant in every block
    std::vector<double> ratio;
    for (const auto& iv : rec.emotion_annotations) {
        const auto x = samples_in(st, iv.start_s, iv.end_s);
        REQUIRE(x.size() == static_cast<std::size_t>(cfg.trial_duration_s * st.fs_hz));
        const double slope_per_s = linear_fit(x).slope * st.fs_hz;
        const double drift = cfg.emotion_effect[static_cast<std::size_t>(iv.label)].st_drift;
        ratio.push_back(slope_per_s / drift);
        // exact line: residuals vanish
        const auto fit = linear_fit(x);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::abs(x[i] - (fit.intercept + fit.slope * static_cast<double>(i + 1))) <= 1e-9);
    }
    for (double r : ratio) {
        CHECK(std::abs(r - ratio[0]) <= 1e-9);
        CHECK(r >= 0.8);
        CHECK(r <= 1.2);
    }
}

TEST_CASE("generation is deterministic") {
    const SynthConfig cfg;
    const auto a = generate_recording(2, Scenario::S_EA, cfg);
    const auto b = generate_recording(2, Scenario::S_EA, cfg);
    CHECK(content_hash(a.first) == content_hash(b.first));
    CHECK(a.second.emotion == b.second.emotion);
    CHECK(content_hash(generate_corpus(emorec_test::small_synth(3))) ==
          content_hash(generate_corpus(emorec_test::small_synth(3))));
    CHECK(content_hash(generate_corpus(emorec_test::small_synth(3))) !=
          content_hash(generate_corpus(emorec_test::small_synth(4))));
}

TEST_CASE("S_EA trials cycle the five activities") {
    const SynthConfig cfg;
    const auto [rec, truth] = generate_recording(0, Scenario::S_EA, cfg);
    REQUIRE(rec.emotion_annotations.size() == kEmotionCount);
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        const auto& trial = rec.emotion_annotations[e];
        CHECK(trial.label == kAllEmotions[e]);
        CHECK(trial.end_s - trial.start_s == kActivityCount * cfg.activity_segment_s);
        std::vector<ActivityInterval> inside;
        for (const auto& a : rec.activity_annotations)
            if (a.start_s >= trial.start_s && a.end_s <= trial.end_s) inside.push_back(a);
        REQUIRE(inside.size() == kActivityCount);
        for (std::size_t k = 0; k < kActivityCount; ++k) {
            CHECK(inside[k].label == activity_cycle()[k]);
            CHECK(inside[k].end_s - inside[k].start_s == cfg.activity_segment_s);
        }
        if (e > 0) CHECK(trial.start_s - rec.emotion_annotations[e - 1].end_s == cfg.rest_s);
    }
    CHECK(slice_by_labels(rec).size() == kEmotionCount * kActivityCount);
}

TEST_CASE("ground truth agrees with the annotations") {
    const auto cfg = emorec_test::small_synth(21);
    for (auto scenario : {Scenario::S_E, Scenario::S_EA, Scenario::S_A}) {
        const auto [rec, truth] = generate_recording(1, scenario, cfg);
        for (const auto& [c, ts] : rec.channels) {
            const auto& emo = truth.emotion.at(c);
            const auto& act = truth.activity.at(c);
            REQUIRE(emo.size() == ts.size());
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const double t = ts.time_at(i);
                std::optional<EmotionLabel> e;
                for (const auto& iv : rec.emotion_annotations)
                    if (t >= iv.start_s && t < iv.end_s) e = iv.label;
                CHECK(e == emo[i]);
                for (const auto& iv : rec.activity_annotations)
                    if (t >= iv.start_s && t < iv.end_s) CHECK(iv.label == act[i]);
            }
        }
        if (scenario == Scenario::S_A) CHECK(rec.emotion_annotations.empty());
    }
}

TEST_CASE("corpus layout") {
    SynthConfig cfg = emorec_test::small_synth(6, 6);
    const auto corpus = generate_corpus(cfg);
    CHECK(corpus.recordings.size() == 12);
    CHECK(corpus.participants().size() == 6);
    CHECK(corpus.participants().front() == "P01");
    CHECK_NOTHROW(validate(corpus));
    // both recordings of a participant share baseline parameters
    const auto se = generate_recording(3, Scenario::S_E, cfg.noiseless()).first;
    const auto sea = generate_recording(3, Scenario::S_EA, cfg.noiseless()).first;
    CHECK(se.channels.at(ChannelKind::EDA).samples.front() == sea.channels.at(ChannelKind::EDA).samples.front());
    CHECK(se.channels.at(ChannelKind::ST).samples.front() == sea.channels.at(ChannelKind::ST).samples.front());
}

TEST_CASE("drift magnitudes order the ST slope feature") {
    const auto cfg = SynthConfig{}.noiseless();
    const auto [rec, truth] = generate_recording(4, Scenario::S_E, cfg);
    const auto& st = rec.channels.at(ChannelKind::ST);
    std::array<double, kEmotionCount> f_slope{};
    for (const auto& iv : rec.emotion_annotations)
        f_slope[static_cast<std::size_t>(iv.label)] = regression_features(samples_in(st, iv.start_s, iv.end_s)).f_slope;
    // |drift|: NEUTRAL < HPHA < HNHA
    CHECK(f_slope[0] < f_slope[1]);
    CHECK(f_slope[1] < f_slope[2]);
}

TEST_CASE("noiseless corpora are classified perfectly") {
    const auto corpus = generate_corpus(emorec_test::small_synth(31).noiseless());
    auto cfg = emorec_test::small_experiment();
    cfg.repeats = 1;
    const auto r = cross_context_eval(corpus, cfg);
    REQUIRE_FALSE(r.cells.empty());
    for (const auto& [key, c] : r.cells) CHECK(c.overall.accuracy == 1.0);
}

}  // TEST_SUITE
