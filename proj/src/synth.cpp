#include "emorec/synth.hpp"

#include "emorec/error.hpp"
#include "emorec/seeding.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace emorec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-channel sensitivities: white-noise sigma, motion-artifact RMS and
// baseline-wander amplitude per unit of the config values.
struct ChannelScale {
    double noise;
    double motion;
    double wander;
};

ChannelScale channel_scale(ChannelKind c) {
    switch (c) {
        case ChannelKind::EMG_RAW: return {2.0, 3.0, 2.0};
        case ChannelKind::ST: return {0.02, 0.02, 0.08};
        case ChannelKind::BVP: return {2.0, 15.0, 5.0};
        case ChannelKind::EDA: return {0.01, 0.05, 0.1};
        case ChannelKind::PZT: return {1.0, 8.0, 4.0};
        default: return {0.0, 0.0, 0.0};
    }
}

struct Participant {
    double st_base;
    double emg_base;
    double emg_carrier_rms;
    double bvp_amplitude;
    double heart_rate_hz;
    double hrv_freq_hz;
    double hrv_phase;
    double eda_base;
    double effect_gain;
    std::vector<double> carrier_freq;
    std::vector<double> carrier_phase;
};

/// Sum of equal-amplitude sinusoids with unit RMS.
struct MultiSine {
    std::vector<double> freq;
    std::vector<double> phase;

    double operator()(double t) const {
        double s = 0.0;
        for (std::size_t k = 0; k < freq.size(); ++k) s += std::sin(kTwoPi * freq[k] * t + phase[k]);
        return s * std::sqrt(2.0 / static_cast<double>(freq.size()));
    }
};

MultiSine random_multisine(std::mt19937_64& rng, std::size_t count, double lo, double hi) {
    std::uniform_real_distribution<double> f(lo, hi), ph(0.0, kTwoPi);
    MultiSine m;
    for (std::size_t k = 0; k < count; ++k) {
        m.freq.push_back(f(rng));
        m.phase.push_back(ph(rng));
    }
    return m;
}

Participant draw_participant(const SynthConfig& cfg, int index) {
    std::mt19937_64 rng(mix_seed({cfg.seed, 0x70617274ULL, static_cast<std::uint64_t>(index)}));
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    Participant p;
    p.st_base = u(31.0, 34.0);
    // Kept non-negative: the regression features use |intercept|, and a negative
    // offset near -tonic/2 would fold HPHA onto NEUTRAL.
    p.emg_base = u(0.0, 5.0);
    p.emg_carrier_rms = u(15.0, 25.0);
    p.bvp_amplitude = u(40.0, 60.0);
    p.heart_rate_hz = u(1.0, 1.3);
    p.eda_base = u(2.0, 8.0);
    p.effect_gain = u(0.8, 1.2);
    for (int k = 0; k < 8; ++k) {
        p.carrier_freq.push_back(u(50.0, 110.0));
        p.carrier_phase.push_back(u(0.0, kTwoPi));
    }
    p.hrv_freq_hz = u(0.08, 0.12);
    p.hrv_phase = u(0.0, kTwoPi);
    return p;
}

/// One stretch of constant labels in the generated timeline.
struct Block {
    double start_s;
    double end_s;
    std::optional<EmotionLabel> emotion;
    double emotion_start_s;  // start of the enclosing emotion block
    ActivityLabel activity;
};

std::vector<Block> timeline(Scenario scenario, const SynthConfig& cfg) {
    std::vector<Block> blocks;
    const double T = cfg.trial_duration_s;
    const double A = cfg.activity_segment_s;
    switch (scenario) {
        case Scenario::S_E: {
            using enum EmotionLabel;
            const std::array<EmotionLabel, 5> order{NEUTRAL, HPHA, NEUTRAL, HNHA, NEUTRAL};
            for (std::size_t i = 0; i < order.size(); ++i)
                blocks.push_back({i * T, (i + 1) * T, order[i], i * T, ActivityLabel::SITTING});
            break;
        }
        case Scenario::S_EA: {
            double trial_start = 0.0;
            for (std::size_t e = 0; e < kEmotionCount; ++e) {
                if (e > 0) {
                    blocks.push_back({trial_start, trial_start + cfg.rest_s, std::nullopt, trial_start,
                                      ActivityLabel::SITTING});
                    trial_start += cfg.rest_s;
                }
                for (std::size_t a = 0; a < kActivityCount; ++a) {
                    const double s = trial_start + static_cast<double>(a) * A;
                    blocks.push_back({s, s + A, kAllEmotions[e], trial_start, activity_cycle()[a]});
                }
                trial_start += static_cast<double>(kActivityCount) * A;
            }
            break;
        }
        case Scenario::S_A: {
            constexpr double rest = 180.0;
            blocks.push_back({0.0, rest, std::nullopt, 0.0, ActivityLabel::SITTING});
            for (std::size_t a = 0; a < kActivityCount; ++a) {
                const double s = rest + static_cast<double>(a) * A;
                blocks.push_back({s, s + A, std::nullopt, 0.0, activity_cycle()[a]});
            }
            break;
        }
    }
    return blocks;
}

/// Heartbeat count at time t. The rate swings +-5 % at a Mayer-wave frequency;
/// a fixed rate would lock the pulse phase to the window grid at some window
/// lengths and leave whole phase ranges unseen in training.
double heart_cycles(const Participant& p, double t) {
    constexpr double depth = 0.05;
    const double w = kTwoPi * p.hrv_freq_hz;
    return p.heart_rate_hz * (t + depth * (std::cos(p.hrv_phase) - std::cos(w * t + p.hrv_phase)) / w);
}

/// Emotion component of channel `c` at block-relative time tau.
double emotion_component(ChannelKind c, const EmotionEffect& e, double gain, const Participant& p, double t,
                         double tau) {
    switch (c) {
        case ChannelKind::ST: return gain * (e.st_offset + e.st_drift * tau);
        case ChannelKind::EMG_RAW: {
            MultiSine carrier{p.carrier_freq, p.carrier_phase};
            return gain * (e.emg_tonic + e.emg_drift * tau) +
                   p.emg_carrier_rms * (1.0 + gain * (e.emg_amplitude - 1.0)) * carrier(t);
        }
        case ChannelKind::BVP:
            return p.bvp_amplitude * (1.0 + gain * (e.bvp_amplitude - 1.0)) * std::sin(kTwoPi * heart_cycles(p, t));
        case ChannelKind::EDA: return gain * e.eda_offset;
        case ChannelKind::PZT: return 20.0 * std::sin(kTwoPi * e.resp_rate_hz * t);
        default: return 0.0;
    }
}

double baseline(ChannelKind c, const Participant& p) {
    switch (c) {
        case ChannelKind::ST: return p.st_base;
        case ChannelKind::EMG_RAW: return p.emg_base;
        case ChannelKind::EDA: return p.eda_base;
        case ChannelKind::PZT: return 50.0;
        default: return 0.0;
    }
}

}  // namespace

std::array<EmotionEffect, kEmotionCount> SynthConfig::default_emotion_effects() {
    //        st_off  st_drift  tonic  emg_drift  emg_amp  bvp_amp  eda   resp
    return {{
        {0.0, 0.0005, 0.0, 0.0, 1.0, 1.0, 0.0, 0.25},    // NEUTRAL
        {0.5, 0.002, 8.0, 0.02, 1.5, 1.25, 0.8, 0.30},   // HPHA
        {-0.5, -0.004, 16.0, 0.04, 2.0, 0.8, 1.6, 0.35}, // HNHA
    }};
}

InterferenceProfile SynthConfig::default_interference() {
    return {{0.0, 0.15, 0.3, 0.45, 0.6}, {0.0, 0.15, 0.3, 0.45, 0.6}};
}

SynthConfig SynthConfig::noiseless() const {
    SynthConfig c = *this;
    c.noise_sigma = 0.0;
    c.interference.motion.fill(0.0);
    c.interference.wander.fill(0.0);
    return c;
}

void SynthConfig::validate() const {
    if (n_participants < 1) throw InvalidArgument("n_participants must be >= 1");
    if (!(trial_duration_s > 0.0) || !(activity_segment_s > 0.0)) throw InvalidArgument("durations must be positive");
    if (!(rest_s >= 0.0) || !std::isfinite(rest_s)) throw InvalidArgument("rest_s must be >= 0");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvalidArgument("noise_sigma must be >= 0");
    for (const auto& [c, fs] : fs_hz) {
        if (!(fs > 0.0) || !std::isfinite(fs)) throw InvalidArgument("sampling rates must be positive");
        if (c == ChannelKind::EMG_H || c == ChannelKind::EMG_L)
            throw InvalidArgument("synthetic recordings carry raw EMG only");
    }
    for (const auto& e : emotion_effect) {
        for (double v : {e.st_offset, e.st_drift, e.emg_tonic, e.emg_drift, e.emg_amplitude, e.bvp_amplitude,
                         e.eda_offset, e.resp_rate_hz})
            if (!std::isfinite(v)) throw InvalidArgument("emotion effects must be finite");
    }
    for (const auto* profile : {&interference.motion, &interference.wander}) {
        bool all_zero = true;
        for (double v : *profile) {
            if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("interference amplitudes must be finite and >= 0");
            all_zero = all_zero && v == 0.0;
        }
        if (all_zero) continue;
        for (std::size_t r = 1; r < profile->size(); ++r)
            if (!((*profile)[r] > (*profile)[r - 1]))
                throw InvalidArgument("interference must strictly increase with exertion rank");
    }
}

std::string participant_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%02d", index + 1);
    return buf;
}

const std::array<ActivityLabel, kActivityCount>& activity_cycle() {
    using enum ActivityLabel;
    static const std::array<ActivityLabel, kActivityCount> cycle{SITTING, STANDING, WALKING, WALKING_DOWNSTAIRS,
                                                                 WALKING_UPSTAIRS};
    return cycle;
}

std::pair<Recording, GroundTruth> generate_recording(int participant_index, Scenario scenario,
                                                     const SynthConfig& cfg) {
    cfg.validate();
    if (participant_index < 0) throw InvalidArgument("participant index must be >= 0");
    const Participant p = draw_participant(cfg, participant_index);
    const auto blocks = timeline(scenario, cfg);
    const double duration = blocks.back().end_s;

    Recording rec;
    rec.participant_id = participant_name(participant_index);
    rec.scenario = scenario;
    for (const auto& b : blocks) {
        if (b.emotion) {
            // Blocks after the first of an emotion block extend its interval.
            if (b.emotion_start_s < b.start_s)
                rec.emotion_annotations.back().end_s = b.end_s;
            else
                rec.emotion_annotations.push_back({b.start_s, b.end_s, *b.emotion});
        }
        if (!rec.activity_annotations.empty() && rec.activity_annotations.back().label == b.activity &&
            rec.activity_annotations.back().end_s == b.start_s && scenario == Scenario::S_E)
            rec.activity_annotations.back().end_s = b.end_s;
        else
            rec.activity_annotations.push_back({b.start_s, b.end_s, b.activity});
    }

    GroundTruth truth;
    std::uint64_t channel_stream = 0;
    for (const auto& [channel, fs] : cfg.fs_hz) {
        ++channel_stream;
        std::mt19937_64 rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(participant_index),
                                      static_cast<std::uint64_t>(scenario) + 1, channel_stream}));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const ChannelScale scale = channel_scale(channel);
        const double noise_sd = cfg.noise_sigma * scale.noise;

        // Per-block interference shapes, drawn up front so every block gets
        // its own artifact regardless of amplitudes.
        std::vector<MultiSine> motion;
        std::vector<std::pair<double, double>> wander;  // frequency, phase
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            motion.push_back(random_multisine(rng, 6, 0.5, std::min(4.0, 0.4 * fs)));
            wander.emplace_back(std::uniform_real_distribution<double>(0.05, 0.15)(rng),
                                std::uniform_real_distribution<double>(0.0, kTwoPi)(rng));
        }

        const auto n = static_cast<std::size_t>(std::llround(duration * fs));
        TimeSeries ts;
        ts.channel = channel;
        ts.fs_hz = fs;
        ts.units = std::string(default_units(channel));
        ts.samples.resize(n);
        auto& emo_truth = truth.emotion[channel];
        auto& act_truth = truth.activity[channel];
        emo_truth.resize(n);
        act_truth.resize(n);

        std::size_t b = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            while (b + 1 < blocks.size() && t >= blocks[b].end_s) ++b;
            const Block& blk = blocks[b];
            const EmotionEffect& effect =
                cfg.emotion_effect[static_cast<std::size_t>(blk.emotion.value_or(EmotionLabel::NEUTRAL))];
            const double tau = t - blk.emotion_start_s;
            const auto rank = static_cast<std::size_t>(exertion_rank(blk.activity));

            double v = baseline(channel, p) + emotion_component(channel, effect, p.effect_gain, p, t, tau);
            const double m_amp = cfg.interference.motion[rank] * scale.motion;
            const double w_amp = cfg.interference.wander[rank] * scale.wander;
            if (m_amp != 0.0) v += m_amp * motion[b](t);
            if (w_amp != 0.0) v += w_amp * std::sin(kTwoPi * wander[b].first * (t - blk.start_s) + wander[b].second);
            if (noise_sd != 0.0) v += noise_sd * gauss(rng);

            ts.samples[i] = v;
            emo_truth[i] = blk.emotion;
            act_truth[i] = blk.activity;
        }
        rec.channels.emplace(channel, std::move(ts));
    }
    validate(rec);
    return {std::move(rec), std::move(truth)};
}

StudyCorpus generate_corpus(const SynthConfig& cfg) {
    cfg.validate();
    StudyCorpus corpus;
    for (int i = 0; i < cfg.n_participants; ++i) {
        corpus.recordings.push_back(generate_recording(i, Scenario::S_E, cfg).first);
        corpus.recordings.push_back(generate_recording(i, Scenario::S_EA, cfg).first);
    }
    return corpus;
}

}  // namespace emorec
