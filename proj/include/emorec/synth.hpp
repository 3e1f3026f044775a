#pragma once

// Deterministic synthetic study corpus with known ground truth.
//
// Each signal is a per-participant baseline, plus an emotion component that
// lives in regression-visible quantities (level offsets, linear drift from the
// start of the emotion block, amplitude), plus activity interference (band
// limited motion artifact and baseline wander, both growing with exertion),
// plus white noise. The emotion component does not depend on the activity, so
// a model fit on sitting data can in principle classify every activity.

#include "emorec/datamodel.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace emorec {

struct EmotionEffect {
    double st_offset;      // celsius
    double st_drift;       // celsius per second since block start
    double emg_tonic;      // microvolt level shift
    double emg_drift;      // microvolt per second since block start
    double emg_amplitude;  // factor on the muscle-activity carrier
    double bvp_amplitude;  // factor on the pulse amplitude
    double eda_offset;     // microsiemens
    double resp_rate_hz;   // breathing rate
};

/// Indexed by exertion rank. Values are in noise-relative units; each channel
/// scales them by its own sensitivity.
struct InterferenceProfile {
    std::array<double, kActivityCount> motion;
    std::array<double, kActivityCount> wander;
};

struct SynthConfig {
    int n_participants = 6;
    std::map<ChannelKind, double> fs_hz{
        {ChannelKind::EMG_RAW, 250.0}, {ChannelKind::EDA, 32.0}, {ChannelKind::ST, 4.0},
        {ChannelKind::PZT, 32.0},      {ChannelKind::BVP, 64.0}};
    double trial_duration_s = 120.0;
    double activity_segment_s = 20.0;
    /// Unlabeled sitting rest with neutral physiology between S_EA trials.
    double rest_s = 60.0;
    std::array<EmotionEffect, kEmotionCount> emotion_effect = default_emotion_effects();
    InterferenceProfile interference = default_interference();
    /// Scale on every channel's white-noise level; 0 disables noise.
    double noise_sigma = 1.0;
    std::uint64_t seed = 42;

    static std::array<EmotionEffect, kEmotionCount> default_emotion_effects();
    static InterferenceProfile default_interference();

    /// Same configuration with noise and interference switched off.
    SynthConfig noiseless() const;

    /// Throws InvalidArgument. Interference must be all zero or strictly
    /// increasing in exertion rank.
    void validate() const;
};

/// Labels of every generated sample, per channel.
struct GroundTruth {
    std::map<ChannelKind, std::vector<std::optional<EmotionLabel>>> emotion;
    std::map<ChannelKind, std::vector<ActivityLabel>> activity;
};

/// "P01", "P02", ...
std::string participant_name(int index);

/// S_E: NEUTRAL, HPHA, NEUTRAL, HNHA, NEUTRAL blocks of trial_duration_s while
/// sitting. S_EA: one trial per emotion (NEUTRAL, HPHA, HNHA), each cycling
/// sitting, standing, walking, walking downstairs, walking upstairs for
/// activity_segment_s apiece, with rest_s of sitting rest between trials that
/// carries no emotion annotation. S_A: 180 s of sitting rest, then the same
/// activity cycle, without emotion annotations.
std::pair<Recording, GroundTruth> generate_recording(int participant_index, Scenario scenario, const SynthConfig& cfg);

/// One S_E and one S_EA recording per participant.
StudyCorpus generate_corpus(const SynthConfig& cfg);

/// Order the activities are performed in within a trial.
const std::array<ActivityLabel, kActivityCount>& activity_cycle();

}  // namespace emorec
