#pragma once

#include "emorec/protocol.hpp"
#include "emorec/synth.hpp"

namespace emorec_test {

/// Short recordings so a whole evaluation takes well under a second. S_EA
/// trials (5 x 12 s) stay within the S_E block length, so the emotion drift
/// seen in testing never exceeds the range seen in training, and the first
/// activity segment outlasts the default boundary guard.
inline emorec::SynthConfig small_synth(std::uint64_t seed, int participants = 2) {
    emorec::SynthConfig cfg;
    cfg.n_participants = participants;
    cfg.seed = seed;
    cfg.trial_duration_s = 60.0;
    cfg.activity_segment_s = 12.0;
    cfg.rest_s = 20.0;
    return cfg;
}

inline emorec::ExperimentConfig small_experiment() {
    emorec::ExperimentConfig cfg;
    cfg.window_specs = {emorec::WindowSpec::non_overlapping(200), emorec::WindowSpec::non_overlapping(500)};
    cfg.classifiers = {emorec::ClassifierKind::KNN3};
    cfg.feature_sets = {emorec::FeatureSetKind::Selected};
    cfg.repeats = 2;
    return cfg;
}

}  // namespace emorec_test
