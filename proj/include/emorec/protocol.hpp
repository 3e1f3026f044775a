#pragma once

// Cross-context evaluation: per participant, train on windows recorded while
// sitting in S_E, test on every S_EA window, for each window length, feature
// set, classifier and repeat. Plus aggregation and report export.

#include "emorec/dsp.hpp"
#include "emorec/features.hpp"
#include "emorec/learn.hpp"
#include "emorec/segmentation.hpp"

#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace emorec {

struct ExperimentConfig {
    std::vector<WindowSpec> window_specs = window_sweep();
    std::vector<ClassifierKind> classifiers{ClassifierKind::KNN3, ClassifierKind::DT, ClassifierKind::RF};
    std::vector<FeatureSetKind> feature_sets{FeatureSetKind::All, FeatureSetKind::Selected};
    int repeats = 10;
    std::uint64_t base_seed = 42;
    FilterMode filter_mode = FilterMode::ZeroPhase;
    /// Preprocessed channels every participant must have in both scenarios.
    std::vector<ChannelKind> required_channels{kSelectedChannels.begin(), kSelectedChannels.end()};
    /// Rate every channel is resampled to before windowing; 0 picks the
    /// highest rate among the participant's channels.
    double analysis_fs_hz = 0.0;
    /// Seconds dropped at both ends of every emotion interval, where filtering
    /// mixes in the neighbouring label's signal. The ST low-pass (order 4,
    /// 0.25 Hz) is the slowest filter; its slowest pole has a 1.66 s time
    /// constant, so 8 s leaves under 1 % of a step.
    double boundary_guard_s = 8.0;
    TrainOptions train_options;
    /// Worker threads; 0 uses the hardware concurrency.
    int jobs = 1;
    /// Keep the serialized model of every cell in RunResult::models.
    bool keep_models = false;

    /// Throws InvalidArgument.
    void validate() const;
};

struct ResultKey {
    std::string participant_id;
    ClassifierKind classifier = ClassifierKind::KNN3;
    FeatureSetKind feature_set = FeatureSetKind::Selected;
    int window_ms = 0;
    int repeat = 0;

    auto operator<=>(const ResultKey&) const = default;
};

struct CellResult {
    EvaluationMetrics overall;
    /// Only activities that occur among the test windows.
    std::map<ActivityLabel, EvaluationMetrics> per_activity;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t seed = 0;

    bool operator==(const CellResult&) const = default;
};

/// A (participant, feature set, window) combination that produced no cells.
struct Skip {
    std::string participant_id;
    FeatureSetKind feature_set = FeatureSetKind::Selected;
    int window_ms = 0;
    std::string reason;

    auto operator<=>(const Skip&) const = default;
};

struct RunResult {
    std::map<ResultKey, CellResult> cells;
    std::vector<Skip> skips;  // sorted
    std::map<ResultKey, std::string> models;  // only with keep_models
};

std::uint64_t repeat_seed(std::uint64_t base_seed, std::string_view participant_id, ClassifierKind classifier,
                          int window_ms, int repeat);

/// Training and test instances of one participant for one window spec and
/// feature set, after preprocessing, slicing, resampling, windowing and
/// alignment. Training instances come from S_E SITTING segments only.
struct InstanceSplit {
    std::vector<Instance> train;
    std::vector<Instance> test;
    std::vector<std::string> feature_names;
};

/// Per-participant preprocessed segments of both scenarios, reusable across
/// window specs.
class ParticipantData {
public:
    /// Throws Error if the participant lacks S_E or S_EA, or a required
    /// channel after preprocessing.
    ParticipantData(const StudyCorpus& corpus, const std::string& participant_id, const ExperimentConfig& config);

    const std::string& participant_id() const noexcept { return participant_id_; }
    double analysis_fs_hz() const noexcept { return fs_; }
    const std::vector<ChannelKind>& channels() const noexcept { return channels_; }

    /// Throws InvalidArgument when the window is shorter than 2 samples at the
    /// analysis rate.
    std::map<FeatureSetKind, InstanceSplit> instances(const WindowSpec& spec,
                                                      std::span<const FeatureSetKind> feature_sets) const;

private:
    std::string participant_id_;
    double fs_ = 0.0;
    std::vector<ChannelKind> channels_;
    std::vector<LabeledSegment> train_segments_;
    std::vector<LabeledSegment> test_segments_;
};

/// Runs the whole grid. Tasks are (participant, window spec) pairs executed on
/// config.jobs threads; the result does not depend on the thread count.
/// `log` receives one line per finished task when set.
RunResult cross_context_eval(const StudyCorpus& corpus, const ExperimentConfig& config,
                             const std::function<void(std::string_view)>& log = {});

/// mean and std are NaN when n = 0; two NaN rows compare equal.
struct AccuracyRow {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;

    bool operator==(const AccuracyRow& o) const {
        auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
        return same(mean, o.mean) && same(std, o.std) && n == o.n;
    }
};

struct AggregateReport {
    using ModelKey = std::pair<ClassifierKind, FeatureSetKind>;

    /// Across participants of each participant's repeat-mean accuracy.
    std::map<ModelKey, std::map<int, AccuracyRow>> accuracy_vs_window;
    /// Across window lengths of the repeat-mean accuracy.
    std::map<ModelKey, std::map<std::string, AccuracyRow>> participant_accuracy;
    /// Mean f-measure per emotion over (participant, window) cells where the
    /// class is present; n counts those cells; std over the same cells.
    std::map<ModelKey, std::map<EmotionLabel, AccuracyRow>> fmeasure;
    /// Mean accuracy restricted to one activity over (participant, window)
    /// cells containing it. Every activity has a row; absent ones have n = 0.
    std::map<ModelKey, std::map<ActivityLabel, AccuracyRow>> activity_accuracy;

    bool operator==(const AggregateReport&) const = default;
};

/// Repeats are averaged first; standard deviations are population ones.
AggregateReport aggregate(const RunResult& result);

/// Writes accuracy_vs_window.csv, participant_accuracy.csv,
/// fmeasure_per_category.csv, accuracy_per_activity.csv and skips.csv.
/// Returns the written paths. Throws Error on I/O failure.
std::vector<std::filesystem::path> export_report(const AggregateReport& report, const RunResult& result,
                                                 const std::filesystem::path& dir);

inline constexpr std::string_view kManifestFile = "run.manifest";

/// Key/value text: configuration, corpus hash, and the seed of every cell.
std::string manifest_text(const ExperimentConfig& config, std::uint64_t corpus_hash, const RunResult& result);
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config, std::uint64_t corpus_hash,
                    const RunResult& result);

}  // namespace emorec
