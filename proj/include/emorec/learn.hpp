#pragma once

// Classifiers (3-nearest-neighbour, CART decision tree, random forest),
// feature standardization and classification metrics.
//
// All randomness comes from std::mt19937_64 streams seeded through
// mix_seed(), so a (kind, instances, seed) triple always yields the same model.

#include "emorec/datamodel.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emorec {

struct InstanceMeta {
    std::string participant_id;
    ActivityLabel activity = ActivityLabel::SITTING;
    std::size_t window_index = 0;
};

struct Instance {
    std::vector<double> features;
    EmotionLabel label = EmotionLabel::NEUTRAL;
    InstanceMeta meta;
};

/// Per-feature z-scoring with population statistics of the training set.
/// Zero-variance features map to 0.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> stddev);

    /// Throws InvalidArgument for an empty set or ragged feature vectors.
    static Standardizer fit(std::span<const Instance> train);

    std::vector<double> transform(std::span<const double> features) const;
    void transform_into(std::span<const double> features, std::span<double> out) const;
    Instance apply(const Instance& instance) const;

    std::size_t dimension() const noexcept { return mean_.size(); }
    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& stddev() const noexcept { return stddev_; }

private:
    std::vector<double> mean_;
    std::vector<double> stddev_;
};

enum class ClassifierKind { KNN3, DT, RF };

std::string_view to_string(ClassifierKind kind);
/// Accepts KNN3/knn, DT/dt, RF/rf.
std::optional<ClassifierKind> parse_classifier(std::string_view name);

using ClassCounts = std::array<std::uint32_t, kEmotionCount>;

/// Node of a binary tree stored in a flat array. Internal nodes send x with
/// x[feature] <= threshold to `left`. Every node keeps its training class
/// counts; leaves predict their majority (ties to the lower label).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    ClassCounts counts{};

    bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    EmotionLabel predict(std::span<const double> x) const;
    std::size_t depth() const;
};

struct TrainOptions {
    int knn_k = 3;
    int rf_trees = 100;
    int min_samples_split = 2;
    /// Features tried per split in RF; 0 means ceil(sqrt(d)).
    int rf_max_features = 0;
    bool rf_bootstrap = true;

    bool operator==(const TrainOptions&) const = default;
};

class TrainedModel {
public:
    ClassifierKind kind() const noexcept { return kind_; }
    const TrainOptions& options() const noexcept { return options_; }
    const Standardizer& standardizer() const noexcept { return standardizer_; }
    std::size_t dimension() const noexcept { return standardizer_.dimension(); }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    const std::vector<std::uint64_t>& tree_seeds() const noexcept { return tree_seeds_; }
    std::size_t stored_instances() const noexcept { return knn_labels_.size(); }

    /// Takes raw (unstandardized) features. Throws InvalidArgument on a
    /// dimension mismatch.
    EmotionLabel predict(std::span<const double> features) const;

    /// Versioned line-oriented text; deserialize(serialize()) predicts
    /// identically.
    std::string serialize() const;
    static TrainedModel deserialize(std::string_view text);

private:
    friend TrainedModel train(ClassifierKind, std::span<const Instance>, std::uint64_t, const TrainOptions&);

    EmotionLabel predict_standardized(std::span<const double> z) const;

    ClassifierKind kind_ = ClassifierKind::KNN3;
    TrainOptions options_;
    Standardizer standardizer_;
    std::vector<double> knn_rows_;  // row-major, standardized
    std::vector<EmotionLabel> knn_labels_;
    std::vector<DecisionTree> trees_;
    std::vector<std::uint64_t> tree_seeds_;
};

/// KNN3 stores standardized instances. DT grows a CART tree on Gini impurity
/// until nodes are pure or smaller than min_samples_split; candidate
/// thresholds are midpoints of consecutive distinct values, ties go to the
/// lowest feature then the lowest threshold. RF grows rf_trees such trees on
/// bootstrap resamples, trying rf_max_features random features per split;
/// tree t draws from mix_seed({seed, t}).
///
/// Throws InvalidArgument for an empty or single-class training set.
TrainedModel train(ClassifierKind kind, std::span<const Instance> instances, std::uint64_t seed,
                   const TrainOptions& options = {});

EmotionLabel predict(const TrainedModel& model, std::span<const double> features);

/// Majority label among the k nearest rows by Euclidean distance; distance
/// ties go to the lower row index; label ties go to the tied label whose
/// closest member is nearest.
EmotionLabel knn_vote(std::span<const double> rows, std::span<const EmotionLabel> labels, std::size_t dim,
                      std::span<const double> query, std::size_t k);

/// Fits a single CART tree on row-major data. `max_features` = 0 or >= dim
/// considers every feature at every split; otherwise `rng_seed` drives the
/// per-split feature draw.
DecisionTree grow_tree(std::span<const double> rows, std::span<const EmotionLabel> labels, std::size_t dim,
                       std::span<const std::uint32_t> sample, int min_samples_split, int max_features,
                       std::uint64_t rng_seed);

using Confusion = std::array<std::array<std::uint64_t, kEmotionCount>, kEmotionCount>;

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    bool present = false;  // occurs in truth or predictions

    bool operator==(const ClassMetrics&) const = default;
};

struct EvaluationMetrics {
    Confusion confusion{};  // rows = truth, columns = prediction
    double accuracy = 0.0;
    std::array<ClassMetrics, kEmotionCount> per_class{};
    /// Mean f-measure over present classes.
    double macro_f = 0.0;

    std::uint64_t total() const;
    bool operator==(const EvaluationMetrics&) const = default;
};

EvaluationMetrics metrics_from_confusion(const Confusion& confusion);
/// Pairs are (truth, prediction).
EvaluationMetrics evaluate(std::span<const std::pair<EmotionLabel, EmotionLabel>> predictions);

}  // namespace emorec
