#pragma once

// Per-window features: the statistical set computed on every channel and the
// regression-line set computed on BVP, ST, EMG_H and EMG_L.

#include "emorec/segmentation.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emorec {

/// Least-squares line of the samples against their 1-based indices.
struct RegressionFit {
    double slope;
    double intercept;
};

RegressionFit linear_fit(std::span<const double> window);

struct RegressionFeatures {
    double f_slope;            // sqrt(|slope|)
    double f_intercept;        // sqrt(|intercept|)
    double f_intercept_cubed;  // sqrt(|intercept|)^3
};

RegressionFeatures regression_features(std::span<const double> window);

/// (1 / (n - 1)) * sum |x[i+1] - x[i]|. Needs n >= 2.
double mean_abs_first_diff(std::span<const double> window);

inline constexpr std::size_t kStatisticalFeatureCount = 15;

/// Order of statistical_features(). Moments are population estimates;
/// kurtosis is excess kurtosis. abs_diff2_mean is (1 / (n - 2)) * sum
/// |x[i+2] - x[i]|. The `_z` variants are computed on the z-scored window,
/// i.e. divided by the standard deviation; they, skewness and kurtosis are 0
/// for a constant window.
inline constexpr std::array<std::string_view, kStatisticalFeatureCount> kStatisticalFeatureNames{
    "mean",           "median",           "std",            "variance",         "min",
    "max",            "range",            "rms",            "skewness",         "kurtosis",
    "abs_diff1_mean", "abs_diff1_mean_z", "abs_diff2_mean", "abs_diff2_mean_z", "slope"};

/// Needs n >= 3.
std::array<double, kStatisticalFeatureCount> statistical_features(std::span<const double> window);

enum class FeatureSetKind { All, Selected };

std::string_view to_string(FeatureSetKind kind);
std::optional<FeatureSetKind> parse_feature_set(std::string_view name);

inline constexpr std::array<std::string_view, 4> kSelectedFeatureNames{
    "abs_diff1_mean", "f_slope", "f_intercept", "f_intercept_cubed"};
inline constexpr std::array<ChannelKind, 4> kSelectedChannels{
    ChannelKind::BVP, ChannelKind::ST, ChannelKind::EMG_H, ChannelKind::EMG_L};

/// Channels the feature set is computed on, in output order. All: every
/// channel present in the group, in ChannelKind order. Selected: the four
/// fixed channels; throws InvalidArgument naming the first one missing.
std::vector<ChannelKind> feature_channels(FeatureSetKind kind, const WindowGroup& group);

/// `<CHANNEL>.<feature>` names for the given channels.
std::vector<std::string> feature_names(FeatureSetKind kind, std::span<const ChannelKind> channels);

/// Appends the feature values for `channels` (as from feature_channels) to out.
void extract_values(const WindowGroup& group, FeatureSetKind kind, std::span<const ChannelKind> channels,
                    std::vector<double>& out);

struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
    EmotionLabel emotion = EmotionLabel::NEUTRAL;
    ActivityLabel activity = ActivityLabel::SITTING;
    std::string participant_id;
    std::size_t window_index = 0;

    /// Throws InvalidArgument for an unknown name.
    double value(std::string_view name) const;
};

FeatureVector extract(const WindowGroup& group, FeatureSetKind kind);

/// Header of feature names followed by `emotion,activity,participant,window_index`.
/// All vectors must share the first vector's names.
void write_feature_csv(std::ostream& out, std::span<const FeatureVector> vectors);

}  // namespace emorec
