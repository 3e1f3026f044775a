#include "emorec/features.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace emorec {

namespace {

void require_length(std::span<const double> w, std::size_t min, const char* what) {
    if (w.size() < min)
        throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(min) + " samples, got " +
                              std::to_string(w.size()));
}

double mean_of(std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += v;
    return s / static_cast<double>(w.size());
}

double mean_abs_second_diff(std::span<const double> w) {
    double s = 0.0;
    for (std::size_t i = 0; i + 2 < w.size(); ++i) s += std::abs(w[i + 2] - w[i]);
    return s / static_cast<double>(w.size() - 2);
}

}  // namespace

RegressionFit linear_fit(std::span<const double> w) {
    require_length(w, 2, "linear_fit");
    const auto n = static_cast<double>(w.size());
    const double mean_i = (n + 1.0) / 2.0;
    const double mean_x = mean_of(w);
    // sum (i - mean_i)^2 over i = 1..n
    const double sii = n * (n * n - 1.0) / 12.0;
    double six = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) six += (static_cast<double>(k + 1) - mean_i) * (w[k] - mean_x);
    const double slope = six / sii;
    return {slope, mean_x - slope * mean_i};
}

RegressionFeatures regression_features(std::span<const double> w) {
    const RegressionFit fit = linear_fit(w);
    const double root_intercept = std::sqrt(std::abs(fit.intercept));
    return {std::sqrt(std::abs(fit.slope)), root_intercept, root_intercept * root_intercept * root_intercept};
}

double mean_abs_first_diff(std::span<const double> w) {
    require_length(w, 2, "mean_abs_first_diff");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) s += std::abs(w[i + 1] - w[i]);
    return s / static_cast<double>(w.size() - 1);
}

std::array<double, kStatisticalFeatureCount> statistical_features(std::span<const double> w) {
    require_length(w, 3, "statistical_features");
    const auto n = static_cast<double>(w.size());
    const double mean = mean_of(w);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0, sq = 0.0;
    for (double v : w) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        sq += v * v;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double sd = std::sqrt(m2);

    std::vector<double> sorted(w.begin(), w.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

    const double d1 = mean_abs_first_diff(w);
    const double d2 = mean_abs_second_diff(w);
    // Exactly constant windows; testing m2 == 0 would miss rounding residue.
    const bool flat = sorted.front() == sorted.back();

    return {mean,
            median,
            sd,
            m2,
            sorted.front(),
            sorted.back(),
            sorted.back() - sorted.front(),
            std::sqrt(sq / n),
            flat ? 0.0 : m3 / (m2 * sd),
            flat ? 0.0 : m4 / (m2 * m2) - 3.0,
            d1,
            flat ? 0.0 : d1 / sd,
            d2,
            flat ? 0.0 : d2 / sd,
            linear_fit(w).slope};
}

std::string_view to_string(FeatureSetKind kind) { return kind == FeatureSetKind::All ? "ALL" : "SELECTED"; }

std::optional<FeatureSetKind> parse_feature_set(std::string_view name) {
    if (name == "ALL" || name == "all") return FeatureSetKind::All;
    if (name == "SELECTED" || name == "selected") return FeatureSetKind::Selected;
    return std::nullopt;
}

std::vector<ChannelKind> feature_channels(FeatureSetKind kind, const WindowGroup& group) {
    if (kind == FeatureSetKind::Selected) {
        for (ChannelKind c : kSelectedChannels)
            if (!group.has(c))
                throw InvalidArgument("selected feature set requires channel " + std::string(to_string(c)));
        return {kSelectedChannels.begin(), kSelectedChannels.end()};
    }
    std::vector<ChannelKind> out;
    for (const auto& [c, w] : group.windows) out.push_back(c);
    return out;
}

std::vector<std::string> feature_names(FeatureSetKind kind, std::span<const ChannelKind> channels) {
    std::vector<std::string> out;
    for (ChannelKind c : channels) {
        const std::string prefix = std::string(to_string(c)) + ".";
        if (kind == FeatureSetKind::All)
            for (auto name : kStatisticalFeatureNames) out.push_back(prefix + std::string(name));
        else
            for (auto name : kSelectedFeatureNames) out.push_back(prefix + std::string(name));
    }
    return out;
}

void extract_values(const WindowGroup& group, FeatureSetKind kind, std::span<const ChannelKind> channels,
                    std::vector<double>& out) {
    for (ChannelKind c : channels) {
        const auto it = group.windows.find(c);
        if (it == group.windows.end())
            throw InvalidArgument("window group lacks channel " + std::string(to_string(c)));
        const std::span<const double> w(it->second.samples);
        if (kind == FeatureSetKind::All) {
            const auto stats = statistical_features(w);
            out.insert(out.end(), stats.begin(), stats.end());
        } else {
            const RegressionFeatures r = regression_features(w);
            out.push_back(mean_abs_first_diff(w));
            out.push_back(r.f_slope);
            out.push_back(r.f_intercept);
            out.push_back(r.f_intercept_cubed);
        }
    }
}

double FeatureVector::value(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw InvalidArgument("no feature named " + std::string(name));
}

FeatureVector extract(const WindowGroup& group, FeatureSetKind kind) {
    const auto channels = feature_channels(kind, group);
    FeatureVector fv;
    fv.names = feature_names(kind, channels);
    extract_values(group, kind, channels, fv.values);
    fv.emotion = group.emotion;
    fv.activity = group.activity;
    fv.participant_id = group.participant_id;
    fv.window_index = group.window_index;
    return fv;
}

void write_feature_csv(std::ostream& out, std::span<const FeatureVector> vectors) {
    if (vectors.empty()) return;
    const auto& names = vectors.front().names;
    for (const auto& n : names) out << n << ',';
    out << "emotion,activity,participant,window_index\n";
    for (const auto& fv : vectors) {
        if (fv.names != names) throw InvalidArgument("feature vectors disagree on feature names");
        for (double v : fv.values) out << format_double(v) << ',';
        out << to_string(fv.emotion) << ',' << to_string(fv.activity) << ',' << fv.participant_id << ','
            << fv.window_index << '\n';
    }
}

}  // namespace emorec
