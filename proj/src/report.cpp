#include "emorec/error.hpp"
#include "emorec/protocol.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace emorec {

namespace {

AccuracyRow summarize(const std::vector<double>& xs) {
    AccuracyRow row;
    row.n = xs.size();
    if (xs.empty()) {
        row.mean = row.std = std::numeric_limits<double>::quiet_NaN();
        return row;
    }
    double sum = 0.0;
    for (double x : xs) sum += x;
    row.mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - row.mean) * (x - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return row;
}

std::string num(double v) { return std::isnan(v) ? "nan" : format_double(v); }

/// Cell identity with the repeat dropped.
struct CellGroup {
    ClassifierKind classifier;
    FeatureSetKind feature_set;
    std::string participant;
    int window_ms;

    auto operator<=>(const CellGroup&) const = default;
};

struct RepeatMeans {
    double accuracy = 0.0;
    std::array<std::vector<double>, kEmotionCount> f;  // repeats where the class is present
    std::map<ActivityLabel, std::vector<double>> activity;
    std::size_t repeats = 0;
};

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

AggregateReport aggregate(const RunResult& result) {
    std::map<CellGroup, RepeatMeans> groups;
    for (const auto& [key, cell] : result.cells) {
        auto& g = groups[{key.classifier, key.feature_set, key.participant_id, key.window_ms}];
        g.accuracy += cell.overall.accuracy;
        ++g.repeats;
        for (std::size_t c = 0; c < kEmotionCount; ++c)
            if (cell.overall.per_class[c].present) g.f[c].push_back(cell.overall.per_class[c].f_measure);
        for (const auto& [a, m] : cell.per_activity) g.activity[a].push_back(m.accuracy);
    }

    using ModelKey = AggregateReport::ModelKey;
    std::map<ModelKey, std::map<int, std::vector<double>>> by_window;
    std::map<ModelKey, std::map<std::string, std::vector<double>>> by_participant;
    std::map<ModelKey, std::map<EmotionLabel, std::vector<double>>> f_cells;
    std::map<ModelKey, std::map<ActivityLabel, std::vector<double>>> act_cells;
    for (const auto& [g, m] : groups) {
        const ModelKey mk{g.classifier, g.feature_set};
        const double acc = m.accuracy / static_cast<double>(m.repeats);
        by_window[mk][g.window_ms].push_back(acc);
        by_participant[mk][g.participant].push_back(acc);
        for (std::size_t c = 0; c < kEmotionCount; ++c)
            if (!m.f[c].empty()) f_cells[mk][kAllEmotions[c]].push_back(mean_of(m.f[c]));
        for (const auto& [a, xs] : m.activity) act_cells[mk][a].push_back(mean_of(xs));
    }

    AggregateReport report;
    for (const auto& [mk, rows] : by_window)
        for (const auto& [w, xs] : rows) report.accuracy_vs_window[mk][w] = summarize(xs);
    for (const auto& [mk, rows] : by_participant)
        for (const auto& [p, xs] : rows) report.participant_accuracy[mk][p] = summarize(xs);
    for (const auto& [mk, rows] : by_window) {
        (void)rows;
        for (EmotionLabel e : kAllEmotions) {
            const auto& cells = f_cells[mk][e];
            report.fmeasure[mk][e] = summarize(cells);
        }
        for (ActivityLabel a : kAllActivities) report.activity_accuracy[mk][a] = summarize(act_cells[mk][a]);
    }
    return report;
}

std::vector<std::filesystem::path> export_report(const AggregateReport& report, const RunResult& result,
                                                 const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& text) {
        const auto path = dir / name;
        write_file(path, text);
        written.push_back(path);
    };

    std::ostringstream t;
    t << "classifier,feature_set,window_ms,mean_accuracy,std_accuracy,n_participants\n";
    for (const auto& [mk, rows] : report.accuracy_vs_window)
        for (const auto& [w, r] : rows)
            t << to_string(mk.first) << ',' << to_string(mk.second) << ',' << w << ',' << num(r.mean) << ','
              << num(r.std) << ',' << r.n << '\n';
    emit("accuracy_vs_window.csv", t.str());

    t.str("");
    t << "classifier,feature_set,participant,mean_accuracy,std_accuracy,n_windows\n";
    for (const auto& [mk, rows] : report.participant_accuracy)
        for (const auto& [p, r] : rows)
            t << to_string(mk.first) << ',' << to_string(mk.second) << ',' << p << ',' << num(r.mean) << ','
              << num(r.std) << ',' << r.n << '\n';
    emit("participant_accuracy.csv", t.str());

    t.str("");
    t << "classifier,feature_set,emotion,mean_f_measure,std_f_measure,n_cells\n";
    for (const auto& [mk, rows] : report.fmeasure)
        for (const auto& [e, r] : rows)
            t << to_string(mk.first) << ',' << to_string(mk.second) << ',' << to_string(e) << ',' << num(r.mean)
              << ',' << num(r.std) << ',' << r.n << '\n';
    emit("fmeasure_per_category.csv", t.str());

    t.str("");
    t << "classifier,feature_set,activity,mean_accuracy,std_accuracy,n_cells\n";
    for (const auto& [mk, rows] : report.activity_accuracy)
        for (const auto& [a, r] : rows)
            t << to_string(mk.first) << ',' << to_string(mk.second) << ',' << to_string(a) << ',' << num(r.mean)
              << ',' << num(r.std) << ',' << r.n << '\n';
    emit("accuracy_per_activity.csv", t.str());

    t.str("");
    t << "participant,feature_set,window_ms,reason\n";
    for (const auto& s : result.skips)
        t << s.participant_id << ',' << to_string(s.feature_set) << ',' << s.window_ms << ",\"" << s.reason << "\"\n";
    emit("skips.csv", t.str());
    return written;
}

std::string manifest_text(const ExperimentConfig& config, std::uint64_t corpus_hash, const RunResult& result) {
    std::ostringstream m;
    m << "format = 1\n";
    m << "corpus_hash = " << hex64(corpus_hash) << '\n';
    m << "base_seed = " << config.base_seed << '\n';
    m << "repeats = " << config.repeats << '\n';
    m << "filter_mode = " << to_string(config.filter_mode) << '\n';
    m << "analysis_fs_hz = " << format_double(config.analysis_fs_hz) << '\n';
    m << "boundary_guard_s = " << format_double(config.boundary_guard_s) << '\n';
    m << "windows =";
    for (const auto& w : config.window_specs) m << ' ' << w.length_ms << '/' << w.stride_ms;
    m << "\nclassifiers =";
    for (auto c : config.classifiers) m << ' ' << to_string(c);
    m << "\nfeature_sets =";
    for (auto f : config.feature_sets) m << ' ' << to_string(f);
    m << "\nrequired_channels =";
    for (auto c : config.required_channels) m << ' ' << to_string(c);
    const auto& o = config.train_options;
    m << "\ntrain_options = k=" << o.knn_k << " trees=" << o.rf_trees << " min_split=" << o.min_samples_split
      << " max_features=" << o.rf_max_features << " bootstrap=" << (o.rf_bootstrap ? 1 : 0) << '\n';
    m << "cells = " << result.cells.size() << '\n';
    m << "skips = " << result.skips.size() << '\n';
    for (const auto& [k, cell] : result.cells)
        m << "seed." << k.participant_id << '.' << to_string(k.classifier) << '.' << to_string(k.feature_set) << '.'
          << k.window_ms << '.' << k.repeat << " = " << cell.seed << '\n';
    return m.str();
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config, std::uint64_t corpus_hash,
                    const RunResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / kManifestFile, manifest_text(config, corpus_hash, result));
}

}  // namespace emorec
