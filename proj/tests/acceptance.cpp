// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// fails. The long end-to-end runs use the default synthetic corpus.

#include "emorec/dsp.hpp"
#include "emorec/error.hpp"
#include "emorec/features.hpp"
#include "emorec/learn.hpp"
#include "emorec/protocol.hpp"
#include "emorec/segmentation.hpp"
#include "emorec/synth.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace emorec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void filter_correctness() {
    const auto t0 = Clock::now();
    const double fs = 1000.0;
    const std::vector<FilterSpec> specs{{FilterKind::HighPass, 5, 40.0, fs},
                                        {FilterKind::LowPass, 4, 5.0, fs},
                                        {FilterKind::LowPass, 4, 0.5, fs},
                                        {FilterKind::LowPass, 4, 0.25, fs},
                                        {FilterKind::LowPass, 1, 1.0, fs}};
    double worst_pass = 0, worst_cut = 0, max_pole = 0;
    for (const auto& s : specs) {
        const auto f = design_butterworth(s);
        const double edge = s.kind == FilterKind::LowPass ? 0.0 : fs / 2;
        worst_pass = std::max(worst_pass, std::abs(std::abs(frequency_response(f, edge, fs)) - 1.0));
        worst_cut = std::max(worst_cut, std::abs(std::abs(frequency_response(f, s.cutoff_hz, fs)) - 0.7071));
        for (const auto& p : poles(f)) max_pole = std::max(max_pole, std::abs(p));
    }
    const double dt = seconds_since(t0);
    const bool ok = worst_pass <= 1e-9 && worst_cut <= 1e-3 && max_pole < 1.0 - 1e-9 && dt < 1.0;
    report(1, "filter correctness", ok,
           fmt("5 specs at 1000 Hz, passband err %.2e (<=1e-9), cutoff err %.2e (<=1e-3), max |pole| %.12f "
               "(<1-1e-9), %.3f s (<1 s)",
               worst_pass, worst_cut, max_pole, dt));
}

void oracle_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    constexpr int kFixtures = 200;
    int median_ok = 0, fit_ok = 0, stats_ok = 0, knn_ok = 0;
    double fit_err = 0, stats_err = 0;
    std::uniform_int_distribution<std::size_t> len(3, 600);
    std::uniform_int_distribution<int> width(0, 7);
    for (int i = 0; i < kFixtures; ++i) {
        const auto x = oracle::random_signal(rng, len(rng));
        const int w = 2 * width(rng) + 1;
        median_ok += rolling_median(x, w) == oracle::rolling_median(x, w);

        const auto f = linear_fit(x);
        const auto o = oracle::regression(x);
        const double e = std::max(std::abs(f.slope - o.slope), std::abs(f.intercept - o.intercept));
        fit_err = std::max(fit_err, e);
        fit_ok += e <= 1e-9;

        const auto got = statistical_features(x);
        const auto want = oracle::statistics(x);
        double se = 0;
        for (std::size_t k = 0; k < got.size(); ++k) se = std::max(se, std::abs(got[k] - want[k]));
        stats_err = std::max(stats_err, se);
        stats_ok += se <= 1e-9;
    }
    // KNN3: 200 fixtures, each a fresh training set and query
    std::uniform_int_distribution<int> lab(0, 2);
    std::uniform_int_distribution<std::size_t> n_train(6, 80), dim(1, 8);
    for (int i = 0; i < kFixtures; ++i) {
        const std::size_t n = n_train(rng), d = dim(rng);
        std::vector<Instance> train;
        std::vector<std::vector<double>> raw;
        std::vector<EmotionLabel> labels;
        for (std::size_t r = 0; r < n; ++r) {
            Instance in;
            in.features = oracle::random_signal(rng, d);
            in.label = kAllEmotions[static_cast<std::size_t>(r < 2 ? static_cast<int>(r) : lab(rng))];
            raw.push_back(in.features);
            labels.push_back(in.label);
            train.push_back(std::move(in));
        }
        const auto model = emorec::train(ClassifierKind::KNN3, train, 0);
        const oracle::ZScore z(raw);
        std::vector<std::vector<double>> rows;
        for (const auto& r : raw) rows.push_back(z(r));
        const auto q = oracle::random_signal(rng, d);
        knn_ok += model.predict(q) == oracle::knn(rows, labels, z(q), 3);
    }
    const double dt = seconds_since(t0);
    const bool ok = median_ok == kFixtures && fit_ok == kFixtures && stats_ok == kFixtures && knn_ok == kFixtures &&
                    dt < 30.0;
    report(2, "oracle equivalence", ok,
           fmt("median %d/%d exact, linear_fit %d/%d (max err %.1e), statistics %d/%d (max err %.1e), "
               "KNN3 %d/%d exact, %.2f s (<30 s)",
               median_ok, kFixtures, fit_ok, kFixtures, fit_err, stats_ok, kFixtures, stats_err, knn_ok, kFixtures,
               dt));
}

void regression_examples() {
    const auto a = regression_features(std::vector<double>{2, 4, 6, 8});
    const auto b = regression_features(std::vector<double>{5, 5, 5});
    const auto c = regression_features(std::vector<double>{1, 2, 3});
    const bool ok = std::abs(a.f_slope - 1.414214) <= 5e-7 && std::abs(b.f_intercept - 2.236068) <= 5e-7 &&
                    std::abs(b.f_intercept_cubed - 11.180340) <= 5e-7 && std::abs(c.f_slope - 1.0) <= 1e-12 &&
                    std::abs(c.f_intercept) <= 1e-6 && std::abs(c.f_intercept_cubed) <= 1e-12;
    report(3, "regression feature examples", ok,
           fmt("(2,4,6,8) f_slope %.6f; (5,5,5) f_intercept %.6f, f_intercept_cubed %.6f; (1,2,3) -> (%.6f, %.6f, %.6f)",
               a.f_slope, b.f_intercept, b.f_intercept_cubed, c.f_slope, c.f_intercept, c.f_intercept_cubed));
}

double mean_accuracy(const RunResult& r, ClassifierKind clf, FeatureSetKind fs) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [k, c] : r.cells)
        if (k.classifier == clf && k.feature_set == fs) {
            sum += c.overall.accuracy;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : std::nan("");
}

}  // namespace

int main() {
    filter_correctness();
    oracle_equivalence();
    regression_examples();

    // The full default run feeds criteria 4, 5 and 8.
    const SynthConfig synth;  // 6 participants, seed 42
    const StudyCorpus corpus = generate_corpus(synth);
    ExperimentConfig full;
    full.jobs = 0;
    const auto t0 = Clock::now();
    const RunResult run = cross_context_eval(corpus, full);
    const double full_s = seconds_since(t0);
    const AggregateReport agg = aggregate(run);

    {
        const auto sweep = window_sweep();
        bool lengths = sweep.size() == 11;
        for (std::size_t i = 0; lengths && i < sweep.size(); ++i)
            lengths = sweep[i].length_ms == 100 + 50 * static_cast<int>(i) && sweep[i].stride_ms == sweep[i].length_ms;
        emorec_test::TempDir dir;
        export_report(agg, run, dir.path());
        std::istringstream table(slurp(dir.path() / "accuracy_vs_window.csv"));
        std::string line;
        std::getline(table, line);
        std::map<std::string, int> rows;
        while (std::getline(table, line)) ++rows[line.substr(0, line.find(',', line.find(',') + 1))];
        bool shape = rows.size() == full.classifiers.size() * full.feature_sets.size();
        std::string counts;
        for (const auto& [model, n] : rows) {
            shape = shape && n == 11;
            counts += " " + model + "=" + std::to_string(n);
        }
        report(4, "sweep shape", lengths && shape,
               fmt("window_sweep 100..600 step 50 (%zu lengths); accuracy table rows per model:%s", sweep.size(),
                   counts.c_str()));
    }

    {
        const double knn_sel = mean_accuracy(run, ClassifierKind::KNN3, FeatureSetKind::Selected);
        ExperimentConfig quiet_cfg;
        quiet_cfg.classifiers = {ClassifierKind::KNN3};
        quiet_cfg.feature_sets = {FeatureSetKind::Selected};
        quiet_cfg.repeats = 1;  // KNN3 ignores the seed
        quiet_cfg.jobs = 0;
        const RunResult quiet = cross_context_eval(generate_corpus(synth.noiseless()), quiet_cfg);
        double lowest = 1.0;
        for (const auto& [k, c] : quiet.cells) lowest = std::min(lowest, c.overall.accuracy);
        const bool ok = knn_sel >= 0.90 && !quiet.cells.empty() && lowest == 1.0 && full_s < 600.0 &&
                        run.cells.size() == 6u * 11 * 3 * 2 * 10;
        report(5, "synthetic generalization", ok,
               fmt("KNN3+SELECTED mean accuracy %.4f (>=0.90); noiseless min cell accuracy %.6f over %zu cells (==1); "
                   "full sweep %zu cells in %.1f s (<600 s)",
                   knn_sel, lowest, quiet.cells.size(), run.cells.size(), full_s));
    }

    {
        StudyCorpus perturbed = corpus;
        ExperimentConfig cfg;
        cfg.window_specs = {WindowSpec::non_overlapping(100), WindowSpec::non_overlapping(350),
                            WindowSpec::non_overlapping(600)};
        cfg.repeats = 2;
        cfg.keep_models = true;
        cfg.jobs = 0;
        const RunResult before = cross_context_eval(corpus, cfg);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> offset(-10.0, 10.0);
        for (auto& rec : perturbed.recordings)
            if (rec.scenario == Scenario::S_EA)
                for (auto& [c, ts] : rec.channels)
                    for (auto& v : ts.samples) v += offset(rng);
        const RunResult after = cross_context_eval(perturbed, cfg);
        std::size_t same = 0;
        for (const auto& [k, text] : before.models) {
            auto it = after.models.find(k);
            same += it != after.models.end() && it->second == text;
        }
        const bool ok = !before.models.empty() && same == before.models.size() &&
                        after.models.size() == before.models.size() && before.cells != after.cells;
        report(6, "no leakage", ok,
               fmt("%zu/%zu serialized models bit-identical after offsetting every S_EA sample; test metrics changed: %s",
                   same, before.models.size(), before.cells != after.cells ? "yes" : "no"));
    }

    {
        ExperimentConfig cfg;
        cfg.window_specs = {WindowSpec::non_overlapping(150), WindowSpec::non_overlapping(400)};
        cfg.repeats = 3;
        emorec_test::TempDir a, b;
        std::uint64_t hash = content_hash(corpus);
        for (const auto& [dir, jobs] : {std::pair{&a, 1}, std::pair{&b, 0}}) {
            cfg.jobs = jobs;
            const RunResult r = cross_context_eval(generate_corpus(synth), cfg);
            export_report(aggregate(r), r, dir->path());
            write_manifest(dir->path(), cfg, hash, r);
        }
        // the full run's tables, exported twice, also have to match
        emorec_test::TempDir c, d;
        export_report(agg, run, c.path());
        export_report(aggregate(run), run, d.path());
        std::size_t files = 0, identical = 0;
        for (const auto& [x, y] : {std::pair{&a, &b}, std::pair{&c, &d}})
            for (const auto& e : std::filesystem::directory_iterator(x->path())) {
                ++files;
                identical += slurp(e.path()) == slurp(y->path() / e.path().filename());
            }
        report(7, "determinism", files == 11 && identical == files,
               fmt("%zu/%zu report files and manifests byte-identical across two runs (1 vs all threads) "
                   "and two exports of the full run",
                   identical, files));
    }

    {
        std::size_t keys = 0, good = 0;
        for (const auto& [k, c] : run.cells) {
            ++keys;
            Confusion sum{};
            for (const auto& [a, m] : c.per_activity)
                for (std::size_t i = 0; i < kEmotionCount; ++i)
                    for (std::size_t j = 0; j < kEmotionCount; ++j) sum[i][j] += m.confusion[i][j];
            good += sum == c.overall.confusion;
        }
        report(8, "partition identity", keys > 0 && good == keys,
               fmt("per-activity confusions sum to the overall matrix for %zu/%zu result keys", good, keys));
    }

    return failures == 0 ? 0 : 1;
}
