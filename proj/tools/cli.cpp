#include "cli.hpp"

#include "emorec/dsp.hpp"
#include "emorec/error.hpp"
#include "emorec/protocol.hpp"
#include "emorec/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>

namespace emorec::cli {

namespace {

namespace fs = std::filesystem;

/// Thrown for bad flag values found after CLI11 parsing succeeded.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthFlags {
    int participants = 6;
    std::uint64_t seed = 42;
    std::string out;
    double noise = 1.0;
    double interference = 1.0;
    double trial_s = 120.0;
    double segment_s = 20.0;
    double rest_s = 60.0;
};

struct RunFlags {
    std::string corpus;
    std::string out;
    std::vector<std::string> classifiers{"knn", "dt", "rf"};
    std::vector<std::string> features{"all", "selected"};
    std::vector<int> windows;
    int stride_ms = 0;
    int repeats = 10;
    std::uint64_t seed = 42;
    std::string filter_mode = "zero-phase";
    std::vector<std::string> required{"BVP", "ST", "EMG_H", "EMG_L"};
    double analysis_fs = 0.0;
    double boundary_guard = 8.0;
    int trees = 100;
    int max_features = 0;
    int min_split = 2;
    int jobs = 1;
    bool save_models = false;
};

struct InspectFlags {
    std::string recording;
    std::string dump_filtered;
    std::string filter_mode = "zero-phase";
    std::string out;
};

struct FilterFlags {
    std::string kind = "lowpass";
    int order = 4;
    double cutoff = 5.0;
    double fs = 1000.0;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
    SynthConfig cfg;
    cfg.n_participants = f.participants;
    cfg.seed = f.seed;
    cfg.noise_sigma = f.noise;
    cfg.trial_duration_s = f.trial_s;
    cfg.activity_segment_s = f.segment_s;
    cfg.rest_s = f.rest_s;
    for (auto& v : cfg.interference.motion) v *= f.interference;
    for (auto& v : cfg.interference.wander) v *= f.interference;
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const StudyCorpus corpus = generate_corpus(cfg);
    save_corpus(corpus, f.out);
    out << "recordings " << corpus.recordings.size() << '\n';
    out << "corpus_hash " << hex64(content_hash(corpus)) << '\n';
    return kExitOk;
}

ExperimentConfig experiment_config(const RunFlags& f) {
    ExperimentConfig cfg;
    cfg.classifiers.clear();
    for (const auto& name : f.classifiers) {
        auto k = parse_classifier(name);
        if (!k) throw UsageError("unknown classifier `" + name + "`");
        cfg.classifiers.push_back(*k);
    }
    cfg.feature_sets.clear();
    for (const auto& name : f.features) {
        auto k = parse_feature_set(name);
        if (!k) throw UsageError("unknown feature set `" + name + "`");
        cfg.feature_sets.push_back(*k);
    }
    if (!f.windows.empty()) {
        cfg.window_specs.clear();
        for (int w : f.windows) cfg.window_specs.push_back({w, f.stride_ms > 0 ? f.stride_ms : w});
    } else if (f.stride_ms > 0) {
        for (auto& w : cfg.window_specs) w.stride_ms = f.stride_ms;
    }
    cfg.repeats = f.repeats;
    cfg.base_seed = f.seed;
    auto mode = parse_filter_mode(f.filter_mode);
    if (!mode) throw UsageError("unknown filter mode `" + f.filter_mode + "`");
    cfg.filter_mode = *mode;
    cfg.required_channels.clear();
    for (const auto& name : f.required) {
        auto c = parse_channel(name);
        if (!c) throw UsageError("unknown channel `" + name + "`");
        cfg.required_channels.push_back(*c);
    }
    cfg.analysis_fs_hz = f.analysis_fs;
    cfg.boundary_guard_s = f.boundary_guard;
    cfg.train_options.rf_trees = f.trees;
    cfg.train_options.rf_max_features = f.max_features;
    cfg.train_options.min_samples_split = f.min_split;
    cfg.jobs = f.jobs;
    cfg.keep_models = f.save_models;
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

int cmd_run(const RunFlags& f, int verbosity, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = experiment_config(f);
    if (!fs::is_directory(f.corpus)) throw Error("corpus directory " + f.corpus + " does not exist");
    const auto t0 = std::chrono::steady_clock::now();
    const StudyCorpus corpus = load_corpus(f.corpus);
    std::function<void(std::string_view)> log;
    if (verbosity > 0) log = [&err](std::string_view line) { err << line << '\n'; };
    const RunResult result = cross_context_eval(corpus, cfg, log);
    const AggregateReport report = aggregate(result);
    const auto files = export_report(report, result, f.out);
    write_manifest(f.out, cfg, content_hash(corpus), result);
    if (f.save_models) {
        const fs::path dir = fs::path(f.out) / "models";
        fs::create_directories(dir);
        for (const auto& [k, text] : result.models) {
            const auto name = k.participant_id + "_" + std::string(to_string(k.classifier)) + "_" +
                              std::string(to_string(k.feature_set)) + "_" + std::to_string(k.window_ms) + "_" +
                              std::to_string(k.repeat) + ".model";
            std::ofstream m(dir / name, std::ios::binary);
            m << text;
            if (!m) throw Error("cannot write " + (dir / name).string());
        }
    }

    out << "cells " << result.cells.size() << ", skips " << result.skips.size() << '\n';
    for (const auto& [mk, rows] : report.accuracy_vs_window) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [w, r] : rows)
            if (r.n > 0) {
                sum += r.mean;
                ++n;
            }
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-5s %-9s mean accuracy %.4f\n", std::string(to_string(mk.first)).c_str(),
                      std::string(to_string(mk.second)).c_str(), n ? sum / static_cast<double>(n) : 0.0);
        out << buf;
    }
    for (const auto& p : files) out << "wrote " << p.string() << '\n';
    out << "wrote " << (fs::path(f.out) / kManifestFile).string() << '\n';
    if (verbosity > 0) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        err << "elapsed " << dt.count() << " s\n";
    }
    return kExitOk;
}

int cmd_inspect(const InspectFlags& f, std::ostream& out) {
    if (!fs::is_directory(f.recording)) throw Error("recording directory " + f.recording + " does not exist");
    const Recording rec = load_recording(f.recording);
    out << "participant " << rec.participant_id << "\nscenario " << to_string(rec.scenario) << '\n';
    out << "channels\n";
    char buf[256];
    for (const auto& [c, ts] : rec.channels) {
        std::snprintf(buf, sizeof buf, "  %-8s fs=%g Hz  samples=%zu  duration=%g s  units=%s\n",
                      std::string(to_string(c)).c_str(), ts.fs_hz, ts.size(),
                      static_cast<double>(ts.size()) / ts.fs_hz, ts.units.c_str());
        out << buf;
    }
    out << "emotion annotations\n";
    for (const auto& a : rec.emotion_annotations)
        out << "  " << format_double(a.start_s) << ' ' << format_double(a.end_s) << ' ' << to_string(a.label) << '\n';
    out << "activity annotations\n";
    for (const auto& a : rec.activity_annotations)
        out << "  " << format_double(a.start_s) << ' ' << format_double(a.end_s) << ' ' << to_string(a.label) << '\n';
    const auto segments = slice_by_labels(rec);
    out << "intersections " << segments.size() << '\n';
    for (const auto& s : segments)
        out << "  " << s.index << ' ' << format_double(s.start_s) << ' ' << format_double(s.end_s) << ' '
            << to_string(s.emotion) << ' ' << to_string(s.activity) << '\n';

    if (f.dump_filtered.empty()) return kExitOk;
    const auto channel = parse_channel(f.dump_filtered);
    if (!channel) throw UsageError("unknown channel `" + f.dump_filtered + "`");
    const auto mode = parse_filter_mode(f.filter_mode);
    if (!mode) throw UsageError("unknown filter mode `" + f.filter_mode + "`");
    const ChannelPipeline* route = nullptr;
    for (const auto& r : routing_table())
        if (r.output == *channel) route = &r;
    if (route == nullptr) throw UsageError("no preprocessing route produces " + f.dump_filtered);
    const auto in = rec.channels.find(route->input);
    if (in == rec.channels.end())
        throw Error("recording has no " + std::string(to_string(route->input)) + " channel");
    const TimeSeries filtered = run_pipeline(*route, in->second, *mode);

    std::ofstream file;
    std::ostream* dst = &out;
    if (!f.out.empty()) {
        fs::create_directories(f.out);
        const auto path = fs::path(f.out) / (std::string(to_string(*channel)) + "_filtered.csv");
        file.open(path, std::ios::binary);
        if (!file) throw Error("cannot write " + path.string());
        dst = &file;
    }
    *dst << "sample_index,value\n";
    for (std::size_t i = 0; i < filtered.size(); ++i) *dst << i << ',' << format_double(filtered.samples[i]) << '\n';
    if (!*dst) throw Error("failed writing filtered signal");
    return kExitOk;
}

int cmd_filter(const FilterFlags& f, std::ostream& out) {
    FilterSpec spec;
    if (f.kind == "lowpass" || f.kind == "lp") {
        spec.kind = FilterKind::LowPass;
    } else if (f.kind == "highpass" || f.kind == "hp") {
        spec.kind = FilterKind::HighPass;
    } else {
        throw UsageError("unknown filter kind `" + f.kind + "`");
    }
    spec.order = f.order;
    spec.cutoff_hz = f.cutoff;
    spec.fs_hz = f.fs;
    IIRFilter filter;
    try {
        filter = design_butterworth(spec);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    out << dump_sections(filter);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Activity-robust emotion recognition from physiological signals"};
    app.name("emorec");
    app.require_subcommand(1);
    app.fallthrough();
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "Progress output on stderr (repeatable)");
    // CLI11 only reads config files attached to the top-level app; values for a
    // subcommand go under its section, e.g. [run]. Command-line flags win.
    app.set_config("--config", "", "INI/TOML file; subcommand flags go under [run], [synth], ...");

    SynthFlags sf;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic study corpus");
    synth->add_option("--participants", sf.participants, "Number of participants")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--seed", sf.seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", sf.out, "Corpus directory to write")->required();
    synth->add_option("--noise", sf.noise, "Scale on white-noise levels")->check(CLI::NonNegativeNumber)->capture_default_str();
    synth->add_option("--interference", sf.interference, "Scale on activity interference")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--trial-s", sf.trial_s, "S_E emotion block length in seconds")->capture_default_str();
    synth->add_option("--segment-s", sf.segment_s, "S_EA activity segment length in seconds")->capture_default_str();
    synth->add_option("--rest-s", sf.rest_s, "Unlabeled sitting rest between S_EA trials in seconds")
        ->capture_default_str();

    RunFlags rf;
    auto* runc = app.add_subcommand("run", "Train on S_E sitting, test on S_EA, write report tables");
    runc->add_option("--corpus", rf.corpus, "Corpus directory")->required();
    runc->add_option("--out", rf.out, "Report directory")->required();
    runc->add_option("--classifiers", rf.classifiers, "knn, dt, rf")->delimiter(',')->capture_default_str();
    runc->add_option("--features", rf.features, "all, selected")->delimiter(',')->capture_default_str();
    runc->add_option("--windows", rf.windows, "Window lengths in ms (default 100..600 step 50)")->delimiter(',');
    runc->add_option("--stride-ms", rf.stride_ms, "Window stride in ms; 0 = window length")->capture_default_str();
    runc->add_option("--repeats", rf.repeats, "Repeats per cell")->check(CLI::PositiveNumber)->capture_default_str();
    runc->add_option("--seed", rf.seed, "Base seed")->capture_default_str();
    runc->add_option("--filter-mode", rf.filter_mode, "zero-phase or causal")->capture_default_str();
    runc->add_option("--required-channels", rf.required, "Channels every participant must have")
        ->delimiter(',')
        ->capture_default_str();
    runc->add_option("--analysis-fs", rf.analysis_fs, "Common resampling rate in Hz; 0 = highest channel rate")
        ->capture_default_str();
    runc->add_option("--boundary-guard", rf.boundary_guard,
                     "Seconds trimmed from both ends of every emotion interval")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    runc->add_option("--trees", rf.trees, "Random forest size")->check(CLI::PositiveNumber)->capture_default_str();
    runc->add_option("--max-features", rf.max_features, "Features per forest split; 0 = ceil(sqrt(d))")
        ->capture_default_str();
    runc->add_option("--min-split", rf.min_split, "Smallest node the trees may split")->capture_default_str();
    runc->add_option("--jobs", rf.jobs, "Worker threads; 0 = all cores")->capture_default_str();
    runc->add_flag("--save-models", rf.save_models, "Also write every trained model under <out>/models");

    InspectFlags inf;
    auto* inspect = app.add_subcommand("inspect", "Summarize one recording directory");
    inspect->add_option("--recording", inf.recording, "Recording directory")->required();
    inspect->add_option("--dump-filtered", inf.dump_filtered, "Write the preprocessed channel as CSV");
    inspect->add_option("--filter-mode", inf.filter_mode, "zero-phase or causal")->capture_default_str();
    inspect->add_option("--out", inf.out, "Directory for the dump; stdout when omitted");

    FilterFlags ff;
    auto* filt = app.add_subcommand("filter-dump", "Print Butterworth second-order sections");
    filt->add_option("--kind", ff.kind, "lowpass or highpass")->capture_default_str();
    filt->add_option("--order", ff.order, "Filter order")->capture_default_str();
    filt->add_option("--cutoff", ff.cutoff, "Cutoff in Hz")->capture_default_str();
    filt->add_option("--fs", ff.fs, "Sampling rate in Hz")->capture_default_str();

    std::vector<const char*> argv{"emorec"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*synth) return cmd_synth(sf, out);
        if (*runc) return cmd_run(rf, verbosity, out, err);
        if (*inspect) return cmd_inspect(inf, out);
        if (*filt) return cmd_filter(ff, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace emorec::cli
