#include "emorec/protocol.hpp"

#include "emorec/error.hpp"
#include "emorec/seeding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace emorec {

void ExperimentConfig::validate() const {
    if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
    if (window_specs.empty()) throw InvalidArgument("no window specs");
    if (classifiers.empty()) throw InvalidArgument("no classifiers");
    if (feature_sets.empty()) throw InvalidArgument("no feature sets");
    for (const auto& w : window_specs)
        if (w.length_ms <= 0 || w.stride_ms <= 0) throw InvalidArgument("window length and stride must be positive");
    if (!(analysis_fs_hz >= 0.0) || !std::isfinite(analysis_fs_hz))
        throw InvalidArgument("analysis rate must be >= 0");
    if (!(boundary_guard_s >= 0.0) || !std::isfinite(boundary_guard_s))
        throw InvalidArgument("boundary guard must be >= 0");
    if (jobs < 0) throw InvalidArgument("jobs must be >= 0");
    if (train_options.knn_k < 1) throw InvalidArgument("knn k must be >= 1");
    if (train_options.rf_trees < 1) throw InvalidArgument("forest needs at least one tree");
    if (train_options.min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
    if (train_options.rf_max_features < 0) throw InvalidArgument("rf_max_features must be >= 0");
}

std::uint64_t repeat_seed(std::uint64_t base_seed, std::string_view participant_id, ClassifierKind classifier,
                          int window_ms, int repeat) {
    return mix_seed({base_seed, hash_string(participant_id), static_cast<std::uint64_t>(classifier),
                     static_cast<std::uint64_t>(window_ms), static_cast<std::uint64_t>(repeat)});
}

namespace {

/// Filters every channel of a whole recording except for the normalization
/// step, which is deferred to the labeled segments.
Recording filter_recording(const Recording& rec, FilterMode mode, std::set<ChannelKind>& normalize_later) {
    Recording out;
    out.participant_id = rec.participant_id;
    out.scenario = rec.scenario;
    out.emotion_annotations = rec.emotion_annotations;
    out.activity_annotations = rec.activity_annotations;
    for (const auto& [kind, ts] : rec.channels) {
        bool routed = false;
        for (const auto& route : routing_table()) {
            if (route.input != kind) continue;
            routed = true;
            ChannelPipeline filtering{route.input, route.output, {}};
            for (const auto& step : route.steps) {
                if (std::holds_alternative<NormalizeStep>(step))
                    normalize_later.insert(route.output);
                else
                    filtering.steps.push_back(step);
            }
            out.channels.insert_or_assign(route.output, run_pipeline(filtering, ts, mode));
        }
        if (!routed) throw InvalidArgument("no preprocessing route for channel " + std::string(to_string(kind)));
    }
    return out;
}

/// Finishes one labeled segment of a filtered recording: per-segment
/// normalization, then resampling to the analysis rate.
LabeledSegment finish_segment(LabeledSegment seg, const std::set<ChannelKind>& normalize, double fs) {
    for (auto& [c, ts] : seg.channels) {
        if (normalize.count(c)) ts = normalize_percentage(ts);
        ts = resample_linear(ts, fs);
    }
    return seg;
}

/// Shrinks every emotion interval by `guard` seconds at both ends, dropping
/// intervals that vanish.
Recording guarded(Recording rec, double guard) {
    if (guard <= 0.0) return rec;
    std::vector<EmotionInterval> kept;
    for (const auto& e : rec.emotion_annotations)
        if (e.end_s - e.start_s > 2.0 * guard) kept.push_back({e.start_s + guard, e.end_s - guard, e.label});
    rec.emotion_annotations = std::move(kept);
    return rec;
}

std::set<ChannelKind> preprocessed_kinds(const Recording& rec) {
    std::set<ChannelKind> out;
    for (const auto& [c, ts] : rec.channels)
        for (const auto& route : routing_table())
            if (route.input == c) out.insert(route.output);
    return out;
}

std::vector<WindowGroup> groups_of(const LabeledSegment& seg, const WindowSpec& spec,
                                   std::span<const ChannelKind> channels) {
    std::map<ChannelKind, std::vector<Window>> per_channel;
    for (ChannelKind c : channels) per_channel.emplace(c, segment(seg, c, spec));
    // A little over half a stride, so neighbouring windows never compete.
    const double tolerance = 0.5 * spec.stride_ms / 1000.0 + 1e-9;
    return align_windows(per_channel, channels, tolerance);
}

}  // namespace

ParticipantData::ParticipantData(const StudyCorpus& corpus, const std::string& participant_id,
                                 const ExperimentConfig& config)
    : participant_id_(participant_id) {
    const Recording* se = corpus.find(participant_id, Scenario::S_E);
    const Recording* sea = corpus.find(participant_id, Scenario::S_EA);
    if (se == nullptr) throw Error("participant " + participant_id + " has no S_E recording");
    if (sea == nullptr) throw Error("participant " + participant_id + " has no S_EA recording");

    const auto se_kinds = preprocessed_kinds(*se);
    const auto sea_kinds = preprocessed_kinds(*sea);
    for (ChannelKind c : config.required_channels) {
        if (!se_kinds.count(c))
            throw Error("participant " + participant_id + " S_E lacks required channel " + std::string(to_string(c)));
        if (!sea_kinds.count(c))
            throw Error("participant " + participant_id + " S_EA lacks required channel " + std::string(to_string(c)));
    }
    std::set_intersection(se_kinds.begin(), se_kinds.end(), sea_kinds.begin(), sea_kinds.end(),
                          std::back_inserter(channels_));

    fs_ = config.analysis_fs_hz;
    if (fs_ == 0.0)
        for (const Recording* rec : {se, sea})
            for (const auto& [c, ts] : rec->channels) fs_ = std::max(fs_, ts.fs_hz);

    // Filtering runs over whole recordings; nothing crosses from S_EA into
    // S_E because they are separate recordings.
    std::set<ChannelKind> normalize;
    const Recording se_filtered = guarded(filter_recording(*se, config.filter_mode, normalize), config.boundary_guard_s);
    const Recording sea_filtered =
        guarded(filter_recording(*sea, config.filter_mode, normalize), config.boundary_guard_s);
    for (auto& seg : slice_by_labels(se_filtered))
        if (seg.activity == ActivityLabel::SITTING)
            train_segments_.push_back(finish_segment(std::move(seg), normalize, fs_));
    for (auto& seg : slice_by_labels(sea_filtered))
        test_segments_.push_back(finish_segment(std::move(seg), normalize, fs_));
}

std::map<FeatureSetKind, InstanceSplit> ParticipantData::instances(
    const WindowSpec& spec, std::span<const FeatureSetKind> feature_sets) const {
    (void)window_samples(spec.length_ms, fs_);  // throws for too-short windows

    std::map<FeatureSetKind, InstanceSplit> out;
    std::map<FeatureSetKind, std::vector<ChannelKind>> feature_channels_of;
    for (FeatureSetKind kind : feature_sets) {
        auto& split = out[kind];
        auto& fc = feature_channels_of[kind];
        if (kind == FeatureSetKind::All) {
            fc = channels_;
        } else {
            fc.assign(kSelectedChannels.begin(), kSelectedChannels.end());
            for (ChannelKind c : fc)
                if (std::find(channels_.begin(), channels_.end(), c) == channels_.end())
                    throw Error("participant " + participant_id_ + " lacks channel " + std::string(to_string(c)) +
                                " needed by the selected feature set");
        }
        split.feature_names = feature_names(kind, fc);
    }

    auto collect = [&](const std::vector<LabeledSegment>& segments, bool training) {
        for (const auto& seg : segments) {
            const auto groups = groups_of(seg, spec, channels_);
            for (const auto& g : groups) {
                for (FeatureSetKind kind : feature_sets) {
                    auto& split = out[kind];
                    Instance inst;
                    extract_values(g, kind, feature_channels_of.at(kind), inst.features);
                    inst.label = g.emotion;
                    inst.meta.participant_id = g.participant_id;
                    inst.meta.activity = g.activity;
                    inst.meta.window_index = (training ? split.train.size() : split.test.size());
                    (training ? split.train : split.test).push_back(std::move(inst));
                }
            }
        }
    };
    collect(train_segments_, true);
    collect(test_segments_, false);
    return out;
}

namespace {

struct Task {
    std::string participant;
    std::size_t participant_index;
    WindowSpec spec;
};

struct TaskOutput {
    std::map<ResultKey, CellResult> cells;
    std::map<ResultKey, std::string> models;
    std::vector<Skip> skips;
};

bool seed_independent(ClassifierKind kind) { return kind == ClassifierKind::KNN3 || kind == ClassifierKind::DT; }

CellResult evaluate_model(const TrainedModel& model, const InstanceSplit& split) {
    CellResult cell;
    std::map<ActivityLabel, Confusion> per_activity;
    Confusion overall{};
    for (const auto& inst : split.test) {
        const EmotionLabel p = model.predict(inst.features);
        const auto t = static_cast<std::size_t>(inst.label);
        const auto q = static_cast<std::size_t>(p);
        ++overall[t][q];
        ++per_activity[inst.meta.activity][t][q];
    }
    cell.overall = metrics_from_confusion(overall);
    for (const auto& [a, conf] : per_activity) cell.per_activity.emplace(a, metrics_from_confusion(conf));
    cell.n_train = split.train.size();
    cell.n_test = split.test.size();
    return cell;
}

std::string skip_reason(const InstanceSplit& split) {
    if (split.train.empty()) return "no training windows";
    if (split.test.empty()) return "no test windows";
    const EmotionLabel first = split.train.front().label;
    if (std::all_of(split.train.begin(), split.train.end(), [first](const Instance& i) { return i.label == first; }))
        return "single-class training set";
    return {};
}

TaskOutput run_task(const ParticipantData& data, const WindowSpec& spec, const ExperimentConfig& config) {
    TaskOutput out;
    std::map<FeatureSetKind, InstanceSplit> splits;
    try {
        splits = data.instances(spec, config.feature_sets);
    } catch (const InvalidArgument& e) {
        for (FeatureSetKind fs : config.feature_sets)
            out.skips.push_back({data.participant_id(), fs, spec.length_ms, e.what()});
        return out;
    }
    for (FeatureSetKind fs : config.feature_sets) {
        const InstanceSplit& split = splits.at(fs);
        if (auto reason = skip_reason(split); !reason.empty()) {
            out.skips.push_back({data.participant_id(), fs, spec.length_ms, std::move(reason)});
            continue;
        }
        for (ClassifierKind clf : config.classifiers) {
            std::optional<CellResult> first;
            std::string first_model;
            for (int r = 0; r < config.repeats; ++r) {
                const std::uint64_t seed = repeat_seed(config.base_seed, data.participant_id(), clf, spec.length_ms, r);
                ResultKey key{data.participant_id(), clf, fs, spec.length_ms, r};
                CellResult cell;
                std::string serialized;
                if (first && seed_independent(clf)) {
                    // The seed does not influence these classifiers; reuse the
                    // first repeat's model and metrics.
                    cell = *first;
                    serialized = first_model;
                } else {
                    const TrainedModel model = train(clf, split.train, seed, config.train_options);
                    cell = evaluate_model(model, split);
                    if (config.keep_models) serialized = model.serialize();
                    if (!first) {
                        first = cell;
                        first_model = serialized;
                    }
                }
                cell.seed = seed;
                out.cells.emplace(key, cell);
                if (config.keep_models) out.models.emplace(std::move(key), std::move(serialized));
            }
        }
    }
    return out;
}

}  // namespace

RunResult cross_context_eval(const StudyCorpus& corpus, const ExperimentConfig& config,
                             const std::function<void(std::string_view)>& log) {
    config.validate();
    validate(corpus);
    const auto participants = corpus.participants();
    if (participants.empty()) throw InvalidArgument("corpus has no recordings");

    std::vector<Task> tasks;
    for (std::size_t p = 0; p < participants.size(); ++p)
        for (const auto& spec : config.window_specs) tasks.push_back({participants[p], p, spec});

    unsigned workers = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                        : static_cast<unsigned>(config.jobs);
    workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));

    // Participants are prepared lazily by whichever worker first needs them
    // and released once their last task finishes.
    std::vector<std::shared_ptr<ParticipantData>> prepared(participants.size());
    std::vector<std::once_flag> once(participants.size());
    std::vector<std::exception_ptr> prep_error(participants.size());
    std::vector<std::atomic<std::size_t>> remaining(participants.size());
    for (auto& r : remaining) r = config.window_specs.size();

    std::vector<TaskOutput> outputs(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex mu;

    auto worker = [&] {
        while (!failed) {
            const std::size_t i = next++;
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            try {
                std::call_once(once[t.participant_index], [&] {
                    try {
                        prepared[t.participant_index] =
                            std::make_shared<ParticipantData>(corpus, t.participant, config);
                    } catch (...) {
                        prep_error[t.participant_index] = std::current_exception();
                    }
                });
                if (prep_error[t.participant_index]) std::rethrow_exception(prep_error[t.participant_index]);
                std::shared_ptr<ParticipantData> data;
                {
                    std::lock_guard lock(mu);
                    data = prepared[t.participant_index];
                }
                outputs[i] = run_task(*data, t.spec, config);
                if (--remaining[t.participant_index] == 0) {
                    std::lock_guard lock(mu);
                    prepared[t.participant_index].reset();
                }
                if (log) {
                    std::lock_guard lock(mu);
                    log(t.participant + " window " + std::to_string(t.spec.length_ms) + " ms: " +
                        std::to_string(outputs[i].cells.size()) + " cells, " +
                        std::to_string(outputs[i].skips.size()) + " skips");
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);

    RunResult result;
    for (auto& o : outputs) {
        result.cells.merge(o.cells);
        result.models.merge(o.models);
        result.skips.insert(result.skips.end(), o.skips.begin(), o.skips.end());
    }
    std::sort(result.skips.begin(), result.skips.end());
    return result;
}

}  // namespace emorec
