#pragma once

// Core types shared by every stage of the pipeline: channels, labels,
// recordings, labeled segments, plus on-disk I/O and resampling.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emorec {

enum class ChannelKind { EMG_RAW, EMG_H, EMG_L, EDA, ST, PZT, BVP };

inline constexpr std::array<ChannelKind, 7> kAllChannels{
    ChannelKind::EMG_RAW, ChannelKind::EMG_H, ChannelKind::EMG_L, ChannelKind::EDA,
    ChannelKind::ST,      ChannelKind::PZT,   ChannelKind::BVP};

std::string_view to_string(ChannelKind kind);
/// Case-insensitive; returns nullopt for unknown names.
std::optional<ChannelKind> parse_channel(std::string_view name);

/// Rate assumed when a sidecar does not declare one: 1000 Hz for the chest
/// kit channels, 64 Hz for wrist BVP.
double default_fs_hz(ChannelKind kind);
std::string_view default_units(ChannelKind kind);

enum class EmotionLabel { NEUTRAL, HPHA, HNHA };
inline constexpr std::size_t kEmotionCount = 3;
inline constexpr std::array<EmotionLabel, kEmotionCount> kAllEmotions{
    EmotionLabel::NEUTRAL, EmotionLabel::HPHA, EmotionLabel::HNHA};

std::string_view to_string(EmotionLabel label);
std::optional<EmotionLabel> parse_emotion(std::string_view name);

struct SamRange {
    double lo;
    double hi;
};

/// Self-Assessment Manikin rating ranges of the sound stimuli per category.
struct EmotionCategorySpec {
    EmotionLabel label;
    SamRange pleasure;
    SamRange arousal;
};

const std::array<EmotionCategorySpec, kEmotionCount>& emotion_categories();

/// Ordered by exertion: the enumerator value is the exertion rank.
enum class ActivityLabel { SITTING, STANDING, WALKING, WALKING_UPSTAIRS, WALKING_DOWNSTAIRS };
inline constexpr std::size_t kActivityCount = 5;
inline constexpr std::array<ActivityLabel, kActivityCount> kAllActivities{
    ActivityLabel::SITTING, ActivityLabel::STANDING, ActivityLabel::WALKING,
    ActivityLabel::WALKING_UPSTAIRS, ActivityLabel::WALKING_DOWNSTAIRS};

constexpr int exertion_rank(ActivityLabel a) noexcept { return static_cast<int>(a); }
std::string_view to_string(ActivityLabel label);
std::optional<ActivityLabel> parse_activity(std::string_view name);

enum class Scenario { S_A, S_E, S_EA };
std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

/// Uniformly sampled single channel. Sample i is taken at start_s + i / fs_hz
/// seconds from recording start.
struct TimeSeries {
    ChannelKind channel = ChannelKind::EMG_RAW;
    double fs_hz = 1.0;
    std::vector<double> samples;
    std::string units;
    double start_s = 0.0;

    std::size_t size() const noexcept { return samples.size(); }
    double time_at(std::size_t i) const noexcept { return start_s + static_cast<double>(i) / fs_hz; }
    /// Time span from the first to the last sample.
    double span_s() const noexcept {
        return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) / fs_hz;
    }
};

/// Throws InvalidArgument unless fs_hz > 0, samples non-empty and all finite.
void validate(const TimeSeries& ts);

/// Half-open [start_s, end_s) interval carrying one label.
template <class Label>
struct Interval {
    double start_s;
    double end_s;
    Label label;

    bool operator==(const Interval&) const = default;
};

using EmotionInterval = Interval<EmotionLabel>;
using ActivityInterval = Interval<ActivityLabel>;

struct Recording {
    std::string participant_id;
    Scenario scenario = Scenario::S_E;
    std::map<ChannelKind, TimeSeries> channels;
    std::vector<EmotionInterval> emotion_annotations;
    std::vector<ActivityInterval> activity_annotations;

    /// Latest annotation end, 0 without annotations.
    double annotated_duration_s() const;
};

/// Throws InvalidArgument on any broken Recording invariant: invalid channel,
/// bad or overlapping intervals, or an S_E recording whose emotion span is not
/// covered by SITTING activity annotations.
void validate(const Recording& rec);

struct StudyCorpus {
    std::vector<Recording> recordings;

    const Recording* find(std::string_view participant_id, Scenario scenario) const;
    /// Sorted, unique participant ids.
    std::vector<std::string> participants() const;
};

/// Throws InvalidArgument if a (participant, scenario) pair repeats.
void validate(const StudyCorpus& corpus);

/// The part of a recording lying inside one emotion interval and one activity
/// interval at the same time.
struct LabeledSegment {
    std::string participant_id;
    Scenario scenario = Scenario::S_E;
    std::size_t index = 0;  // position in slice order
    double start_s = 0.0;
    double end_s = 0.0;
    EmotionLabel emotion = EmotionLabel::NEUTRAL;
    ActivityLabel activity = ActivityLabel::SITTING;
    /// Channels with at least one sample inside [start_s, end_s).
    std::map<ChannelKind, TimeSeries> channels;
};

/// Intersects emotion and activity annotations and cuts every channel at the
/// intersection boundaries. Segments are returned in time order.
std::vector<LabeledSegment> slice_by_labels(const Recording& rec);

/// Piecewise-linear resampling onto the grid start_s + k / target_fs covering
/// the input's span. Resampling at the original rate returns the input.
TimeSeries resample_linear(const TimeSeries& ts, double target_fs);

// On-disk layout: one directory per recording holding `<CHANNEL>.csv` files
// (header `sample_index,value`) and a `recording.meta` key/value sidecar.
inline constexpr std::string_view kMetadataFile = "recording.meta";

Recording load_recording(const std::filesystem::path& dir);
void save_recording(const Recording& rec, const std::filesystem::path& dir);

/// A corpus directory holds one recording directory per (participant, scenario).
StudyCorpus load_corpus(const std::filesystem::path& dir);
void save_corpus(const StudyCorpus& corpus, const std::filesystem::path& dir);
std::string recording_dir_name(const Recording& rec);

/// Content hash over every field, including exact sample bits.
std::uint64_t content_hash(const Recording& rec);
std::uint64_t content_hash(const StudyCorpus& corpus);
std::string hex64(std::uint64_t value);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace emorec
