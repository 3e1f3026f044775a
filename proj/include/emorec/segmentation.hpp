#pragma once

#include "emorec/datamodel.hpp"

#include <map>
#include <span>
#include <vector>

namespace emorec {

struct WindowSpec {
    int length_ms = 100;
    int stride_ms = 100;

    static WindowSpec non_overlapping(int length_ms) { return {length_ms, length_ms}; }
    bool operator==(const WindowSpec&) const = default;
};

/// One channel's slice of a labeled segment.
struct Window {
    ChannelKind channel = ChannelKind::EMG_RAW;
    std::vector<double> samples;
    EmotionLabel emotion = EmotionLabel::NEUTRAL;
    ActivityLabel activity = ActivityLabel::SITTING;
    std::string participant_id;
    Scenario scenario = Scenario::S_E;
    std::size_t segment_index = 0;
    std::size_t window_index = 0;
    double start_s = 0.0;  // time of the first sample
};

/// round(length_ms * fs / 1000); throws InvalidArgument("window shorter than
/// 2 samples") when that is below 2.
std::size_t window_samples(int length_ms, double fs_hz);
/// round(stride_ms * fs / 1000), at least 1.
std::size_t stride_samples(int stride_ms, double fs_hz);

/// Fully contained windows of one channel of a segment, starting at sample
/// offsets 0, stride, 2 * stride, ... A channel missing from the segment or
/// shorter than one window yields no windows.
std::vector<Window> segment(const LabeledSegment& seg, ChannelKind channel, const WindowSpec& spec);

/// Window lengths 100, 150, ..., 600 ms, non-overlapping.
std::vector<WindowSpec> window_sweep();

/// Time-aligned windows of several channels; the feature extraction unit.
struct WindowGroup {
    std::string participant_id;
    Scenario scenario = Scenario::S_E;
    std::size_t segment_index = 0;
    std::size_t window_index = 0;
    double start_s = 0.0;
    EmotionLabel emotion = EmotionLabel::NEUTRAL;
    ActivityLabel activity = ActivityLabel::SITTING;
    std::map<ChannelKind, Window> windows;

    bool has(ChannelKind c) const { return windows.count(c) != 0; }
};

/// Joins per-channel windows of one segment by start time. The channel with
/// the fewest windows leads; every other channel contributes its window whose
/// start is nearest and within `tolerance_s` (each window used at most once).
/// Groups lacking any channel in `required` are dropped; group window_index
/// counts the surviving groups from 0.
std::vector<WindowGroup> align_windows(const std::map<ChannelKind, std::vector<Window>>& per_channel,
                                       std::span<const ChannelKind> required, double tolerance_s);

}  // namespace emorec
