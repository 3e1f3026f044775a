#include "emorec/segmentation.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emorec {

std::size_t window_samples(int length_ms, double fs_hz) {
    if (length_ms < 1) throw InvalidArgument("window length must be positive");
    const double n = std::round(length_ms * fs_hz / 1000.0);
    if (n < 2.0)
        throw InvalidArgument("window shorter than 2 samples (" + std::to_string(length_ms) + " ms at " +
                              format_double(fs_hz) + " Hz)");
    return static_cast<std::size_t>(n);
}

std::size_t stride_samples(int stride_ms, double fs_hz) {
    if (stride_ms < 1) throw InvalidArgument("window stride must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::round(stride_ms * fs_hz / 1000.0)));
}

std::vector<Window> segment(const LabeledSegment& seg, ChannelKind channel, const WindowSpec& spec) {
    const auto it = seg.channels.find(channel);
    if (it == seg.channels.end()) return {};
    const TimeSeries& ts = it->second;
    const std::size_t n = window_samples(spec.length_ms, ts.fs_hz);
    const std::size_t stride = stride_samples(spec.stride_ms, ts.fs_hz);

    std::vector<Window> out;
    if (ts.samples.size() < n) return out;
    out.reserve((ts.samples.size() - n) / stride + 1);
    for (std::size_t off = 0; off + n <= ts.samples.size(); off += stride) {
        Window w;
        w.channel = channel;
        w.samples.assign(ts.samples.begin() + static_cast<std::ptrdiff_t>(off),
                         ts.samples.begin() + static_cast<std::ptrdiff_t>(off + n));
        w.emotion = seg.emotion;
        w.activity = seg.activity;
        w.participant_id = seg.participant_id;
        w.scenario = seg.scenario;
        w.segment_index = seg.index;
        w.window_index = out.size();
        w.start_s = ts.time_at(off);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<WindowSpec> window_sweep() {
    std::vector<WindowSpec> out;
    for (int ms = 100; ms <= 600; ms += 50) out.push_back(WindowSpec::non_overlapping(ms));
    return out;
}

std::vector<WindowGroup> align_windows(const std::map<ChannelKind, std::vector<Window>>& per_channel,
                                       std::span<const ChannelKind> required, double tolerance_s) {
    for (ChannelKind c : required) {
        auto it = per_channel.find(c);
        if (it == per_channel.end() || it->second.empty()) return {};
    }
    if (per_channel.empty()) return {};

    // Lead with the sparsest channel; ties go to the lowest channel kind.
    auto lead = per_channel.begin();
    for (auto it = per_channel.begin(); it != per_channel.end(); ++it)
        if (it->second.size() < lead->second.size()) lead = it;

    std::map<ChannelKind, std::vector<bool>> used;
    for (const auto& [c, ws] : per_channel) used[c].assign(ws.size(), false);

    std::vector<WindowGroup> groups;
    for (const Window& anchor : lead->second) {
        WindowGroup g;
        g.participant_id = anchor.participant_id;
        g.scenario = anchor.scenario;
        g.segment_index = anchor.segment_index;
        g.start_s = anchor.start_s;
        g.emotion = anchor.emotion;
        g.activity = anchor.activity;
        g.windows.emplace(lead->first, anchor);

        std::vector<std::pair<ChannelKind, std::size_t>> picks;
        for (const auto& [c, ws] : per_channel) {
            if (c == lead->first || ws.empty()) continue;
            // Windows are sorted by start time.
            auto pos = std::lower_bound(ws.begin(), ws.end(), anchor.start_s,
                                        [](const Window& w, double t) { return w.start_s < t; });
            std::size_t best = ws.size();
            double best_dist = std::numeric_limits<double>::infinity();
            for (auto cand : {pos, pos == ws.begin() ? pos : std::prev(pos)}) {
                if (cand == ws.end()) continue;
                const auto idx = static_cast<std::size_t>(cand - ws.begin());
                const double d = std::abs(cand->start_s - anchor.start_s);
                if (!used[c][idx] && d <= tolerance_s && (d < best_dist || (d == best_dist && idx < best))) {
                    best = idx;
                    best_dist = d;
                }
            }
            if (best < ws.size()) picks.emplace_back(c, best);
        }

        bool complete = true;
        for (ChannelKind c : required) {
            if (c == lead->first) continue;
            if (std::none_of(picks.begin(), picks.end(), [c](const auto& p) { return p.first == c; })) complete = false;
        }
        if (!complete) continue;
        for (const auto& [c, idx] : picks) {
            used[c][idx] = true;
            g.windows.emplace(c, per_channel.at(c)[idx]);
        }
        g.window_index = groups.size();
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace emorec
