#include "emorec/datamodel.hpp"

#include "emorec/error.hpp"
#include "emorec/seeding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

namespace emorec {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::toupper(static_cast<unsigned char>(x)) ==
                      std::toupper(static_cast<unsigned char>(y));
           });
}

template <class Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view name, const std::array<Enum, N>& values) {
    for (Enum v : values)
        if (iequals(name, to_string(v))) return v;
    return std::nullopt;
}

template <class Label>
void check_intervals(const std::vector<Interval<Label>>& intervals, const char* what) {
    for (const auto& iv : intervals) {
        if (!std::isfinite(iv.start_s) || !std::isfinite(iv.end_s) || iv.start_s < 0.0 ||
            !(iv.start_s < iv.end_s))
            throw InvalidArgument(std::string(what) + " interval [" + format_double(iv.start_s) +
                                  ", " + format_double(iv.end_s) + ") is not a valid interval");
    }
    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start_s < sorted[i - 1].end_s)
            throw InvalidArgument(std::string("overlapping ") + what + " annotations at " +
                                  format_double(sorted[i].start_s) + " s");
    }
}

}  // namespace

std::string_view to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::EMG_RAW: return "EMG_RAW";
        case ChannelKind::EMG_H: return "EMG_H";
        case ChannelKind::EMG_L: return "EMG_L";
        case ChannelKind::EDA: return "EDA";
        case ChannelKind::ST: return "ST";
        case ChannelKind::PZT: return "PZT";
        case ChannelKind::BVP: return "BVP";
    }
    return "?";
}

std::optional<ChannelKind> parse_channel(std::string_view name) { return parse_enum(name, kAllChannels); }

double default_fs_hz(ChannelKind kind) { return kind == ChannelKind::BVP ? 64.0 : 1000.0; }

std::string_view default_units(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::EMG_RAW:
        case ChannelKind::EMG_H:
        case ChannelKind::EMG_L: return "microvolt";
        case ChannelKind::EDA: return "microsiemens";
        case ChannelKind::ST: return "celsius";
        case ChannelKind::PZT: return "percentage";
        case ChannelKind::BVP: return "arbitrary";
    }
    return "";
}

std::string_view to_string(EmotionLabel label) {
    switch (label) {
        case EmotionLabel::NEUTRAL: return "NEUTRAL";
        case EmotionLabel::HPHA: return "HPHA";
        case EmotionLabel::HNHA: return "HNHA";
    }
    return "?";
}

std::optional<EmotionLabel> parse_emotion(std::string_view name) { return parse_enum(name, kAllEmotions); }

const std::array<EmotionCategorySpec, kEmotionCount>& emotion_categories() {
    static const std::array<EmotionCategorySpec, kEmotionCount> specs{{
        {EmotionLabel::NEUTRAL, {4.18, 5.64}, {4.6, 5.48}},
        {EmotionLabel::HPHA, {6.06, 7.9}, {6.0, 7.54}},
        {EmotionLabel::HNHA, {1.57, 2.92}, {6.07, 8.16}},
    }};
    return specs;
}

std::string_view to_string(ActivityLabel label) {
    switch (label) {
        case ActivityLabel::SITTING: return "SITTING";
        case ActivityLabel::STANDING: return "STANDING";
        case ActivityLabel::WALKING: return "WALKING";
        case ActivityLabel::WALKING_UPSTAIRS: return "WALKING_UPSTAIRS";
        case ActivityLabel::WALKING_DOWNSTAIRS: return "WALKING_DOWNSTAIRS";
    }
    return "?";
}

std::optional<ActivityLabel> parse_activity(std::string_view name) { return parse_enum(name, kAllActivities); }

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::S_A: return "S_A";
        case Scenario::S_E: return "S_E";
        case Scenario::S_EA: return "S_EA";
    }
    return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
    static constexpr std::array<Scenario, 3> all{Scenario::S_A, Scenario::S_E, Scenario::S_EA};
    return parse_enum(name, all);
}

void validate(const TimeSeries& ts) {
    const std::string ch(to_string(ts.channel));
    if (!(ts.fs_hz > 0.0) || !std::isfinite(ts.fs_hz))
        throw InvalidArgument(ch + ": sampling rate must be positive");
    if (ts.samples.empty()) throw InvalidArgument(ch + ": no samples");
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        if (!std::isfinite(ts.samples[i]))
            throw InvalidArgument(ch + ": non-finite sample at index " + std::to_string(i));
}

double Recording::annotated_duration_s() const {
    double end = 0.0;
    for (const auto& iv : emotion_annotations) end = std::max(end, iv.end_s);
    for (const auto& iv : activity_annotations) end = std::max(end, iv.end_s);
    return end;
}

void validate(const Recording& rec) {
    for (const auto& [kind, ts] : rec.channels) {
        if (ts.channel != kind)
            throw InvalidArgument("channel map key " + std::string(to_string(kind)) +
                                  " holds a " + std::string(to_string(ts.channel)) + " series");
        validate(ts);
    }
    check_intervals(rec.emotion_annotations, "emotion");
    check_intervals(rec.activity_annotations, "activity");

    if (rec.scenario == Scenario::S_E) {
        // Every emotion-annotated instant must fall inside a SITTING interval.
        std::vector<ActivityInterval> sitting;
        for (const auto& a : rec.activity_annotations)
            if (a.label == ActivityLabel::SITTING) sitting.push_back(a);
        if (sitting.empty()) throw InvalidArgument("S_E requires sitting annotation");
        std::sort(sitting.begin(), sitting.end(),
                  [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
        for (const auto& e : rec.emotion_annotations) {
            double covered = e.start_s;
            for (const auto& s : sitting) {
                if (s.start_s <= covered && s.end_s > covered) covered = s.end_s;
                if (covered >= e.end_s) break;
            }
            if (covered < e.end_s) throw InvalidArgument("S_E requires sitting annotation");
        }
    }
}

const Recording* StudyCorpus::find(std::string_view participant_id, Scenario scenario) const {
    for (const auto& r : recordings)
        if (r.participant_id == participant_id && r.scenario == scenario) return &r;
    return nullptr;
}

std::vector<std::string> StudyCorpus::participants() const {
    std::set<std::string> ids;
    for (const auto& r : recordings) ids.insert(r.participant_id);
    return {ids.begin(), ids.end()};
}

void validate(const StudyCorpus& corpus) {
    std::set<std::pair<std::string, Scenario>> seen;
    for (const auto& r : corpus.recordings) {
        if (!seen.emplace(r.participant_id, r.scenario).second)
            throw InvalidArgument("duplicate recording for participant " + r.participant_id +
                                  " scenario " + std::string(to_string(r.scenario)));
    }
}

std::vector<LabeledSegment> slice_by_labels(const Recording& rec) {
    struct Span {
        double start, end;
        EmotionLabel emotion;
        ActivityLabel activity;
    };
    std::vector<Span> spans;
    for (const auto& e : rec.emotion_annotations) {
        for (const auto& a : rec.activity_annotations) {
            const double lo = std::max(e.start_s, a.start_s);
            const double hi = std::min(e.end_s, a.end_s);
            if (lo < hi) spans.push_back({lo, hi, e.label, a.label});
        }
    }
    std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) { return x.start < y.start; });

    std::vector<LabeledSegment> out;
    out.reserve(spans.size());
    for (const auto& sp : spans) {
        LabeledSegment seg;
        seg.participant_id = rec.participant_id;
        seg.scenario = rec.scenario;
        seg.index = out.size();
        seg.start_s = sp.start;
        seg.end_s = sp.end;
        seg.emotion = sp.emotion;
        seg.activity = sp.activity;
        for (const auto& [kind, ts] : rec.channels) {
            // Samples i with start_s + i/fs in [lo, hi).
            const double first = std::ceil((sp.start - ts.start_s) * ts.fs_hz - 1e-9);
            const double last = std::ceil((sp.end - ts.start_s) * ts.fs_hz - 1e-9);
            const auto n = static_cast<double>(ts.samples.size());
            const auto i0 = static_cast<std::size_t>(std::clamp(first, 0.0, n));
            const auto i1 = static_cast<std::size_t>(std::clamp(last, 0.0, n));
            if (i1 <= i0) continue;
            TimeSeries part;
            part.channel = kind;
            part.fs_hz = ts.fs_hz;
            part.units = ts.units;
            part.start_s = ts.time_at(i0);
            part.samples.assign(ts.samples.begin() + static_cast<std::ptrdiff_t>(i0),
                                ts.samples.begin() + static_cast<std::ptrdiff_t>(i1));
            seg.channels.emplace(kind, std::move(part));
        }
        out.push_back(std::move(seg));
    }
    return out;
}

TimeSeries resample_linear(const TimeSeries& ts, double target_fs) {
    if (!(target_fs > 0.0) || !std::isfinite(target_fs))
        throw InvalidArgument("resample_linear: target rate must be positive");
    if (ts.samples.size() < 2) throw InvalidArgument("resample_linear: need at least 2 samples");
    if (target_fs == ts.fs_hz) return ts;

    const double span = ts.span_s();
    const auto count = static_cast<std::size_t>(std::floor(span * target_fs + 1e-9)) + 1;
    const std::size_t last = ts.samples.size() - 1;

    TimeSeries out;
    out.channel = ts.channel;
    out.fs_hz = target_fs;
    out.units = ts.units;
    out.start_s = ts.start_s;
    out.samples.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double pos = static_cast<double>(k) * ts.fs_hz / target_fs;
        auto i = static_cast<std::size_t>(pos);
        if (i >= last) {
            out.samples[k] = ts.samples[last];
            continue;
        }
        const double frac = pos - static_cast<double>(i);
        out.samples[k] = frac == 0.0 ? ts.samples[i]
                                     : ts.samples[i] + frac * (ts.samples[i + 1] - ts.samples[i]);
    }
    return out;
}

std::string recording_dir_name(const Recording& rec) {
    return rec.participant_id + "_" + std::string(to_string(rec.scenario));
}

std::uint64_t content_hash(const Recording& rec) {
    Fnv1a h;
    h.update(rec.participant_id);
    h.update(to_string(rec.scenario));
    for (const auto& [kind, ts] : rec.channels) {
        h.update(to_string(kind));
        h.update_value(ts.fs_hz);
        h.update_value(ts.start_s);
        h.update(ts.units);
        const std::uint64_t n = ts.samples.size();
        h.update_value(n);
        h.update(ts.samples.data(), ts.samples.size() * sizeof(double));
    }
    for (const auto& iv : rec.emotion_annotations) {
        h.update_value(iv.start_s);
        h.update_value(iv.end_s);
        h.update(to_string(iv.label));
    }
    for (const auto& iv : rec.activity_annotations) {
        h.update_value(iv.start_s);
        h.update_value(iv.end_s);
        h.update(to_string(iv.label));
    }
    return h.digest();
}

std::uint64_t content_hash(const StudyCorpus& corpus) {
    // Order-independent over recordings: sort by directory name first.
    std::vector<std::pair<std::string, std::uint64_t>> parts;
    for (const auto& r : corpus.recordings) parts.emplace_back(recording_dir_name(r), content_hash(r));
    std::sort(parts.begin(), parts.end());
    Fnv1a h;
    for (const auto& [name, value] : parts) {
        h.update(name);
        h.update_value(value);
    }
    return h.digest();
}

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

}  // namespace emorec
