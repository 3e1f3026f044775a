#include "emorec/datamodel.hpp"
#include "emorec/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace emorec {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_index(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError(p.string(), 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

struct ChannelDecl {
    std::optional<double> fs_hz;
    std::optional<std::string> units;
    std::size_t line = 0;
};

template <class Label>
struct LinedInterval {
    Interval<Label> interval;
    std::size_t line;
};

struct Metadata {
    std::string participant_id;
    std::optional<Scenario> scenario;
    std::map<ChannelKind, ChannelDecl> channels;
    std::vector<LinedInterval<EmotionLabel>> emotions;
    std::vector<LinedInterval<ActivityLabel>> activities;
};

Metadata parse_metadata(const fs::path& path) {
    const std::string file = path.string();
    const std::string text = read_file(path);
    Metadata meta;
    std::set<std::string> seen_keys;
    bool have_participant = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw DataError(file, line_no, "expected `key = value`");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));

        if (key != "annotation" && !seen_keys.insert(key).second)
            throw DataError(file, line_no, "duplicate key `" + key + "`");

        if (key == "format") {
            if (value != "1") throw DataError(file, line_no, "unsupported format version `" + std::string(value) + "`");
        } else if (key == "participant_id") {
            if (value.empty()) throw DataError(file, line_no, "empty participant_id");
            meta.participant_id = std::string(value);
            have_participant = true;
        } else if (key == "scenario") {
            meta.scenario = parse_scenario(value);
            if (!meta.scenario) throw DataError(file, line_no, "unknown scenario `" + std::string(value) + "`");
        } else if (key.starts_with("channel.")) {
            const std::string_view rest = std::string_view(key).substr(8);
            const auto dot = rest.rfind('.');
            if (dot == std::string_view::npos) throw DataError(file, line_no, "malformed channel key `" + key + "`");
            const auto kind = parse_channel(rest.substr(0, dot));
            if (!kind) throw DataError(file, line_no, "unknown channel `" + std::string(rest.substr(0, dot)) + "`");
            const std::string_view field = rest.substr(dot + 1);
            auto& decl = meta.channels[*kind];
            if (decl.line == 0) decl.line = line_no;
            if (field == "fs_hz") {
                auto v = parse_double(value);
                if (!v || !(*v > 0.0) || !std::isfinite(*v))
                    throw DataError(file, line_no, "fs_hz must be a positive number");
                decl.fs_hz = *v;
            } else if (field == "units") {
                decl.units = std::string(value);
            } else {
                throw DataError(file, line_no, "unknown channel field `" + std::string(field) + "`");
            }
        } else if (key == "annotation") {
            const auto parts = split_ws(value);
            if (parts.size() != 4)
                throw DataError(file, line_no, "annotation needs `start_s end_s kind label`");
            const auto start = parse_double(parts[0]);
            const auto end = parse_double(parts[1]);
            if (!start || !end || !std::isfinite(*start) || !std::isfinite(*end) || *start < 0.0 ||
                !(*start < *end))
                throw DataError(file, line_no, "annotation bounds must satisfy 0 <= start_s < end_s");
            if (parts[2] == "emotion") {
                auto label = parse_emotion(parts[3]);
                if (!label) throw DataError(file, line_no, "unknown emotion label `" + std::string(parts[3]) + "`");
                meta.emotions.push_back({{*start, *end, *label}, line_no});
            } else if (parts[2] == "activity") {
                auto label = parse_activity(parts[3]);
                if (!label) throw DataError(file, line_no, "unknown activity label `" + std::string(parts[3]) + "`");
                meta.activities.push_back({{*start, *end, *label}, line_no});
            } else {
                throw DataError(file, line_no, "annotation kind must be `emotion` or `activity`");
            }
        } else {
            throw DataError(file, line_no, "unknown key `" + key + "`");
        }
    }
    if (!have_participant) throw DataError(file, 0, "missing participant_id");
    if (!meta.scenario) throw DataError(file, 0, "missing scenario");
    return meta;
}

template <class Label>
void check_overlaps(std::vector<LinedInterval<Label>> items, const std::string& file, const char* what) {
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.interval.start_s < b.interval.start_s; });
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[i].interval.start_s < items[i - 1].interval.end_s)
            throw DataError(file, std::max(items[i].line, items[i - 1].line),
                            std::string("overlapping ") + what + " annotations (lines " +
                                std::to_string(std::min(items[i].line, items[i - 1].line)) + " and " +
                                std::to_string(std::max(items[i].line, items[i - 1].line)) + ")");
    }
}

std::vector<double> parse_channel_csv(const fs::path& path) {
    const std::string file = path.string();
    const std::string text = read_file(path);
    std::vector<double> samples;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line = trim(std::string_view(text.data() + pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (header) {
            if (line != "sample_index,value") throw DataError(file, line_no, "expected header `sample_index,value`");
            header = false;
            continue;
        }
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) throw DataError(file, line_no, "expected `sample_index,value`");
        const auto index = parse_index(line.substr(0, comma));
        if (!index || *index != samples.size())
            throw DataError(file, line_no, "sample_index must count up from 0 (expected " +
                                               std::to_string(samples.size()) + ")");
        const auto value = parse_double(line.substr(comma + 1));
        if (!value) throw DataError(file, line_no, "cannot parse value in row " + std::to_string(*index));
        if (!std::isfinite(*value))
            throw DataError(file, line_no, "non-finite value in row " + std::to_string(*index));
        samples.push_back(*value);
    }
    if (header) throw DataError(file, 1, "empty file");
    if (samples.empty()) throw DataError(file, 0, "no samples");
    return samples;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

Recording load_recording(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError(dir.string(), 0, "recording directory not found");
    const fs::path meta_path = dir / kMetadataFile;
    if (!fs::exists(meta_path)) throw DataError(meta_path.string(), 0, "missing metadata file");
    const Metadata meta = parse_metadata(meta_path);
    const std::string meta_file = meta_path.string();

    std::map<ChannelKind, fs::path> files;
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
        const auto kind = parse_channel(p.stem().string());
        if (!kind) throw DataError(p.string(), 0, "file name is not a known channel");
        if (auto [it, inserted] = files.emplace(*kind, p); !inserted)
            throw DataError(p.string(), 0, "duplicate channel file (also " + it->second.filename().string() + ")");
    }
    for (const auto& [kind, decl] : meta.channels) {
        if (!files.count(kind))
            throw DataError(meta_file, decl.line, "missing channel file " + std::string(to_string(kind)) + ".csv");
    }

    check_overlaps(meta.emotions, meta_file, "emotion");
    check_overlaps(meta.activities, meta_file, "activity");

    Recording rec;
    rec.participant_id = meta.participant_id;
    rec.scenario = *meta.scenario;
    for (const auto& e : meta.emotions) rec.emotion_annotations.push_back(e.interval);
    for (const auto& a : meta.activities) rec.activity_annotations.push_back(a.interval);

    const double duration = rec.annotated_duration_s();
    for (const auto& [kind, path] : files) {
        TimeSeries ts;
        ts.channel = kind;
        ts.fs_hz = default_fs_hz(kind);
        ts.units = std::string(default_units(kind));
        if (auto it = meta.channels.find(kind); it != meta.channels.end()) {
            if (it->second.fs_hz) ts.fs_hz = *it->second.fs_hz;
            if (it->second.units) ts.units = *it->second.units;
        }
        ts.samples = parse_channel_csv(path);
        if (duration > 0.0) {
            const double expected = ts.fs_hz * duration;
            if (std::abs(static_cast<double>(ts.samples.size()) - expected) > 1.0 + 1e-9)
                throw DataError(path.string(), 0,
                                std::to_string(ts.samples.size()) + " samples inconsistent with " +
                                    format_double(ts.fs_hz) + " Hz over the annotated " +
                                    format_double(duration) + " s");
        }
        rec.channels.emplace(kind, std::move(ts));
    }

    try {
        validate(rec);
    } catch (const InvalidArgument& e) {
        throw DataError(meta_file, 0, e.what());
    }
    return rec;
}

void save_recording(const Recording& rec, const fs::path& dir) {
    validate(rec);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    std::string meta = "# emorec recording metadata\nformat = 1\n";
    meta += "participant_id = " + rec.participant_id + "\n";
    meta += "scenario = " + std::string(to_string(rec.scenario)) + "\n";
    for (const auto& [kind, ts] : rec.channels) {
        const std::string prefix = "channel." + std::string(to_string(kind));
        meta += prefix + ".fs_hz = " + format_double(ts.fs_hz) + "\n";
        meta += prefix + ".units = " + ts.units + "\n";
    }
    for (const auto& e : rec.emotion_annotations)
        meta += "annotation = " + format_double(e.start_s) + " " + format_double(e.end_s) + " emotion " +
                std::string(to_string(e.label)) + "\n";
    for (const auto& a : rec.activity_annotations)
        meta += "annotation = " + format_double(a.start_s) + " " + format_double(a.end_s) + " activity " +
                std::string(to_string(a.label)) + "\n";
    write_text(dir / kMetadataFile, meta);

    for (const auto& [kind, ts] : rec.channels) {
        if (ts.start_s != 0.0)
            throw InvalidArgument("save_recording: channel " + std::string(to_string(kind)) +
                                  " does not start at recording start");
        std::string csv = "sample_index,value\n";
        csv.reserve(ts.samples.size() * 26);
        for (std::size_t i = 0; i < ts.samples.size(); ++i) {
            csv += std::to_string(i);
            csv += ',';
            csv += format_double(ts.samples[i]);
            csv += '\n';
        }
        write_text(dir / (std::string(to_string(kind)) + ".csv"), csv);
    }
}

StudyCorpus load_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError(dir.string(), 0, "corpus directory not found");
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / kMetadataFile)) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());
    if (subdirs.empty()) throw DataError(dir.string(), 0, "no recordings found");
    StudyCorpus corpus;
    // Report every broken recording, not just the first.
    std::string problems;
    std::size_t n_bad = 0;
    for (const auto& d : subdirs) {
        try {
            corpus.recordings.push_back(load_recording(d));
        } catch (const DataError& e) {
            problems += std::string(problems.empty() ? "" : "\n") + e.what();
            ++n_bad;
        }
    }
    if (n_bad == 1) throw DataError(dir.string(), 0, problems);
    if (n_bad > 1) throw DataError(dir.string(), 0, std::to_string(n_bad) + " invalid recordings:\n" + problems);
    try {
        validate(corpus);
    } catch (const InvalidArgument& e) {
        throw DataError(dir.string(), 0, e.what());
    }
    return corpus;
}

void save_corpus(const StudyCorpus& corpus, const fs::path& dir) {
    validate(corpus);
    for (const auto& r : corpus.recordings) save_recording(r, dir / recording_dir_name(r));
}

}  // namespace emorec
