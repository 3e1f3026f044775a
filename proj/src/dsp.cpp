#include "emorec/dsp.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace emorec {

namespace {

using cplx = std::complex<double>;

struct SectionState {
    double z1 = 0.0;
    double z2 = 0.0;
};

/// In-place cascade pass in direct form II transposed.
void run_cascade(const IIRFilter& f, std::vector<double>& x, std::vector<SectionState> state) {
    for (std::size_t s = 0; s < f.sections.size(); ++s) {
        const Biquad& q = f.sections[s];
        double z1 = state[s].z1;
        double z2 = state[s].z2;
        for (double& v : x) {
            const double in = v;
            const double out = q.b0 * in + z1;
            z1 = q.b1 * in - q.a1 * out + z2;
            z2 = q.b2 * in - q.a2 * out;
            v = out;
        }
    }
    if (f.overall_gain != 1.0)
        for (double& v : x) v *= f.overall_gain;
}

/// Section states that hold the cascade in equilibrium for a constant input
/// `level` (before overall gain).
std::vector<SectionState> steady_state(const IIRFilter& f, double level) {
    std::vector<SectionState> out(f.sections.size());
    double u = level;
    for (std::size_t s = 0; s < f.sections.size(); ++s) {
        const Biquad& q = f.sections[s];
        const double g = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
        out[s].z2 = (q.b2 - q.a2 * g) * u;
        out[s].z1 = (q.b1 - q.a1 * g) * u + out[s].z2;
        u *= g;
    }
    return out;
}

Biquad make_pair_section(cplx pole, FilterKind kind) {
    Biquad q;
    q.a1 = -2.0 * pole.real();
    q.a2 = std::norm(pole);
    if (kind == FilterKind::LowPass) {
        const double k = (1.0 + q.a1 + q.a2) / 4.0;
        q.b0 = k;
        q.b1 = 2.0 * k;
        q.b2 = k;
    } else {
        const double k = (1.0 - q.a1 + q.a2) / 4.0;
        q.b0 = k;
        q.b1 = -2.0 * k;
        q.b2 = k;
    }
    return q;
}

Biquad make_real_section(double pole, FilterKind kind) {
    Biquad q;
    q.a1 = -pole;
    if (kind == FilterKind::LowPass) {
        const double k = (1.0 + q.a1) / 2.0;
        q.b0 = k;
        q.b1 = k;
    } else {
        const double k = (1.0 - q.a1) / 2.0;
        q.b0 = k;
        q.b1 = -k;
    }
    return q;
}

bool is_first_order(const Biquad& q) { return q.a2 == 0.0 && q.b2 == 0.0; }

}  // namespace

int IIRFilter::order() const {
    int n = 0;
    for (const auto& q : sections) n += is_first_order(q) ? 1 : 2;
    return n;
}

IIRFilter design_butterworth(const FilterSpec& spec) {
    if (spec.order < 1) throw InvalidArgument("filter order must be >= 1");
    if (!(spec.fs_hz > 0.0) || !std::isfinite(spec.fs_hz)) throw InvalidArgument("sampling rate must be positive");
    if (!(spec.cutoff_hz > 0.0)) throw InvalidArgument("cutoff must be positive");
    if (!(spec.cutoff_hz < spec.fs_hz / 2.0))
        throw InvalidArgument("cutoff " + format_double(spec.cutoff_hz) + " Hz must be below Nyquist (" +
                              format_double(spec.fs_hz / 2.0) + " Hz)");

    const int n = spec.order;
    const double two_fs = 2.0 * spec.fs_hz;
    const double warped = two_fs * std::tan(std::numbers::pi * spec.cutoff_hz / spec.fs_hz);

    // Analog prototype poles on the left half of the circle of radius `warped`;
    // low- and high-pass share them after the bilinear map, only zeros differ.
    IIRFilter filter;
    for (int k = 0; k < n / 2; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + n + 1.0) / (2.0 * n);
        const cplx s = std::polar(warped, theta);
        const cplx z = (two_fs + s) / (two_fs - s);
        filter.sections.push_back(make_pair_section(z, spec.kind));
    }
    if (n % 2 == 1) {
        const double z = (two_fs - warped) / (two_fs + warped);
        filter.sections.push_back(make_real_section(z, spec.kind));
    }
    return filter;
}

std::complex<double> frequency_response(const IIRFilter& filter, double f_hz, double fs_hz) {
    const double w = 2.0 * std::numbers::pi * f_hz / fs_hz;
    const cplx zi = std::polar(1.0, -w);
    const cplx zi2 = zi * zi;
    cplx h = filter.overall_gain;
    for (const auto& q : filter.sections) h *= (q.b0 + q.b1 * zi + q.b2 * zi2) / (1.0 + q.a1 * zi + q.a2 * zi2);
    return h;
}

std::vector<std::complex<double>> poles(const IIRFilter& filter) {
    std::vector<cplx> out;
    for (const auto& q : filter.sections) {
        if (q.a2 == 0.0) {
            out.emplace_back(-q.a1, 0.0);
            continue;
        }
        const cplx disc = std::sqrt(cplx(q.a1 * q.a1 - 4.0 * q.a2, 0.0));
        out.push_back((-q.a1 + disc) / 2.0);
        out.push_back((-q.a1 - disc) / 2.0);
    }
    return out;
}

std::string_view to_string(FilterMode mode) { return mode == FilterMode::Causal ? "causal" : "zero-phase"; }

std::optional<FilterMode> parse_filter_mode(std::string_view name) {
    if (name == "causal") return FilterMode::Causal;
    if (name == "zero-phase" || name == "zero_phase") return FilterMode::ZeroPhase;
    return std::nullopt;
}

namespace {

/// Padding for forward-backward filtering: 3 * order samples, or enough for
/// the slowest pole to decay by e^-8 if that is longer.
std::size_t zero_phase_pad(const IIRFilter& filter) {
    double r_max = 0.0;
    for (const auto& p : poles(filter)) r_max = std::max(r_max, std::abs(p));
    auto pad = static_cast<std::size_t>(3 * filter.order());
    if (r_max > 0.0 && r_max < 1.0) pad = std::max(pad, static_cast<std::size_t>(std::ceil(-8.0 / std::log(r_max))));
    return pad;
}

}  // namespace

std::vector<double> filter_samples(const IIRFilter& filter, std::span<const double> x, FilterMode mode) {
    if (mode == FilterMode::Causal) {
        std::vector<double> y(x.begin(), x.end());
        run_cascade(filter, y, std::vector<SectionState>(filter.sections.size()));
        return y;
    }

    const std::size_t n = x.size();
    const auto order = static_cast<std::size_t>(filter.order());
    if (n == 0 || n < 3 * order)
        throw InvalidArgument("zero-phase filtering needs at least " + std::to_string(3 * order) +
                              " samples, got " + std::to_string(n));
    const std::size_t pad = std::min(zero_phase_pad(filter), n - 1);

    // Mirror padding: unlike odd extension it does not turn the noise on the
    // edge sample into an offset over the whole pad.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(x[n - 1 - i]);

    run_cascade(filter, ext, steady_state(filter, ext.front()));
    std::reverse(ext.begin(), ext.end());
    run_cascade(filter, ext, steady_state(filter, ext.front()));
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

TimeSeries apply_iir(const IIRFilter& filter, const TimeSeries& ts, FilterMode mode) {
    TimeSeries out = ts;
    out.samples = filter_samples(filter, ts.samples, mode);
    return out;
}

std::vector<double> rolling_median(std::span<const double> x, int width) {
    if (width < 1 || width % 2 == 0) throw InvalidArgument("rolling median width must be odd and positive");
    if (x.empty()) throw InvalidArgument("rolling median of an empty signal");
    const auto half = static_cast<std::ptrdiff_t>(width / 2);
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<double> out(x.size());
    std::vector<double> buf(static_cast<std::size_t>(width));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t k = -half; k <= half; ++k)
            buf[static_cast<std::size_t>(k + half)] = x[static_cast<std::size_t>(std::clamp(i + k, std::ptrdiff_t{0}, n - 1))];
        auto mid = buf.begin() + half;
        std::nth_element(buf.begin(), mid, buf.end());
        out[static_cast<std::size_t>(i)] = *mid;
    }
    return out;
}

TimeSeries rolling_median(const TimeSeries& ts, int width) {
    TimeSeries out = ts;
    out.samples = rolling_median(std::span<const double>(ts.samples), width);
    return out;
}

std::vector<double> normalize_percentage(std::span<const double> x) {
    if (x.empty()) return {};
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double min = *lo;
    const double range = *hi - *lo;
    std::vector<double> out(x.size());
    if (range == 0.0) {
        std::fill(out.begin(), out.end(), 50.0);
        return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp((x[i] - min) / range * 100.0, 0.0, 100.0);
    return out;
}

TimeSeries normalize_percentage(const TimeSeries& ts) {
    TimeSeries out = ts;
    out.samples = normalize_percentage(std::span<const double>(ts.samples));
    out.units = "percentage";
    return out;
}

const std::vector<ChannelPipeline>& routing_table() {
    using enum ChannelKind;
    static const std::vector<ChannelPipeline> table{
        {EMG_RAW, EMG_H, {FilterStep{FilterKind::HighPass, 5, 40.0}}},
        {EMG_RAW, EMG_L, {FilterStep{FilterKind::LowPass, 4, 5.0}}},
        {EDA, EDA, {FilterStep{FilterKind::LowPass, 4, 0.5}}},
        {ST, ST, {FilterStep{FilterKind::LowPass, 4, 0.25}}},
        {PZT, PZT, {RollingMedianStep{7}, FilterStep{FilterKind::LowPass, 1, 1.0}, NormalizeStep{}}},
        {BVP, BVP, {}},
    };
    return table;
}

TimeSeries run_pipeline(const ChannelPipeline& pipeline, const TimeSeries& ts, FilterMode mode) {
    TimeSeries cur = ts;
    cur.channel = pipeline.output;
    for (const auto& step : pipeline.steps) {
        if (const auto* f = std::get_if<FilterStep>(&step)) {
            IIRFilter filter;
            try {
                filter = design_butterworth({f->kind, f->order, f->cutoff_hz, ts.fs_hz});
            } catch (const InvalidArgument& e) {
                throw InvalidArgument(std::string(to_string(pipeline.output)) + ": " + e.what());
            }
            cur.samples = filter_samples(filter, cur.samples, mode);
        } else if (const auto* m = std::get_if<RollingMedianStep>(&step)) {
            cur.samples = rolling_median(std::span<const double>(cur.samples), m->width);
        } else {
            cur = normalize_percentage(cur);
        }
    }
    return cur;
}

Recording preprocess(const Recording& rec, FilterMode mode) {
    Recording out;
    out.participant_id = rec.participant_id;
    out.scenario = rec.scenario;
    out.emotion_annotations = rec.emotion_annotations;
    out.activity_annotations = rec.activity_annotations;
    const auto& table = routing_table();
    for (const auto& [kind, ts] : rec.channels) {
        bool routed = false;
        for (const auto& route : table) {
            if (route.input != kind) continue;
            routed = true;
            out.channels.insert_or_assign(route.output, run_pipeline(route, ts, mode));
        }
        if (!routed) throw InvalidArgument("no preprocessing route for channel " + std::string(to_string(kind)));
    }
    return out;
}

std::string dump_sections(const IIRFilter& filter) {
    std::string out;
    char buf[160];
    for (std::size_t s = 0; s < filter.sections.size(); ++s) {
        const Biquad& q = filter.sections[s];
        const double g = s == 0 ? filter.overall_gain : 1.0;
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g 1 %.17g %.17g\n", g * q.b0, g * q.b1, g * q.b2, q.a1, q.a2);
        out += buf;
    }
    return out;
}

}  // namespace emorec
