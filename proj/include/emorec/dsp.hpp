#pragma once

// Butterworth IIR design and application, rolling median, percentage
// normalization, and the per-channel preprocessing routes.

#include "emorec/datamodel.hpp"

#include <complex>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace emorec {

enum class FilterKind { LowPass, HighPass };

struct FilterSpec {
    FilterKind kind = FilterKind::LowPass;
    int order = 1;
    double cutoff_hz = 1.0;
    double fs_hz = 2.0;
};

/// One second-order section with a0 normalized to 1. First-order sections
/// have b2 = a2 = 0.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

struct IIRFilter {
    std::vector<Biquad> sections;
    double overall_gain = 1.0;

    /// Sum of section orders.
    int order() const;
};

/// Digital Butterworth filter from the analog prototype through the bilinear
/// transform with cutoff prewarping, realized as cascaded sections. Each
/// section is scaled to unit passband gain (DC for low-pass, Nyquist for
/// high-pass), so overall_gain is 1.
///
/// Throws InvalidArgument for order < 1, non-positive rates, or a cutoff at or
/// above Nyquist.
IIRFilter design_butterworth(const FilterSpec& spec);

std::complex<double> frequency_response(const IIRFilter& filter, double f_hz, double fs_hz);
std::vector<std::complex<double>> poles(const IIRFilter& filter);

enum class FilterMode { Causal, ZeroPhase };

std::string_view to_string(FilterMode mode);
std::optional<FilterMode> parse_filter_mode(std::string_view name);

// Causal: one forward pass through the cascade in direct form II transposed,
// zero initial state.
//
// ZeroPhase: forward-backward filtering. The input is mirrored at both ends
// (without repeating the edge sample) over max(3 * order, the slowest pole's
// e^-8 decay length) samples, capped at n - 1, and each pass starts from the
// steady state for its first padded sample. Requires n >= 3 * order.
std::vector<double> filter_samples(const IIRFilter& filter, std::span<const double> x, FilterMode mode);
TimeSeries apply_iir(const IIRFilter& filter, const TimeSeries& ts, FilterMode mode);

/// Centered running median; the input is extended at both ends by repeating
/// the boundary sample width/2 times. width must be odd and positive.
std::vector<double> rolling_median(std::span<const double> x, int width = 7);
TimeSeries rolling_median(const TimeSeries& ts, int width = 7);

/// Min-max scaling to [0, 100]; a constant input maps to 50.
std::vector<double> normalize_percentage(std::span<const double> x);
TimeSeries normalize_percentage(const TimeSeries& ts);

struct FilterStep {
    FilterKind kind;
    int order;
    double cutoff_hz;
};
struct RollingMedianStep {
    int width;
};
struct NormalizeStep {};

using PipelineStep = std::variant<FilterStep, RollingMedianStep, NormalizeStep>;

/// One route from a raw channel to a preprocessed one.
struct ChannelPipeline {
    ChannelKind input;
    ChannelKind output;
    std::vector<PipelineStep> steps;
};

/// Fixed routing:
///   EMG_RAW -> EMG_H  high-pass 40 Hz, order 5
///   EMG_RAW -> EMG_L  low-pass 5 Hz, order 4
///   EDA     -> EDA    low-pass 0.5 Hz, order 4
///   ST      -> ST     low-pass 0.25 Hz, order 4
///   PZT     -> PZT    rolling median (7, extend), low-pass 1 Hz order 1, normalization
///   BVP     -> BVP    unfiltered
const std::vector<ChannelPipeline>& routing_table();

TimeSeries run_pipeline(const ChannelPipeline& pipeline, const TimeSeries& ts, FilterMode mode);

/// Applies the routing table to every channel. EMG_RAW is replaced by EMG_H
/// and EMG_L; annotations are carried over unchanged. Throws InvalidArgument
/// for a channel without a route (EMG_H / EMG_L are outputs only).
Recording preprocess(const Recording& rec, FilterMode mode = FilterMode::ZeroPhase);

/// One line per section, `b0 b1 b2 1 a1 a2`, 17 significant digits, with the
/// overall gain folded into the first section.
std::string dump_sections(const IIRFilter& filter);

}  // namespace emorec
