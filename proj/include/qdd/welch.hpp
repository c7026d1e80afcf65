#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qdd/errors.hpp"
#include "qdd/timeseries.hpp"

namespace qdd {

enum class WindowKind { Hann, Hamming, Rect };

struct WelchParams {
    /// Power of two; 0 selects the largest power of two <= sample_rate,
    /// giving roughly 1 Hz resolution with many averages at dyno rates.
    std::size_t segment_length = 0;
    double overlap = 0.5;  // fraction of a segment shared with its neighbour
    WindowKind window = WindowKind::Hann;
    bool detrend = true;   // remove the mean of each segment
};

/// Non-parametric transfer-function estimate on a one-sided frequency grid
/// (DC excluded). gain is the H1 estimator Sxy/Sxx; coherence is
/// |Sxy|^2/(Sxx*Syy), in [0, 1].
struct FrequencyResponse {
    std::vector<double> frequency;            // [Hz], strictly increasing
    std::vector<std::complex<double>> gain;   // output units per input unit
    std::vector<double> coherence;
    std::size_t segment_count = 0;
};

namespace detail {

inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    switch (kind) {
        case WindowKind::Rect:
            break;
        case WindowKind::Hann:
            for (std::size_t i = 0; i < n; ++i)
                w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n));
            break;
        case WindowKind::Hamming:
            for (std::size_t i = 0; i < n; ++i)
                w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * double(i) / double(n));
            break;
    }
    return w;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t default_segment_length(double sample_rate) {
    std::size_t n = 1;
    while (n * 2 <= static_cast<std::size_t>(sample_rate)) n *= 2;
    return std::max<std::size_t>(n, 8);
}

/// Averaged cross/auto spectra over overlapping windowed segments. The
/// min_segments guard exists because a single segment makes coherence
/// identically 1; public callers require at least 2.
inline FrequencyResponse welch_cross_spectra(std::span<const double> x, std::span<const double> y,
                                             double sample_rate, const WelchParams& params,
                                             std::size_t min_segments) {
    if (x.size() != y.size()) throw validation_error("welch: channel length mismatch");
    std::size_t nseg = params.segment_length;
    if (nseg == 0) nseg = default_segment_length(sample_rate);
    if (!is_power_of_two(nseg)) throw validation_error("welch: segment_length must be a power of two");
    if (!(params.overlap >= 0.0 && params.overlap < 1.0))
        throw validation_error("welch: overlap must lie in [0, 1)");

    const std::size_t hop =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(double(nseg) * (1.0 - params.overlap))));
    const std::size_t count = x.size() >= nseg ? (x.size() - nseg) / hop + 1 : 0;
    if (count < min_segments)
        throw analysis_error("welch: " + std::to_string(count) + " segment(s) of " +
                             std::to_string(nseg) + " samples available, need at least " +
                             std::to_string(min_segments) +
                             "; record longer data or shrink segment_length");

    const std::vector<double> window = make_window(params.window, nseg);
    const std::size_t bins = nseg / 2 + 1;
    std::vector<double> sxx(bins, 0.0), syy(bins, 0.0);
    std::vector<std::complex<double>> sxy(bins, 0.0);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> bufx(nseg), bufy(nseg);
    std::vector<std::complex<double>> spx, spy;

    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t off = s * hop;
        double mx = 0.0, my = 0.0;
        if (params.detrend) {
            for (std::size_t i = 0; i < nseg; ++i) {
                mx += x[off + i];
                my += y[off + i];
            }
            mx /= double(nseg);
            my /= double(nseg);
        }
        for (std::size_t i = 0; i < nseg; ++i) {
            bufx[i] = (x[off + i] - mx) * window[i];
            bufy[i] = (y[off + i] - my) * window[i];
        }
        fft.fwd(spx, bufx);
        fft.fwd(spy, bufy);
        for (std::size_t k = 0; k < bins; ++k) {
            sxx[k] += std::norm(spx[k]);
            syy[k] += std::norm(spy[k]);
            sxy[k] += std::conj(spx[k]) * spy[k];
        }
    }

    // Scale factors (window power, fs, averaging) cancel in both H1 and
    // coherence, so the accumulated sums are used directly.
    FrequencyResponse fr;
    fr.segment_count = count;
    fr.frequency.reserve(bins - 1);
    fr.gain.reserve(bins - 1);
    fr.coherence.reserve(bins - 1);
    for (std::size_t k = 1; k < bins; ++k) {
        fr.frequency.push_back(double(k) * sample_rate / double(nseg));
        if (sxx[k] > 0.0 && syy[k] > 0.0) {
            fr.gain.push_back(sxy[k] / sxx[k]);
            fr.coherence.push_back(std::clamp(std::norm(sxy[k]) / (sxx[k] * syy[k]), 0.0, 1.0));
        } else {
            fr.gain.push_back(0.0);
            fr.coherence.push_back(0.0);
        }
    }
    return fr;
}

}  // namespace detail

/// Welch transfer-function estimate from one channel to another.
inline FrequencyResponse welch_tf(const TimeSeries& ts, Channel input, Channel output,
                                  const WelchParams& params = {}) {
    ts.validate();
    if (!ts.has(input))
        throw validation_error(std::string("welch: missing input channel ") + channel_name(input));
    if (!ts.has(output))
        throw validation_error(std::string("welch: missing output channel ") + channel_name(output));
    return detail::welch_cross_spectra(ts.channel(input), ts.channel(output), ts.sample_rate,
                                       params, 2);
}

}  // namespace qdd
