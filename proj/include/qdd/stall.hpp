#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qdd/errors.hpp"
#include "qdd/timeseries.hpp"
#include "qdd/uncertain.hpp"

namespace qdd {

/// One steady command level from a stall test.
struct StallPoint {
    double mean_torque = 0.0;   // [N·m]
    double mean_current = 0.0;  // [A]
    std::size_t samples = 0;    // samples averaged after trimming
};

struct StallParams {
    double trim = 0.5;            // seconds discarded at each segment end
    double step_threshold = 0.5;  // current jump [A] that starts a new level
};

/// Reduces a stalled torque-per-current sweep to one (torque, current) pair
/// per command level. Levels are detected as plateaus in the current
/// channel; the trim at each end removes command transients.
inline std::vector<StallPoint> stall_test_reduce(const TimeSeries& ts,
                                                 const StallParams& params = {}) {
    ts.validate();
    if (!ts.has(Channel::Current))
        throw validation_error("stall_test_reduce: current channel required");
    if (params.trim < 0.0) throw validation_error("stall_test_reduce: trim must be non-negative");
    require_positive(params.step_threshold, "step_threshold");

    std::vector<std::pair<std::size_t, std::size_t>> segments;  // [begin, end)
    std::size_t begin = 0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (std::abs(ts.current[i] - ts.current[i - 1]) > params.step_threshold) {
            segments.emplace_back(begin, i);
            begin = i;
        }
    }
    segments.emplace_back(begin, ts.size());

    const auto trim_samples = static_cast<std::size_t>(std::ceil(params.trim * ts.sample_rate));
    std::vector<StallPoint> points;
    points.reserve(segments.size());
    for (auto [lo, hi] : segments) {
        const double duration = double(hi - lo) / ts.sample_rate;
        if (!(2.0 * params.trim < duration))
            throw validation_error("stall_test_reduce: segment of " +
                                   std::to_string(duration) + " s is too short for trim " +
                                   std::to_string(params.trim) + " s per end");
        const std::size_t a = lo + trim_samples;
        const std::size_t b = hi - trim_samples;
        StallPoint p;
        p.samples = b - a;
        for (std::size_t i = a; i < b; ++i) {
            p.mean_torque += ts.torque[i];
            p.mean_current += ts.current[i];
        }
        p.mean_torque /= double(p.samples);
        p.mean_current /= double(p.samples);
        points.push_back(p);
    }
    return points;
}

}  // namespace qdd
