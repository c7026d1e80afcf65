#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "qdd/detail/csv.hpp"
#include "qdd/errors.hpp"

namespace qdd {

enum class Channel { Torque, Velocity, Current, Voltage };

inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::Torque: return "torque_nm";
        case Channel::Velocity: return "velocity_rad_s";
        case Channel::Current: return "current_a";
        case Channel::Voltage: return "voltage_v";
    }
    return "?";
}

/// Uniformly sampled dynamometer run. torque and velocity are always
/// present; current and voltage are optional (empty when absent).
struct TimeSeries {
    double sample_rate = 0.0;        // [Hz]
    std::vector<double> torque;      // [N·m]
    std::vector<double> velocity;    // [rad/s]
    std::vector<double> current;     // [A]
    std::vector<double> voltage;     // [V]
    bool rotor_installed = true;
    double transmission_ratio = 1.0;

    std::size_t size() const { return torque.size(); }

    bool has(Channel c) const { return !channel(c).empty(); }

    std::span<const double> channel(Channel c) const {
        switch (c) {
            case Channel::Torque: return torque;
            case Channel::Velocity: return velocity;
            case Channel::Current: return current;
            case Channel::Voltage: return voltage;
        }
        return {};
    }

    void validate() const {
        if (!(sample_rate > 0.0)) throw validation_error("sample_rate must be positive");
        if (torque.size() < 2 || velocity.size() != torque.size())
            throw validation_error("torque and velocity channels must have equal length >= 2");
        if (!current.empty() && current.size() != torque.size())
            throw validation_error("current channel length mismatch");
        if (!voltage.empty() && voltage.size() != torque.size())
            throw validation_error("voltage channel length mismatch");
        for (Channel c : {Channel::Torque, Channel::Velocity, Channel::Current, Channel::Voltage})
            for (double v : channel(c))
                if (!std::isfinite(v))
                    throw validation_error(std::string(channel_name(c)) + " contains NaN/Inf");
    }
};

/// Maximum timestamp jitter accepted before a file is rejected, as a
/// fraction of the nominal sample period.
inline constexpr double timestamp_jitter_tolerance = 0.01;

/// Reads `time_s,torque_nm,velocity_rad_s[,current_a][,voltage_v]`.
/// Timestamps must be uniform; jittery logs need resampling upstream.
inline TimeSeries read_timeseries_csv(const std::string& path) {
    const detail::CsvTable table = detail::read_csv_file(path);

    const int time_col = table.column_index("time_s");
    const int torque_col = table.column_index("torque_nm");
    const int velocity_col = table.column_index("velocity_rad_s");
    const int current_col = table.column_index("current_a");
    const int voltage_col = table.column_index("voltage_v");
    if (time_col < 0 || torque_col < 0 || velocity_col < 0)
        throw io_error(path + ": header must contain time_s,torque_nm,velocity_rad_s");
    for (const std::string& col : table.columns)
        if (col != "time_s" && col != "torque_nm" && col != "velocity_rad_s" &&
            col != "current_a" && col != "voltage_v")
            throw io_error(path + ": unknown column '" + col + "'");
    if (table.rows.size() < 2) throw io_error(path + ": need at least 2 samples");

    std::vector<double> time;
    TimeSeries ts;
    time.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.columns.size())
            throw io_error(path + ": row " + std::to_string(r + 2) + " has " +
                           std::to_string(row.size()) + " cells, expected " +
                           std::to_string(table.columns.size()));
        const std::string ctx = path + ": row " + std::to_string(r + 2);
        time.push_back(detail::parse_number(row[time_col], ctx));
        ts.torque.push_back(detail::parse_number(row[torque_col], ctx));
        ts.velocity.push_back(detail::parse_number(row[velocity_col], ctx));
        if (current_col >= 0) ts.current.push_back(detail::parse_number(row[current_col], ctx));
        if (voltage_col >= 0) ts.voltage.push_back(detail::parse_number(row[voltage_col], ctx));
    }

    for (double t : time)
        if (!std::isfinite(t)) throw io_error(path + ": time_s contains NaN/Inf");

    const double nominal_dt = (time.back() - time.front()) / double(time.size() - 1);
    if (!(nominal_dt > 0.0)) throw io_error(path + ": timestamps must be increasing");
    for (std::size_t i = 1; i < time.size(); ++i) {
        const double dt = time[i] - time[i - 1];
        if (std::abs(dt - nominal_dt) > timestamp_jitter_tolerance * nominal_dt)
            throw io_error(path + ": non-uniform timestamps at row " + std::to_string(i + 2) +
                           " (dt=" + detail::format_full(dt) + ", nominal=" +
                           detail::format_full(nominal_dt) + "); resample to a uniform grid first");
    }
    ts.sample_rate = 1.0 / nominal_dt;

    try {
        ts.validate();
    } catch (const validation_error& e) {
        throw io_error(path + ": " + e.what());
    }
    return ts;
}

inline void write_timeseries_csv(const TimeSeries& ts, std::ostream& out) {
    ts.validate();
    out << "time_s,torque_nm,velocity_rad_s";
    if (!ts.current.empty()) out << ",current_a";
    if (!ts.voltage.empty()) out << ",voltage_v";
    out << "\n";
    const double dt = 1.0 / ts.sample_rate;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << detail::format_full(double(i) * dt) << ',' << detail::format_full(ts.torque[i])
            << ',' << detail::format_full(ts.velocity[i]);
        if (!ts.current.empty()) out << ',' << detail::format_full(ts.current[i]);
        if (!ts.voltage.empty()) out << ',' << detail::format_full(ts.voltage[i]);
        out << "\n";
    }
}

inline void write_timeseries_csv(const TimeSeries& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    write_timeseries_csv(ts, out);
}

}  // namespace qdd
