#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

namespace nvsram {

// Piecewise-linear voltage vs time. Flat extrapolation outside the
// breakpoint range; breakpoints must be non-decreasing in time.
class Waveform {
public:
    Waveform() = default;
    explicit Waveform(double level) : points_{{0.0, level}} {}
    Waveform(std::initializer_list<std::pair<double, double>> pts);

    static Waveform constant(double level) { return Waveform(level); }

    // Appends a breakpoint; throws ParamError if time goes backwards.
    Waveform& add(double t, double v);
    // Holds the last level until `t`, then ramps to `v` over `slew`.
    Waveform& ramp_to(double t, double v, double slew);

    double value(double t) const;
    double last_time() const { return points_.empty() ? 0.0 : points_.back().first; }
    double last_level() const { return points_.empty() ? 0.0 : points_.back().second; }
    const std::vector<std::pair<double, double>>& points() const { return points_; }

    // First upward/downward crossing of `level` at or after `t_from`;
    // returns a negative value when there is none.
    double first_rise_through(double level, double t_from = 0.0) const;

private:
    std::vector<std::pair<double, double>> points_;
};

} // namespace nvsram
