#include "nvsram/waveform.hpp"

#include <algorithm>

#include "nvsram/errors.hpp"

namespace nvsram {

Waveform::Waveform(std::initializer_list<std::pair<double, double>> pts) {
    for (const auto& [t, v] : pts) add(t, v);
}

Waveform& Waveform::add(double t, double v) {
    if (!points_.empty() && t < points_.back().first)
        throw ParamError("waveform breakpoints must be non-decreasing in time");
    points_.push_back({t, v});
    return *this;
}

Waveform& Waveform::ramp_to(double t, double v, double slew) {
    if (slew <= 0) throw ParamError("waveform slew must be positive");
    add(t, last_level());
    add(t + slew, v);
    return *this;
}

double Waveform::value(double t) const {
    if (points_.empty()) return 0.0;
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                     [](double x, const auto& p) { return x < p.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    if (t1 == t0) return v1;
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

double Waveform::first_rise_through(double level, double t_from) const {
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const auto& [t0, v0] = points_[i - 1];
        const auto& [t1, v1] = points_[i];
        if (t1 < t_from) continue;
        if (v0 < level && v1 >= level) {
            const double t = t0 + (t1 - t0) * (level - v0) / (v1 - v0);
            if (t >= t_from) return t;
        }
    }
    return -1.0;
}

} // namespace nvsram
