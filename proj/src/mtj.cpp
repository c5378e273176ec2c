#include "nvsram/mtj.hpp"

#include <cmath>
#include <sstream>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

constexpr double pi = 3.141592653589793238462643383279502884;
constexpr double max_dt = 10e-12;

double deg2rad(double d) { return d * pi / 180.0; }

} // namespace

void MtjParams::validate() const {
    const auto fail = [](const std::string& msg) { throw ParamError("mtj params: " + msg); };
    if (free_layer_width <= 0 || free_layer_length <= 0 || free_layer_thickness <= 0)
        fail("free layer dimensions must be positive");
    if (oxide_thickness <= 0) fail("oxide thickness must be positive");
    if (saturation_magnetization <= 0) fail("saturation magnetization must be positive");
    if (damping <= 0) fail("damping must be positive");
    if (thermal_stability <= 0) fail("thermal stability factor must be positive");
    if (temperature <= 0) fail("temperature must be positive");
    if (r_parallel <= 0 || r_antiparallel <= 0) fail("resistances must be positive");
    if (r_antiparallel < r_parallel * 2.0)
        fail("TMR ratio must exceed 100% (Rap >= 2*Rp)");
    if (ic0_target <= 0) fail("critical-current target must be positive");
    if (spin_efficiency <= 0) fail("spin efficiency must be positive");
    if (gyromagnetic_ratio <= 0) fail("gyromagnetic ratio must be positive");
}

MagnetizationState MagnetizationState::tilted(double tilt_rad, bool from_parallel) {
    const double s = std::sin(tilt_rad);
    const double c = std::cos(tilt_rad);
    return {{s, 0.0, from_parallel ? c : -c}};
}

double derive_anisotropy_field(const MtjParams& params) {
    const double volume = params.free_layer_volume();
    if (volume <= 0 || params.saturation_magnetization <= 0)
        throw ParamError("anisotropy field needs positive volume and Ms");
    const double barrier = params.thermal_stability * k_boltzmann * params.temperature;
    return 2.0 * barrier / (mu0 * params.saturation_magnetization * volume);
}

double barrier_from_anisotropy_field(const MtjParams& params, double hk) {
    return 0.5 * mu0 * params.saturation_magnetization * hk * params.free_layer_volume();
}

double conductance(const MagnetizationState& state, const MtjParams& params) {
    const double gp = 1.0 / params.r_parallel;
    const double gap = 1.0 / params.r_antiparallel;
    return 0.5 * ((gp + gap) + (gp - gap) * state.m.z);
}

double resistance(const MagnetizationState& state, const MtjParams& params) {
    return 1.0 / conductance(state, params);
}

Vec3 effective_field(const MagnetizationState& state, const MtjParams& params,
                     const Vec3& thermal) {
    const double hk = derive_anisotropy_field(params);
    return Vec3{0.0, 0.0, hk * state.m.z} + thermal;
}

double thermal_field_sigma(const MtjParams& params, double temperature, double dt) {
    if (dt <= 0) throw ParamError("thermal field: dt must be positive");
    if (temperature < 0) throw ParamError("thermal field: temperature must be >= 0");
    if (temperature == 0) return 0.0;
    const double var = 2.0 * params.damping * k_boltzmann * temperature /
                       (params.gyromagnetic_ratio * mu0 * mu0 *
                        params.saturation_magnetization * params.free_layer_volume() * dt);
    return std::sqrt(var);
}

Vec3 sample_thermal_field(const MtjParams& params, double temperature, double dt,
                          NormalSampler& rng) {
    const double sigma = thermal_field_sigma(params, temperature, dt);
    if (sigma == 0.0) return {};
    return {sigma * rng(), sigma * rng(), sigma * rng()};
}

namespace {

struct LlgCoefficients {
    double hk;
    double precession; // gamma*mu0/(1+alpha^2)
    double alpha;
    double a_j; // spin-torque field amplitude, A/m, signed with the current
};

LlgCoefficients llg_coefficients(const MtjParams& params, double current) {
    LlgCoefficients c{};
    c.hk = derive_anisotropy_field(params);
    c.alpha = params.damping;
    c.precession = params.gyromagnetic_ratio * mu0 / (1.0 + c.alpha * c.alpha);
    c.a_j = hbar * params.spin_efficiency * current /
            (2.0 * elementary_charge * mu0 * params.saturation_magnetization *
             params.free_layer_volume());
    return c;
}

// Explicit (Landau-Lifshitz) form of the Gilbert equation with the
// Slonczewski term, pinned axis +z:
//   dm/dt = -c*( m x H + a*m x (m x H) + aj*m x (m x z) - a*aj*(m x z) )
Vec3 llg_rhs(const Vec3& m, const Vec3& thermal, const LlgCoefficients& c) {
    const Vec3 h{thermal.x, thermal.y, thermal.z + c.hk * m.z};
    const Vec3 mxh = m.cross(h);
    const Vec3 mxmxh = m.cross(mxh);
    const Vec3 zhat{0.0, 0.0, 1.0};
    const Vec3 mxz = m.cross(zhat);
    const Vec3 mxmxz = m.cross(mxz);
    return -c.precession *
           (mxh + c.alpha * mxmxh + c.a_j * mxmxz - c.alpha * c.a_j * mxz);
}

} // namespace

MagnetizationState llg_step(const MagnetizationState& state, double current, double dt,
                            const MtjParams& params, const Vec3& thermal_field) {
    if (dt <= 0 || dt > max_dt) {
        std::ostringstream os;
        os << "llg step: dt " << dt << " outside (0, " << max_dt << "]";
        throw ParamError(os.str());
    }
    const LlgCoefficients c = llg_coefficients(params, current);
    const Vec3 k1 = llg_rhs(state.m, thermal_field, c);
    const Vec3 predicted = state.m + dt * k1;
    const Vec3 k2 = llg_rhs(predicted, thermal_field, c);
    Vec3 m = state.m + (0.5 * dt) * (k1 + k2);
    if (!m.finite()) {
        std::ostringstream os;
        os << "llg step: non-finite magnetization (I=" << current << " A, dt=" << dt
           << " s, m_z=" << state.m.z << ")";
        throw NumericError(os.str());
    }
    return {m.normalized()};
}

MagnetizationState llg_step(const MagnetizationState& state, double current, double dt,
                            const MtjParams& params) {
    return llg_step(state, current, dt, params, Vec3{});
}

double macrospin_energy(const MagnetizationState& state, const MtjParams& params) {
    const double hk = derive_anisotropy_field(params);
    return -0.5 * mu0 * params.saturation_magnetization * params.free_layer_volume() * hk *
           state.m.z * state.m.z;
}

double sample_equilibrium_tilt(const MtjParams& params, double temperature,
                               NormalSampler& rng) {
    if (temperature <= 0) return 0.0;
    // E(theta) = Delta_T * kB*T * sin^2(theta) with Delta_T scaled to the
    // requested temperature's barrier; inverse transform on the energy,
    // truncated at the equator.
    const double barrier = params.thermal_stability * k_boltzmann * params.temperature;
    const double delta_t = barrier / (k_boltzmann * temperature);
    const double u = rng.uniform01();
    const double x = -std::log(1.0 - u * (1.0 - std::exp(-delta_t))) / delta_t;
    return std::asin(std::sqrt(x));
}

std::optional<double> switching_time(const MtjParams& params, double current,
                                     double temperature, NormalSampler* rng,
                                     const SwitchingOptions& opts) {
    if (current == 0.0) throw ParamError("switching time: current must be nonzero");
    params.validate();
    const bool toward_parallel = current > 0.0;
    double tilt = deg2rad(opts.initial_tilt_deg);
    const bool thermal = rng != nullptr && temperature > 0.0;
    if (thermal) tilt = sample_equilibrium_tilt(params, temperature, *rng);
    MagnetizationState state = MagnetizationState::tilted(tilt, !toward_parallel);
    if (thermal) {
        // Random azimuth; the polar angle carries the energy statistics.
        const double phi = 2.0 * pi * rng->uniform01();
        const double s = std::sin(tilt);
        state.m = Vec3{s * std::cos(phi), s * std::sin(phi), state.m.z};
    }

    const double target_sign = toward_parallel ? 1.0 : -1.0;
    double t = 0.0;
    double prev_mz = state.m.z;
    const long n_steps = static_cast<long>(std::ceil(opts.horizon / opts.dt));
    for (long i = 0; i < n_steps; ++i) {
        Vec3 field{};
        if (thermal) field = sample_thermal_field(params, temperature, opts.dt, *rng);
        state = llg_step(state, current, opts.dt, params, field);
        t += opts.dt;
        if (state.m.z * target_sign >= 0.0 && prev_mz * target_sign < 0.0) {
            // Linear interpolation of the zero crossing within the step.
            const double frac = prev_mz / (prev_mz - state.m.z);
            return t - opts.dt + frac * opts.dt;
        }
        prev_mz = state.m.z;
    }
    return std::nullopt;
}

double measure_critical_current(const MtjParams& params, const SwitchingOptions& opts) {
    const auto switches = [&](double current) {
        return switching_time(params, current, 0.0, nullptr, opts).has_value();
    };
    double lo = 1e-6;
    double hi = 400e-6;
    if (switches(lo)) throw CalibrationError("critical current bracket: lower bound 1 uA already switches");
    if (!switches(hi)) throw CalibrationError("critical current bracket: upper bound 400 uA does not switch");
    while ((hi - lo) / hi > 5e-4) {
        const double mid = 0.5 * (lo + hi);
        (switches(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

CalibrationResult calibrate_spin_efficiency(const MtjParams& params,
                                            const SwitchingOptions& opts) {
    params.validate();
    MtjParams work = params;
    // Torque depends on efficiency*current only, so the measured threshold is
    // exactly inversely proportional to the efficiency.
    for (int round = 0; round < 4; ++round) {
        const double measured = measure_critical_current(work, opts);
        if (std::abs(measured - params.ic0_target) / params.ic0_target < 5e-3)
            return {work.spin_efficiency, measured};
        work.spin_efficiency *= measured / params.ic0_target;
    }
    const double final_measured = measure_critical_current(work, opts);
    if (std::abs(final_measured - params.ic0_target) / params.ic0_target > 1e-2)
        throw CalibrationError("spin-efficiency calibration did not converge to the target");
    return {work.spin_efficiency, final_measured};
}

} // namespace nvsram
