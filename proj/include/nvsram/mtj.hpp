#pragma once

#include <cstdint>
#include <optional>

#include "nvsram/constants.hpp"
#include "nvsram/rng.hpp"
#include "nvsram/vec3.hpp"

namespace nvsram {

// Material and geometry parameters of a perpendicular STT-MTJ. The easy axis
// is z; m_z = +1 is the parallel (low resistance) state, m_z = -1 the
// anti-parallel (high resistance) state.
struct MtjParams {
    double free_layer_width = 20e-9;      // m
    double free_layer_length = 20e-9;     // m
    double free_layer_thickness = 1.4e-9; // m
    double oxide_thickness = 1.15e-9;     // m, documentation only; no role in dynamics
    double saturation_magnetization = 7.0e5; // A/m (700 emu/cm^3)
    double damping = 0.028;
    double thermal_stability = 56.0;      // Delta = Ea / (kB*T) at the reference temperature
    double r_parallel = 5.5e3;            // ohm
    double r_antiparallel = 12.0e3;       // ohm
    double ic0_target = 27e-6;            // A
    double temperature = 300.0;           // K, reference for Delta and default noise level
    // Calibrated so the simulated deterministic critical current equals
    // ic0_target at the default 1 ps step. Absorbs every prefactor
    // convention; the effective value exceeds 1 for the default parameter
    // set. Recompute with calibrate_spin_efficiency after changing anything.
    double spin_efficiency = 1.414110537;
    double gyromagnetic_ratio = gyromagnetic_ratio_default; // rad/(s*T)

    double free_layer_volume() const {
        return free_layer_width * free_layer_length * free_layer_thickness;
    }
    double tmr() const { return (r_antiparallel - r_parallel) / r_parallel; }

    // Throws ParamError on violated invariants (positivity, TMR > 100%).
    void validate() const;
};

struct MagnetizationState {
    Vec3 m{0.0, 0.0, 1.0};

    static MagnetizationState parallel() { return {{0.0, 0.0, 1.0}}; }
    static MagnetizationState antiparallel() { return {{0.0, 0.0, -1.0}}; }
    // Unit vector tilted by `tilt_rad` from the +z or -z pole, in the xz plane.
    static MagnetizationState tilted(double tilt_rad, bool from_parallel);
};

// Uniaxial anisotropy field Hk (A/m) such that (1/2)*mu0*Ms*Hk*V equals the
// thermal barrier Delta*kB*T at params.temperature.
double derive_anisotropy_field(const MtjParams& params);

// Energy barrier implied by a given Hk; inverse of derive_anisotropy_field,
// used for round-trip checks.
double barrier_from_anisotropy_field(const MtjParams& params, double hk);

// Conductance linear in m_z: G = 0.5*((Gp+Gap) + (Gp-Gap)*m_z).
double conductance(const MagnetizationState& state, const MtjParams& params);
double resistance(const MagnetizationState& state, const MtjParams& params);

// H_eff = Hk*m_z*zhat + thermal. Demagnetization is lumped into Hk.
Vec3 effective_field(const MagnetizationState& state, const MtjParams& params,
                     const Vec3& thermal);

// Per-component standard deviation of the thermal field over one step of
// length dt: sigma^2 = 2*alpha*kB*T/(gamma*mu0^2*Ms*V*dt).
double thermal_field_sigma(const MtjParams& params, double temperature, double dt);

// Isotropic Gaussian field sample; zero vector at T = 0. Throws ParamError
// for dt <= 0 or T < 0.
Vec3 sample_thermal_field(const MtjParams& params, double temperature, double dt,
                          NormalSampler& rng);

// One Heun (predictor-corrector) step of the stochastic LLG with a
// Slonczewski spin-transfer term. `current` is the signed charge current from
// the free to the pinned terminal; positive current drives AP -> P. The
// thermal field is held fixed across the predictor and corrector stages
// (Stratonovich). Result is renormalized. Throws NumericError on non-finite
// intermediates.
MagnetizationState llg_step(const MagnetizationState& state, double current, double dt,
                            const MtjParams& params, const Vec3& thermal_field);

// Convenience overload for deterministic (zero thermal field) stepping.
MagnetizationState llg_step(const MagnetizationState& state, double current, double dt,
                            const MtjParams& params);

// Macrospin energy -(1/2)*mu0*Ms*V*Hk*m_z^2 in J; monotone non-increasing
// under zero-current, zero-temperature dynamics.
double macrospin_energy(const MagnetizationState& state, const MtjParams& params);

// Initial polar tilt (rad) sampled from the Boltzmann distribution of the
// uniaxial well via inverse transform on the energy.
double sample_equilibrium_tilt(const MtjParams& params, double temperature,
                               NormalSampler& rng);

struct SwitchingOptions {
    double dt = 1e-12;       // s; hard cap 10 ps enforced by llg_step
    double horizon = 50e-9;  // s
    double initial_tilt_deg = 1.0; // deterministic-mode tilt off the start pole
};

// Integrates from the non-target state until m_z crosses 0 toward the target
// set by the current sign. Returns the (interpolated) crossing time or
// nullopt if the horizon is exceeded. rng == nullptr selects deterministic
// mode regardless of temperature.
std::optional<double> switching_time(const MtjParams& params, double current,
                                     double temperature, NormalSampler* rng,
                                     const SwitchingOptions& opts = {});

// Minimal DC current that switches AP -> P within opts.horizon (T = 0,
// deterministic tilt), found by bisection. Throws CalibrationError if the
// bracket does not contain the threshold.
double measure_critical_current(const MtjParams& params, const SwitchingOptions& opts = {});

struct CalibrationResult {
    double spin_efficiency = 0.0;
    double measured_ic0 = 0.0; // A, re-measured with the calibrated efficiency
};

// Finds spin_efficiency such that measure_critical_current == ic0_target
// within 1%. The torque scales with the product efficiency*current, so the
// exact-inverse update converges in one or two rounds.
CalibrationResult calibrate_spin_efficiency(const MtjParams& params,
                                            const SwitchingOptions& opts = {});

// MTJ device instance: parameters plus live magnetization. The pinned-layer
// axis is +z; the sign convention for `current` in llg_step refers to the
// free->pinned direction of this device.
struct MtjDevice {
    MtjParams params;
    MagnetizationState state;

    double conductance_now() const { return conductance(state, params); }
    void step(double current_free_to_pinned, double dt, const Vec3& thermal) {
        state = llg_step(state, current_free_to_pinned, dt, params, thermal);
    }
};

} // namespace nvsram
