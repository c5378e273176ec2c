#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvsram/netlist.hpp"
#include "nvsram/rng.hpp"

namespace nvsram {

struct TransientConfig {
    double dt = 1e-12;          // s
    double t_end = 0.0;         // s, duration of the run
    double newton_tol = 1e-6;   // V, max |dV| between iterates
    int newton_max_iters = 50;
    double gmin = 1e-12;        // S, shunt to ground on every node
    int sample_stride = 1;
    // Extra convergence requirement on the nodal current residual; keeps the
    // recorded KCL residual below 1e-9 A independent of circuit impedance.
    double current_tol = 1e-10; // A

    // Thermal noise for MTJ devices; 0 disables. When positive, the caller
    // must supply one NormalSampler per MTJ device.
    double mtj_temperature = 0.0;

    void validate() const;
};

// Time-sampled record of one transient run. Sample 0 is the initial state.
struct Trace {
    std::vector<double> time;
    std::vector<std::string> node_names;              // index = NodeId
    std::vector<std::vector<double>> node_v;          // [sample][node]
    std::vector<std::string> element_labels;
    std::vector<std::vector<double>> element_i;       // [sample][element]
    std::vector<std::vector<double>> element_energy;  // cumulative J, [sample][element]
    std::vector<std::vector<double>> source_power;    // delivered W, [sample][source index]
    std::vector<std::vector<double>> mtj_mz;          // [sample][device]
    std::map<std::string, NodeId> probes;
    double dt = 0.0;
    int sample_stride = 1;
    double max_kcl_residual = 0.0; // A, over every accepted step, gmin excluded
    double max_norm_error = 0.0;   // max | ||m|| - 1 | over every step
    std::vector<double> final_node_v; // state carry for operation chaining

    int sample_count() const { return static_cast<int>(time.size()); }
    double voltage(const std::string& probe_label, int sample) const;
    const std::vector<double>& voltage_series(const std::string& probe_label,
                                              std::vector<double>& out) const;
    // First sample index with time >= t; throws ParamError past the end.
    int sample_at_or_after(double t) const;
    // Linear-interpolated time of the first crossing of `level` by the probe
    // after `t_from`; rising or falling edge selectable.
    std::optional<double> crossing_time(const std::string& probe_label, double level,
                                        bool rising, double t_from) const;
    void check_finite() const; // throws NumericError on any non-finite sample
};

// Newton solve of the static MNA system (capacitors open) at time t.
// Returns node voltages indexed by NodeId (ground = 0). A caller-supplied
// guess selects among multiple operating points of bistable circuits.
std::vector<double> dc_operating_point(Netlist& netlist, double t,
                                       const TransientConfig& config,
                                       const std::vector<double>* guess = nullptr);

// Fixed-step backward-Euler transient with per-step Newton iteration.
// Operator splitting: each accepted step solves the circuit with frozen
// magnetization, then advances every MTJ with the branch current just
// solved. `initial_v` carries state between runs; nullptr starts from the
// DC operating point at t = 0. When config.mtj_temperature > 0, `mtj_rngs`
// must hold one stream per MTJ device.
Trace transient(Netlist& netlist, const TransientConfig& config,
                const std::vector<double>* initial_v = nullptr,
                std::vector<NormalSampler>* mtj_rngs = nullptr);

// Maximum over non-ground nodes of the absolute sum of element currents at
// one sample, recomputed from the sampled node voltages (recorded branch
// currents are used for voltage sources). Exact for sample_stride == 1.
double kcl_residual(const Netlist& netlist, const Trace& trace, int sample);

} // namespace nvsram
