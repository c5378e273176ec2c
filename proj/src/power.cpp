#include "nvsram/power.hpp"

#include <cmath>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

int window_sample(const Trace& trace, double t, const char* which) {
    if (trace.time.empty()) throw ParamError("energy window: empty trace");
    if (t < trace.time.front() - 1e-18 || t > trace.time.back() + 1e-18)
        throw ParamError(std::string("energy window: ") + which + " outside the trace");
    return trace.sample_at_or_after(t);
}

} // namespace

double element_energy(const Trace& trace, const Netlist& netlist,
                      const std::string& element_label, double t_start, double t_end) {
    if (t_end < t_start) throw ParamError("energy window: end precedes start");
    const int idx = netlist.element_index(element_label);
    const int k0 = window_sample(trace, t_start, "start");
    const int k1 = window_sample(trace, t_end, "end");
    return trace.element_energy[k1][idx] - trace.element_energy[k0][idx];
}

double group_energy(const Trace& trace, const Netlist& netlist,
                    const std::vector<std::string>& labels, double t_start, double t_end) {
    double sum = 0.0;
    for (const auto& label : labels) sum += element_energy(trace, netlist, label, t_start, t_end);
    return sum;
}

EnergyBalance energy_balance(const Trace& trace, const Netlist& netlist) {
    EnergyBalance out;
    const int last = trace.sample_count() - 1;
    const std::vector<double>& v0 = trace.node_v.front();
    const std::vector<double>& v1 = trace.node_v.back();
    for (std::size_t k = 0; k < netlist.elements().size(); ++k) {
        const auto& e = netlist.elements()[k];
        const double energy = trace.element_energy[last][k];
        if (std::holds_alternative<VoltageSource>(e.payload)) {
            out.source_delivered += -energy;
        } else if (const auto* c = std::get_if<Capacitor>(&e.payload)) {
            const double dv0 = v0[c->a] - v0[c->b];
            const double dv1 = v1[c->a] - v1[c->b];
            out.stored_delta += 0.5 * c->capacitance * (dv1 * dv1 - dv0 * dv0);
        } else {
            out.dissipated += energy;
        }
    }
    const double mismatch =
        std::abs(out.source_delivered - out.dissipated - out.stored_delta);
    const double scale = std::max({std::abs(out.source_delivered), std::abs(out.dissipated),
                                   std::abs(out.stored_delta), 1e-30});
    out.relative_error = mismatch / scale;
    return out;
}

BackupRunEnergy run_backup_energy(const CellConfig& config, const TransientConfig& engine,
                                  Bit bit, const MagnetizationState& mtj1_state,
                                  const MagnetizationState& mtj2_state, bool baseline,
                                  double temperature, std::uint64_t seed1,
                                  std::uint64_t seed2) {
    CellInstance cell = build_cell(config, mtj1_state, mtj2_state, baseline);
    std::vector<double> state;
    run_operation(cell, script_write(bit, config), engine, state);

    std::vector<NormalSampler> streams;
    std::vector<NormalSampler>* rngs = nullptr;
    TransientConfig backup_engine = engine;
    if (temperature > 0.0) {
        streams.emplace_back(seed1);
        streams.emplace_back(seed2);
        cell.apply_thermal_tilt(temperature, streams[0], streams[1]);
        backup_engine.mtj_temperature = temperature;
        rngs = &streams;
    }

    const OperationScript script = script_backup(config, baseline);
    const OperationResult res = run_operation(cell, script, backup_engine, state, rngs);

    BackupRunEnergy out;
    out.write_path = group_energy(res.trace, cell.netlist, cell.write_path_labels,
                                  script.decode_start, script.decode_end) +
                     group_energy(res.trace, cell.netlist, cell.detector_labels,
                                  script.decode_start, script.decode_end);
    out.mtj_only = group_energy(res.trace, cell.netlist, {"MTJ1", "MTJ2"},
                                script.decode_start, script.decode_end);
    out.supply = -element_energy(res.trace, cell.netlist, "VDD", script.decode_start,
                                 script.decode_end);
    out.termination_time = res.termination_time;
    out.decoded = res.mtj_bits.value_or(MtjDecode::corrupt);
    return out;
}

EnergyReport backup_comparison(const CellConfig& config, const TransientConfig& engine) {
    // Worst case: initial MTJ states differ from the stored bit.
    const MagnetizationState p = MagnetizationState::tilted(0.0174532925199433, true);
    const MagnetizationState ap = MagnetizationState::tilted(0.0174532925199433, false);

    const BackupRunEnergy t1 = run_backup_energy(config, engine, Bit::one, ap, p, false);
    const BackupRunEnergy t0 = run_backup_energy(config, engine, Bit::zero, p, ap, false);
    const BackupRunEnergy b1 = run_backup_energy(config, engine, Bit::one, ap, p, true);
    const BackupRunEnergy b0 = run_backup_energy(config, engine, Bit::zero, p, ap, true);

    EnergyReport r;
    r.e_backup_0 = t0.write_path;
    r.e_backup_1 = t1.write_path;
    r.mean = 0.5 * (r.e_backup_0 + r.e_backup_1);
    r.baseline_0 = b0.write_path;
    r.baseline_1 = b1.write_path;
    r.baseline_mean = 0.5 * (r.baseline_0 + r.baseline_1);
    r.savings_percent = 100.0 * (r.baseline_mean - r.mean) / r.baseline_mean;
    r.supply_0 = t0.supply;
    r.supply_1 = t1.supply;
    r.supply_baseline_0 = b0.supply;
    r.supply_baseline_1 = b1.supply;
    const double supply_mean = 0.5 * (r.supply_0 + r.supply_1);
    const double supply_baseline_mean = 0.5 * (r.supply_baseline_0 + r.supply_baseline_1);
    r.supply_savings_percent =
        100.0 * (supply_baseline_mean - supply_mean) / supply_baseline_mean;
    r.termination_time_0 = t0.termination_time;
    r.termination_time_1 = t1.termination_time;
    return r;
}

} // namespace nvsram
