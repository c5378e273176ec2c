#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvsram/cell.hpp"
#include "nvsram/transient.hpp"

namespace nvsram {

// Trapezoidal integral of v*i for one element over [t_start, t_end], taken
// from the trace's cumulative per-element energy series (so windows sharing
// a boundary add exactly). Throws ParamError when the window leaves the trace.
double element_energy(const Trace& trace, const Netlist& netlist,
                      const std::string& element_label, double t_start, double t_end);

// Sum of element_energy over a set of labels.
double group_energy(const Trace& trace, const Netlist& netlist,
                    const std::vector<std::string>& labels, double t_start, double t_end);

struct EnergyBalance {
    double source_delivered = 0.0; // J, all sources
    double dissipated = 0.0;       // J, resistors + mosfets + mtjs
    double stored_delta = 0.0;     // J, capacitors 1/2*C*dV^2
    double relative_error = 0.0;   // |delivered - dissipated - stored| / scale
};

EnergyBalance energy_balance(const Trace& trace, const Netlist& netlist);

struct BackupRunEnergy {
    double write_path = 0.0;   // MTJ pair + X1 + detector, over the WRE window
    double mtj_only = 0.0;     // MTJ pair alone
    double supply = 0.0;       // delivered by the VDD source over the window
    std::optional<double> termination_time;
    MtjDecode decoded = MtjDecode::corrupt;
};

// One backup run on a freshly built cell whose SRAM already holds `bit` and
// whose MTJs start in the given states. `baseline` holds WT high for the
// whole WRE window (termination disabled). Thermal mode takes two seeds.
BackupRunEnergy run_backup_energy(const CellConfig& config, const TransientConfig& engine,
                                  Bit bit, const MagnetizationState& mtj1_state,
                                  const MagnetizationState& mtj2_state, bool baseline,
                                  double temperature = 0.0,
                                  std::uint64_t seed1 = 0, std::uint64_t seed2 = 0);

struct EnergyReport {
    // Write-path scope (MTJ pair + X1 + detector), Table-II-style rows.
    double e_backup_0 = 0.0;
    double e_backup_1 = 0.0;
    double mean = 0.0;
    double baseline_0 = 0.0;
    double baseline_1 = 0.0;
    double baseline_mean = 0.0;
    double savings_percent = 0.0;
    // Supply-inclusive scope (everything the rail delivers in the window).
    double supply_0 = 0.0;
    double supply_1 = 0.0;
    double supply_baseline_0 = 0.0;
    double supply_baseline_1 = 0.0;
    double supply_savings_percent = 0.0;
    std::optional<double> termination_time_0;
    std::optional<double> termination_time_1;
};

// Deterministic with/without-termination comparison: backup of both bits from
// worst-case (differing) initial MTJ states, terminated and baseline modes.
EnergyReport backup_comparison(const CellConfig& config, const TransientConfig& engine);

} // namespace nvsram
