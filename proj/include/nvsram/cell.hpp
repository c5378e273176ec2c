#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvsram/mtj.hpp"
#include "nvsram/netlist.hpp"
#include "nvsram/transient.hpp"
#include "nvsram/waveform.hpp"

namespace nvsram {

enum class Bit { zero, one };

inline Bit complement(Bit b) { return b == Bit::one ? Bit::zero : Bit::one; }

// MTJ pair decode: '1' <=> (MTJ1 = P, MTJ2 = AP), '0' <=> (MTJ1 = AP,
// MTJ2 = P). Mixed or unsettled pairs are reported as corrupt, never as a bit.
enum class MtjDecode { zero, one, corrupt };

enum class OperationKind { write, read, backup, power_down, restore, hold };

struct CellConfig {
    double vdd = 0.8;
    double vth = 0.25;
    double lambda = 0.1;

    // Square-law transconductances, A/V^2. SRAM core sized for writability
    // (access > pullup) and read stability (pulldown > access).
    double beta_pullup = 3e-3;
    double beta_pulldown = 12e-3;
    double beta_access = 6e-3;
    double beta_x1 = 20e-3;  // per transmission-gate leg
    double beta_x2 = 8e-3;
    double beta_buffer = 0.5e-3; // N device; P device set by the v_buf ratio
    double beta_logic = 2e-3;
    double beta_driver = 8e-3;

    // Buffer switching threshold, realized via the inverter beta ratio. Sits
    // 50 mV under the matching-state divider level so that a lone switching
    // MTJ (mismatched initial pair) is past the equator before WD fires and
    // the write current is cut; termination then cannot strand it.
    double v_buf = 0.4905;

    // Lumped node capacitances.
    double c_node = 0.1e-15;
    double c_latch = 4e-15;   // q/qc; keeps the latch regeneration slower than
                              // the 1 ps step so backward Euler resolves it
    double c_detect = 2e-15;  // nodes 1a/2a; slows them against q/qc so the
                              // Rp/Rap asymmetry steers the restore release
    double c_wt = 0.2e-15;    // dynamic node
    double c_bitline = 10e-15;
    double c_overlap = 0.02e-15; // X1/X2 gate overlap capacitance
    double r_bleed = 0.5e6;      // q/qc/bitline leak path for power-down

    MtjParams mtj;

    // Timing. Control edges use `slew`.
    double slew = 20e-12;
    double write_wl_start = 0.2e-9;
    double write_wl_width = 2e-9;
    double write_duration = 3e-9;
    double read_precharge_end = 1e-9;
    double read_wl_start = 1.2e-9;
    double read_wl_width = 2e-9;
    double read_duration = 4e-9;
    double en_pulse = 100e-12;  // "very short" low pulse at backup start
    double wre_window = 30e-9;  // "long enough" for switching plus margin
    double powerdown_ramp = 1e-9;
    double powerdown_hold = 15e-9;
    double restore_vdd_ramp = 1e-9;   // supply returns while X2 equalizes
    double restore_equalize = 2e-9;   // RE high period (from script start)
    double restore_window = 3e-9;     // X1 on after the RE falling edge
    double restore_settle = 1e-9;

    void validate() const;
    // P-device beta giving an inverter trip point at v_buf.
    double buffer_beta_p() const;
};

struct OperationScript {
    OperationKind kind = OperationKind::hold;
    std::optional<Bit> bit; // write payload
    std::map<std::string, Waveform> signals;
    double duration = 0.0;
    double decode_start = 0.0;
    double decode_end = 0.0;
};

class CellInstance {
public:
    Netlist netlist;
    CellConfig config;
    bool termination_disabled = false;
    int mtj1_element = -1;
    int mtj2_element = -1;
    std::vector<std::string> write_path_labels; // MTJ1, MTJ2, X1
    std::vector<std::string> detector_labels;   // buffers, WD gate, WT node devices, X1 gate logic

    MtjDevice& mtj1() { return netlist.mtj_devices()[0]; }
    MtjDevice& mtj2() { return netlist.mtj_devices()[1]; }
    const MtjDevice& mtj1() const { return netlist.mtj_devices()[0]; }
    const MtjDevice& mtj2() const { return netlist.mtj_devices()[1]; }

    void set_mtj_states(const MagnetizationState& s1, const MagnetizationState& s2);
    // Replaces the pole states with equilibrium thermal tilts (one stream per
    // device), for stochastic full-cell runs.
    void apply_thermal_tilt(double temperature, NormalSampler& rng1, NormalSampler& rng2);
};

// Builds the cell netlist: 6T SRAM core, MTJ pair, equalization transistors
// X1/X2, detection buffers, WD = AND(WRE, 1b, 2b), dynamic WT node, and the
// bitline drivers. With `termination_disabled` the WT node is driven by an
// explicit source (held high for the whole WRE window during backup) instead
// of the detector, for baseline energy comparisons.
CellInstance build_cell(const CellConfig& config,
                        const MagnetizationState& mtj1_state = MagnetizationState::antiparallel(),
                        const MagnetizationState& mtj2_state = MagnetizationState::parallel(),
                        bool termination_disabled = false);

OperationScript script_write(Bit bit, const CellConfig& config);
OperationScript script_read(const CellConfig& config);
OperationScript script_backup(const CellConfig& config, bool baseline_wt = false);
OperationScript script_power_down(const CellConfig& config);
OperationScript script_restore(const CellConfig& config);
// All signals at inactive levels for `duration`; used for hold checks.
OperationScript script_hold(const CellConfig& config, double duration);

struct OperationResult {
    OperationKind kind = OperationKind::hold;
    Trace trace;
    std::optional<Bit> sram_bit;          // write/restore decode
    std::optional<Bit> read_bit;          // read decode (bitline compare)
    std::optional<MtjDecode> mtj_bits;    // backup decode
    std::optional<double> termination_time; // backup only
};

// Runs the script on the cell (exclusive access; advances MTJ state),
// decodes per the operation kind, and carries node state in/out through
// `node_state`. An empty `node_state` starts from the DC operating point.
OperationResult run_operation(CellInstance& cell, const OperationScript& script,
                              const TransientConfig& engine,
                              std::vector<double>& node_state,
                              std::vector<NormalSampler>* mtj_rngs = nullptr);

// q > vdd/2 and qc < vdd/2 at the window end decodes 1 (mirror for 0).
// Indeterminate splits (|q - qc| < 0.1*vdd) raise DecodeError.
Bit decode_sram(const Trace& trace, double t_decode, double vdd);
// Which bitline discharged after the read float.
Bit decode_read_bitlines(const Trace& trace, double t_decode, double vdd);
MtjDecode decode_mtj(const CellInstance& cell);
// First WT falling crossing of vdd/2 after the EN rising edge.
std::optional<double> detect_termination_time(const Trace& trace, double vdd);

struct DividerLevels {
    double v_1a = 0.0;
    double v_2a = 0.0;
    double x1_on_resistance = 0.0; // effective, at the solved operating point
    double current = 0.0;          // magnitude through the bridge
};

// Hand-analysis oracle: series divider q -- MTJ1 -- X1 -- MTJ2 -- qc with
// ideal rail endpoints. With `r_x1` the X1 drop is the given linear
// resistance; otherwise the square-law X1 is solved self-consistently by
// scalar bisection (still independent of the MNA engine).
DividerLevels divider_levels(const CellConfig& config, Bit bit,
                             const MagnetizationState& mtj1_state,
                             const MagnetizationState& mtj2_state,
                             std::optional<double> r_x1 = std::nullopt);

// Deterministic write current estimate for the differing-state backup path,
// from the divider oracle.
double backup_operating_current(const CellConfig& config);

struct PipelineResult {
    std::vector<OperationResult> operations;
    Bit final_read = Bit::zero;
};

// write(bit) -> backup -> power-down -> restore -> read, chained.
PipelineResult run_pipeline(CellInstance& cell, Bit bit, const TransientConfig& engine);

} // namespace nvsram
