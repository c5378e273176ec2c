#include "nvsram/cell.hpp"

#include <cmath>
#include <sstream>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

MosfetParams nfet(const CellConfig& c, double beta) {
    return MosfetParams{MosfetPolarity::n, beta, c.vth, c.lambda};
}

MosfetParams pfet(const CellConfig& c, double beta) {
    return MosfetParams{MosfetPolarity::p, beta, c.vth, c.lambda};
}

// Signal labels; every cell source appears here with its inactive level.
std::map<std::string, double> inactive_levels(const CellConfig& c, bool termination_disabled) {
    std::map<std::string, double> levels{
        {"VDD", c.vdd},     {"WL", 0.0},      {"BL_DRV", c.vdd}, {"BLB_DRV", c.vdd},
        {"DRV_EN", 0.0},    {"DRV_ENB", c.vdd}, {"WRE", 0.0},    {"EN", c.vdd},
        {"RE", 0.0},        {"RESTORE", 0.0},
    };
    if (termination_disabled) levels["WT_FORCE"] = 0.0;
    return levels;
}

OperationScript base_script(const CellConfig& c, OperationKind kind, double duration) {
    OperationScript s;
    s.kind = kind;
    s.duration = duration;
    return s;
}

} // namespace

void CellConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw ConstructionError("cell config: " + msg); };
    if (!(vdd > 0)) fail("vdd must be positive");
    if (!(vth > 0) || vth >= vdd / 2) fail("vth must sit in (0, vdd/2)");
    if (!(v_buf > 0) || v_buf >= vdd) fail("v_buf must sit in (0, vdd)");
    if (v_buf <= vth || v_buf >= vdd - vth) fail("v_buf must sit inside the buffer's analog range");
    for (double b : {beta_pullup, beta_pulldown, beta_access, beta_x1, beta_x2, beta_buffer,
                     beta_logic, beta_driver})
        if (!(b > 0)) fail("transistor beta values must be positive");
    if (beta_access <= beta_pullup) fail("access device must be stronger than the pullup (writability)");
    if (beta_pulldown <= beta_access) fail("pulldown must be stronger than the access device (read stability)");
    for (double c : {c_node, c_latch, c_detect, c_wt, c_bitline, c_overlap})
        if (!(c > 0)) fail("capacitances must be positive");
    if (!(r_bleed > 0)) fail("bleed resistance must be positive");
    for (double t : {slew, write_wl_start, write_wl_width, write_duration, read_precharge_end,
                     read_wl_start, read_wl_width, read_duration, en_pulse, wre_window,
                     powerdown_ramp, powerdown_hold, restore_vdd_ramp, restore_equalize,
                     restore_window, restore_settle})
        if (!(t > 0)) fail("timing values must be positive");
    if (restore_equalize <= restore_vdd_ramp)
        fail("equalization must extend past the supply ramp");
    mtj.validate();
}

double CellConfig::buffer_beta_p() const {
    const double r = (v_buf - vth) / (vdd - v_buf - vth);
    return beta_buffer * r * r;
}

void CellInstance::set_mtj_states(const MagnetizationState& s1, const MagnetizationState& s2) {
    netlist.mtj_devices()[0].state = s1;
    netlist.mtj_devices()[1].state = s2;
}

void CellInstance::apply_thermal_tilt(double temperature, NormalSampler& rng1,
                                      NormalSampler& rng2) {
    auto tilt = [&](MtjDevice& dev, NormalSampler& rng) {
        const bool at_parallel = dev.state.m.z > 0.0;
        const double theta = sample_equilibrium_tilt(dev.params, temperature, rng);
        const double phi = 2.0 * 3.141592653589793 * rng.uniform01();
        const double s = std::sin(theta);
        const double c = std::cos(theta);
        dev.state.m = Vec3{s * std::cos(phi), s * std::sin(phi), at_parallel ? c : -c};
    };
    tilt(netlist.mtj_devices()[0], rng1);
    tilt(netlist.mtj_devices()[1], rng2);
}

CellInstance build_cell(const CellConfig& config, const MagnetizationState& mtj1_state,
                        const MagnetizationState& mtj2_state, bool termination_disabled) {
    config.validate();

    // "Long enough" check on the backup window: at least 10x the T = 0
    // switching time at the operating write current.
    {
        const double i_op = backup_operating_current(config);
        SwitchingOptions opts;
        opts.horizon = config.wre_window;
        const auto t_switch = switching_time(config.mtj, i_op, 0.0, nullptr, opts);
        if (!t_switch)
            throw ConstructionError(
                "cell config: backup operating current does not switch the MTJ within the WRE window");
        if (config.wre_window < 10.0 * *t_switch) {
            std::ostringstream os;
            os << "cell config: WRE window " << config.wre_window << " s is shorter than 10x the "
               << "T=0 switching time " << *t_switch << " s at the operating current " << i_op
               << " A";
            throw ConstructionError(os.str());
        }
    }

    CellInstance cell;
    cell.config = config;
    cell.termination_disabled = termination_disabled;
    Netlist& net = cell.netlist;

    const NodeId vddr = net.add_node("vddr");
    const NodeId q = net.add_node("q");
    const NodeId qc = net.add_node("qc");
    const NodeId n1a = net.add_node("1a");
    const NodeId n2a = net.add_node("2a");
    const NodeId b1m = net.add_node("1m");
    const NodeId n1b = net.add_node("1b");
    const NodeId b2m = net.add_node("2m");
    const NodeId n2b = net.add_node("2b");
    const NodeId wdn = net.add_node("wdn");
    const NodeId wd = net.add_node("WD");
    const NodeId wt = net.add_node("WT");
    const NodeId x1gn = net.add_node("x1gn");
    const NodeId x1g = net.add_node("x1g");
    const NodeId norm = net.add_node("norm");
    const NodeId ndm1 = net.add_node("ndm1");
    const NodeId ndm2 = net.add_node("ndm2");
    const NodeId bl = net.add_node("BL");
    const NodeId blb = net.add_node("BL_bar");
    const NodeId bld = net.add_node("bld");
    const NodeId blbd = net.add_node("blbd");
    const NodeId wl = net.add_node("wl");
    const NodeId wre = net.add_node("wre");
    const NodeId en = net.add_node("en");
    const NodeId re = net.add_node("re");
    const NodeId restore = net.add_node("restore");
    const NodeId drv_en = net.add_node("drv_en");
    const NodeId drv_enb = net.add_node("drv_enb");

    const auto levels = inactive_levels(config, termination_disabled);
    const auto src = [&](const std::string& label, NodeId n) {
        net.add_voltage_source(label, n, ground_node, Waveform(levels.at(label)));
    };
    src("VDD", vddr);
    src("WL", wl);
    src("BL_DRV", bld);
    src("BLB_DRV", blbd);
    src("DRV_EN", drv_en);
    src("DRV_ENB", drv_enb);
    src("WRE", wre);
    src("EN", en);
    src("RE", re);
    src("RESTORE", restore);

    // 6T SRAM core.
    net.add_mosfet("P1", qc, q, vddr, pfet(config, config.beta_pullup));
    net.add_mosfet("N1", qc, q, ground_node, nfet(config, config.beta_pulldown));
    net.add_mosfet("P2", q, qc, vddr, pfet(config, config.beta_pullup));
    net.add_mosfet("N2", q, qc, ground_node, nfet(config, config.beta_pulldown));
    net.add_mosfet("NA1", wl, bl, q, nfet(config, config.beta_access));
    net.add_mosfet("NA2", wl, blb, qc, nfet(config, config.beta_access));

    // Non-volatile pair; free layers at q/qc, pinned terminals at 1a/2a.
    cell.mtj1_element = net.add_mtj("MTJ1", q, n1a, MtjDevice{config.mtj, mtj1_state});
    cell.mtj2_element = net.add_mtj("MTJ2", qc, n2a, MtjDevice{config.mtj, mtj2_state});

    // Equalization bridge X1 as a transmission gate: the matching-state
    // divider levels sit near vdd - vth where a bare NMOS starves. The PMOS
    // leg's gate is the NOR output, already the complement of x1g.
    net.add_mosfet("X1", x1g, n1a, n2a, nfet(config, config.beta_x1));
    net.add_mosfet("X1P", x1gn, n1a, n2a, pfet(config, config.beta_x1));
    net.add_mosfet("X2", re, q, qc, nfet(config, config.beta_x2));

    // Detection buffers: two cascaded inverters per side, trip point at v_buf.
    const double beta_bn = config.beta_buffer;
    const double beta_bp = config.buffer_beta_p();
    const auto buffer = [&](const std::string& tag, NodeId in, NodeId mid, NodeId out) {
        net.add_mosfet(tag + "_P1", in, mid, vddr, pfet(config, beta_bp));
        net.add_mosfet(tag + "_N1", in, mid, ground_node, nfet(config, beta_bn));
        net.add_mosfet(tag + "_P2", mid, out, vddr, pfet(config, beta_bp));
        net.add_mosfet(tag + "_N2", mid, out, ground_node, nfet(config, beta_bn));
    };
    buffer("BUF1", n1a, b1m, n1b);
    buffer("BUF2", n2a, b2m, n2b);

    // WD = AND(WRE, 1b, 2b): NAND3 plus inverter.
    net.add_mosfet("ND_PA", wre, wdn, vddr, pfet(config, config.beta_logic));
    net.add_mosfet("ND_PB", n1b, wdn, vddr, pfet(config, config.beta_logic));
    net.add_mosfet("ND_PC", n2b, wdn, vddr, pfet(config, config.beta_logic));
    net.add_mosfet("ND_NA", wre, wdn, ndm1, nfet(config, config.beta_logic));
    net.add_mosfet("ND_NB", n1b, ndm1, ndm2, nfet(config, config.beta_logic));
    net.add_mosfet("ND_NC", n2b, ndm2, ground_node, nfet(config, config.beta_logic));
    net.add_mosfet("WD_P", wdn, wd, vddr, pfet(config, config.beta_logic));
    net.add_mosfet("WD_N", wdn, wd, ground_node, nfet(config, config.beta_logic));

    // WT: dynamic node. Pull-up conducts while EN is low; pull-down stack
    // conducts when WD and EN are both high.
    if (!termination_disabled) {
        const NodeId wtm = net.add_node("wtm");
        net.add_mosfet("WT_PU", en, wt, vddr, pfet(config, config.beta_logic));
        net.add_mosfet("WT_ND1", wd, wt, wtm, nfet(config, config.beta_logic));
        net.add_mosfet("WT_ND2", en, wtm, ground_node, nfet(config, config.beta_logic));
        net.add_capacitor("C_wtm", wtm, ground_node, config.c_node);
    } else {
        net.add_voltage_source("WT_FORCE", wt, ground_node, Waveform(0.0));
    }

    // X1 gate = OR(WT, restore): NOR2 plus inverter.
    net.add_mosfet("NOR_PA", wt, norm, vddr, pfet(config, config.beta_logic));
    net.add_mosfet("NOR_PB", restore, x1gn, norm, pfet(config, config.beta_logic));
    net.add_mosfet("NOR_NA", wt, x1gn, ground_node, nfet(config, config.beta_logic));
    net.add_mosfet("NOR_NB", restore, x1gn, ground_node, nfet(config, config.beta_logic));
    net.add_mosfet("X1G_P", x1gn, x1g, vddr, pfet(config, config.beta_logic));
    net.add_mosfet("X1G_N", x1gn, x1g, ground_node, nfet(config, config.beta_logic));

    // Bitline drivers: full pass gates so a read can float the bitlines.
    net.add_mosfet("DRV1_N", drv_en, bld, bl, nfet(config, config.beta_driver));
    net.add_mosfet("DRV1_P", drv_enb, bld, bl, pfet(config, config.beta_driver));
    net.add_mosfet("DRV2_N", drv_en, blbd, blb, nfet(config, config.beta_driver));
    net.add_mosfet("DRV2_P", drv_enb, blbd, blb, pfet(config, config.beta_driver));

    // Lumped node capacitances.
    const auto cap = [&](const std::string& label, NodeId n, double c) {
        net.add_capacitor(label, n, ground_node, c);
    };
    cap("C_q", q, config.c_latch);
    cap("C_qc", qc, config.c_latch);
    cap("C_1a", n1a, config.c_detect);
    cap("C_2a", n2a, config.c_detect);
    cap("C_1m", b1m, config.c_node);
    cap("C_1b", n1b, config.c_node);
    cap("C_2m", b2m, config.c_node);
    cap("C_2b", n2b, config.c_node);
    cap("C_wdn", wdn, config.c_node);
    cap("C_wd", wd, config.c_node);
    cap("C_wt", wt, config.c_wt);
    cap("C_x1gn", x1gn, config.c_node);
    cap("C_x1g", x1g, config.c_node);
    cap("C_norm", norm, config.c_node);
    cap("C_ndm1", ndm1, config.c_node);
    cap("C_ndm2", ndm2, config.c_node);
    cap("C_bl", bl, config.c_bitline);
    cap("C_blb", blb, config.c_bitline);

    // Gate overlap capacitance on the equalization transistors. The RE
    // falling edge kicks q/qc down together; nodes 1a/2a lag through Rp/Rap,
    // and that resistance asymmetry is what steers the released latch.
    net.add_capacitor("C_x2ov_q", re, q, config.c_overlap);
    net.add_capacitor("C_x2ov_qc", re, qc, config.c_overlap);
    net.add_capacitor("C_x1ov_1a", x1g, n1a, config.c_overlap);
    net.add_capacitor("C_x1ov_2a", x1g, n2a, config.c_overlap);

    // Bleed paths let q/qc and the bitlines discharge in power-down.
    net.add_resistor("R_bleed_q", q, ground_node, config.r_bleed);
    net.add_resistor("R_bleed_qc", qc, ground_node, config.r_bleed);
    net.add_resistor("R_bleed_bl", bl, ground_node, config.r_bleed);
    net.add_resistor("R_bleed_blb", blb, ground_node, config.r_bleed);

    net.set_probe("q", q);
    net.set_probe("qc", qc);
    net.set_probe("1a", n1a);
    net.set_probe("2a", n2a);
    net.set_probe("1b", n1b);
    net.set_probe("2b", n2b);
    net.set_probe("WT", wt);
    net.set_probe("WD", wd);
    net.set_probe("BL", bl);
    net.set_probe("BL_bar", blb);
    net.set_probe("WL", wl);
    net.set_probe("WRE", wre);
    net.set_probe("EN", en);
    net.set_probe("RE", re);
    net.set_probe("restore", restore);

    cell.write_path_labels = {"MTJ1", "MTJ2", "X1", "X1P"};
    cell.detector_labels = {"BUF1_P1", "BUF1_N1", "BUF1_P2", "BUF1_N2", "BUF2_P1", "BUF2_N1",
                            "BUF2_P2", "BUF2_N2", "ND_PA",   "ND_PB",   "ND_PC",   "ND_NA",
                            "ND_NB",   "ND_NC",   "WD_P",    "WD_N",    "NOR_PA",  "NOR_PB",
                            "NOR_NA",  "NOR_NB",  "X1G_P",   "X1G_N"};
    if (!termination_disabled) {
        cell.detector_labels.push_back("WT_PU");
        cell.detector_labels.push_back("WT_ND1");
        cell.detector_labels.push_back("WT_ND2");
    }

    net.validate();
    return cell;
}

OperationScript script_write(Bit bit, const CellConfig& c) {
    OperationScript s = base_script(c, OperationKind::write, c.write_duration);
    s.bit = bit;
    const double hi = c.vdd;
    const double bl_level = bit == Bit::one ? hi : 0.0;
    s.signals["BL_DRV"] = Waveform(bl_level);
    s.signals["BLB_DRV"] = Waveform(hi - bl_level);
    Waveform drv(0.0), drvb(hi);
    drv.ramp_to(0.05e-9, hi, c.slew).ramp_to(c.write_duration - 0.2e-9, 0.0, c.slew);
    drvb.ramp_to(0.05e-9, 0.0, c.slew).ramp_to(c.write_duration - 0.2e-9, hi, c.slew);
    s.signals["DRV_EN"] = drv;
    s.signals["DRV_ENB"] = drvb;
    Waveform wl(0.0);
    wl.ramp_to(c.write_wl_start, hi, c.slew)
        .ramp_to(c.write_wl_start + c.write_wl_width, 0.0, c.slew);
    s.signals["WL"] = wl;
    s.decode_start = c.write_duration - 0.5e-9;
    s.decode_end = c.write_duration;
    return s;
}

OperationScript script_read(const CellConfig& c) {
    OperationScript s = base_script(c, OperationKind::read, c.read_duration);
    const double hi = c.vdd;
    s.signals["BL_DRV"] = Waveform(hi);
    s.signals["BLB_DRV"] = Waveform(hi);
    Waveform drv(0.0), drvb(hi);
    drv.ramp_to(0.05e-9, hi, c.slew).ramp_to(c.read_precharge_end, 0.0, c.slew);
    drvb.ramp_to(0.05e-9, 0.0, c.slew).ramp_to(c.read_precharge_end, hi, c.slew);
    s.signals["DRV_EN"] = drv;
    s.signals["DRV_ENB"] = drvb;
    Waveform wl(0.0);
    wl.ramp_to(c.read_wl_start, hi, c.slew).ramp_to(c.read_wl_start + c.read_wl_width, 0.0, c.slew);
    s.signals["WL"] = wl;
    s.decode_start = c.read_duration - 0.5e-9;
    s.decode_end = c.read_duration;
    return s;
}

OperationScript script_backup(const CellConfig& c, bool baseline_wt) {
    const double t_rise = 0.05e-9;
    const double t_fall = t_rise + c.wre_window;
    OperationScript s = base_script(c, OperationKind::backup, t_fall + 0.4e-9);
    Waveform wre(0.0);
    wre.ramp_to(t_rise, c.vdd, c.slew).ramp_to(t_fall, 0.0, c.slew);
    s.signals["WRE"] = wre;
    Waveform en(c.vdd);
    en.ramp_to(0.1e-9, 0.0, c.slew).ramp_to(0.1e-9 + c.en_pulse, c.vdd, c.slew);
    s.signals["EN"] = en;
    if (baseline_wt) {
        Waveform wt(0.0);
        wt.ramp_to(0.1e-9, c.vdd, c.slew).ramp_to(t_fall, 0.0, c.slew);
        s.signals["WT_FORCE"] = wt;
    }
    s.decode_start = t_rise;
    s.decode_end = t_fall;
    return s;
}

OperationScript script_power_down(const CellConfig& c) {
    const double t_off = 0.1e-9;
    OperationScript s =
        base_script(c, OperationKind::power_down, t_off + c.powerdown_ramp + c.powerdown_hold);
    Waveform vdd(c.vdd);
    vdd.ramp_to(t_off, 0.0, c.powerdown_ramp);
    s.signals["VDD"] = vdd;
    Waveform en(c.vdd);
    en.ramp_to(t_off, 0.0, c.powerdown_ramp);
    s.signals["EN"] = en;
    s.decode_start = s.decode_end = s.duration;
    return s;
}

OperationScript script_restore(const CellConfig& c) {
    OperationScript s = base_script(c, OperationKind::restore,
                                    c.restore_equalize + c.restore_window + c.restore_settle);
    // Supply returns while X2 holds q = qc, so the latch cannot resolve from
    // the power-up race; EN tracks the rail to keep the WT pull-up off.
    Waveform vdd(0.0);
    vdd.add(0.0, 0.0).add(c.restore_vdd_ramp, c.vdd);
    s.signals["VDD"] = vdd;
    Waveform en(0.0);
    en.add(0.0, 0.0).add(c.restore_vdd_ramp, c.vdd);
    s.signals["EN"] = en;
    Waveform re(0.0);
    re.add(0.0, 0.0).add(c.restore_vdd_ramp, c.vdd);
    re.ramp_to(c.restore_equalize, 0.0, c.slew);
    s.signals["RE"] = re;
    Waveform restore(0.0);
    restore.ramp_to(c.restore_equalize, c.vdd, c.slew)
        .ramp_to(c.restore_equalize + c.restore_window, 0.0, c.slew);
    s.signals["RESTORE"] = restore;
    s.decode_start = s.duration - 0.5e-9;
    s.decode_end = s.duration;
    return s;
}

OperationScript script_hold(const CellConfig& c, double duration) {
    return base_script(c, OperationKind::hold, duration);
}

Bit decode_sram(const Trace& trace, double t_decode, double vdd) {
    const int k = trace.sample_at_or_after(t_decode);
    const double q = trace.voltage("q", k);
    const double qc = trace.voltage("qc", k);
    if (std::abs(q - qc) < 0.1 * vdd) {
        std::ostringstream os;
        os << "indeterminate SRAM state at t=" << trace.time[k] << " s (q=" << q << " V, qc=" << qc
           << " V)";
        throw DecodeError(os.str());
    }
    if (q > vdd / 2 && qc < vdd / 2) return Bit::one;
    if (q < vdd / 2 && qc > vdd / 2) return Bit::zero;
    throw DecodeError("SRAM nodes do not straddle vdd/2");
}

Bit decode_read_bitlines(const Trace& trace, double t_decode, double vdd) {
    const int k = trace.sample_at_or_after(t_decode);
    const double bl = trace.voltage("BL", k);
    const double blb = trace.voltage("BL_bar", k);
    if (bl - blb > 0.1 * vdd) return Bit::one;
    if (blb - bl > 0.1 * vdd) return Bit::zero;
    std::ostringstream os;
    os << "read decode indeterminate (BL=" << bl << " V, BL_bar=" << blb << " V)";
    throw DecodeError(os.str());
}

MtjDecode decode_mtj(const CellInstance& cell) {
    const double mz1 = cell.mtj1().state.m.z;
    const double mz2 = cell.mtj2().state.m.z;
    const bool settled = std::abs(mz1) > 0.9 && std::abs(mz2) > 0.9;
    if (!settled) return MtjDecode::corrupt;
    if (mz1 > 0 && mz2 < 0) return MtjDecode::one;
    if (mz1 < 0 && mz2 > 0) return MtjDecode::zero;
    return MtjDecode::corrupt;
}

std::optional<double> detect_termination_time(const Trace& trace, double vdd) {
    const auto en_rise = trace.crossing_time("EN", vdd / 2, true, 0.0);
    if (!en_rise) return std::nullopt;
    return trace.crossing_time("WT", vdd / 2, false, *en_rise);
}

OperationResult run_operation(CellInstance& cell, const OperationScript& script,
                              const TransientConfig& engine, std::vector<double>& node_state,
                              std::vector<NormalSampler>* mtj_rngs) {
    if (cell.termination_disabled && script.kind == OperationKind::backup &&
        !script.signals.count("WT_FORCE"))
        throw ParamError("backup on a termination-disabled cell needs the baseline script");

    // The exact pole is a stagnation point of the T = 0 dynamics, and damping
    // collapses any tilt during idle stretches. Deterministic backup/restore
    // runs therefore re-seed the standard 1-degree tilt; thermal runs carry
    // their sampled state instead.
    if (!mtj_rngs &&
        (script.kind == OperationKind::backup || script.kind == OperationKind::restore)) {
        constexpr double min_tilt = 0.0174532925199433; // 1 degree
        for (MtjDevice& dev : cell.netlist.mtj_devices()) {
            if (std::abs(dev.state.m.z) > std::cos(min_tilt))
                dev.state = MagnetizationState::tilted(min_tilt, dev.state.m.z > 0.0);
        }
    }

    // Reset every source to its inactive level, then apply the script.
    for (const auto& [label, level] : inactive_levels(cell.config, cell.termination_disabled))
        cell.netlist.source(label).waveform = Waveform(level);
    for (const auto& [label, waveform] : script.signals)
        cell.netlist.source(label).waveform = waveform;

    TransientConfig cfg = engine;
    cfg.t_end = script.duration;

    OperationResult result;
    result.kind = script.kind;
    try {
        const std::vector<double>* init = node_state.empty() ? nullptr : &node_state;
        result.trace = transient(cell.netlist, cfg, init, mtj_rngs);
    } catch (const SolverError& err) {
        const char* names[] = {"write", "read", "backup", "power-down", "restore", "hold"};
        throw SolverError(std::string(names[static_cast<int>(script.kind)]) +
                          " operation: " + err.what());
    }
    node_state = result.trace.final_node_v;

    const double vdd = cell.config.vdd;
    switch (script.kind) {
        case OperationKind::write:
            result.sram_bit = decode_sram(result.trace, script.decode_end, vdd);
            break;
        case OperationKind::read:
            result.read_bit = decode_read_bitlines(result.trace, script.decode_end, vdd);
            result.sram_bit = decode_sram(result.trace, script.decode_end, vdd);
            break;
        case OperationKind::backup:
            result.mtj_bits = decode_mtj(cell);
            result.termination_time = detect_termination_time(result.trace, vdd);
            break;
        case OperationKind::restore:
            result.sram_bit = decode_sram(result.trace, script.decode_end, vdd);
            break;
        case OperationKind::power_down:
        case OperationKind::hold:
            break;
    }
    return result;
}

DividerLevels divider_levels(const CellConfig& config, Bit bit,
                             const MagnetizationState& mtj1_state,
                             const MagnetizationState& mtj2_state,
                             std::optional<double> r_x1) {
    const double r1 = resistance(mtj1_state, config.mtj);
    const double r2 = resistance(mtj2_state, config.mtj);
    const double vdd = config.vdd;
    // MTJ1 hangs off q, MTJ2 off qc; the stored bit sets which end is high.
    const double r_high = bit == Bit::one ? r1 : r2;
    const double r_low = bit == Bit::one ? r2 : r1;

    double current = 0.0;
    double v_hi_inner = 0.0;
    double v_lo_inner = 0.0;
    double rx = 0.0;
    if (r_x1) {
        rx = *r_x1;
        if (!(rx > 0)) throw ParamError("divider levels: X1 resistance must be positive");
        current = vdd / (r_high + rx + r_low);
        v_hi_inner = vdd - current * r_high;
        v_lo_inner = current * r_low;
    } else {
        // Self-consistent X1 drop under the square law, solved as a scalar
        // equation in the branch current. X1 is a transmission gate with the
        // NMOS gate at vdd and the PMOS gate at ground while WT is high.
        const MosfetParams x1{MosfetPolarity::n, config.beta_x1, config.vth, config.lambda};
        const auto gate_current = [&](double v_hi, double v_lo) {
            // Drain at the high node for the N leg; the P leg mirrors.
            return mosfet_current(MosfetPolarity::n, vdd - v_lo, v_hi - v_lo, x1) -
                   mosfet_current(MosfetPolarity::p, 0.0 - v_hi, v_lo - v_hi, x1);
        };
        const auto mismatch = [&](double i) {
            const double vh = vdd - i * r_high;
            const double vl = i * r_low;
            return gate_current(vh, vl) - i;
        };
        double lo = 0.0;
        double hi = vdd / (r_high + r_low);
        if (mismatch(lo) <= 0)
            throw ParamError("divider levels: X1 does not conduct at the given bias");
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (mismatch(mid) > 0 ? lo : hi) = mid;
        }
        current = 0.5 * (lo + hi);
        v_hi_inner = vdd - current * r_high;
        v_lo_inner = current * r_low;
        rx = (v_hi_inner - v_lo_inner) / current;
    }

    DividerLevels out;
    out.current = current;
    out.x1_on_resistance = rx;
    if (bit == Bit::one) {
        out.v_1a = v_hi_inner;
        out.v_2a = v_lo_inner;
    } else {
        out.v_2a = v_hi_inner;
        out.v_1a = v_lo_inner;
    }
    return out;
}

double backup_operating_current(const CellConfig& config) {
    // Worst case: stored bit differs from the MTJ states (AP next to the high
    // node), which is also the slower-switching series combination.
    const DividerLevels lv = divider_levels(config, Bit::one, MagnetizationState::antiparallel(),
                                            MagnetizationState::parallel());
    return lv.current;
}

PipelineResult run_pipeline(CellInstance& cell, Bit bit, const TransientConfig& engine) {
    PipelineResult out;
    std::vector<double> state;
    out.operations.push_back(run_operation(cell, script_write(bit, cell.config), engine, state));
    out.operations.push_back(run_operation(cell, script_backup(cell.config), engine, state));
    out.operations.push_back(
        run_operation(cell, script_power_down(cell.config), engine, state));
    out.operations.push_back(run_operation(cell, script_restore(cell.config), engine, state));
    out.operations.push_back(run_operation(cell, script_read(cell.config), engine, state));
    if (!out.operations.back().read_bit) throw DecodeError("pipeline read returned no bit");
    out.final_read = *out.operations.back().read_bit;
    return out;
}

} // namespace nvsram
