#include <doctest.h>

#include <cmath>

#include "nvsram/errors.hpp"
#include "nvsram/netlist.hpp"
#include "nvsram/transient.hpp"

using namespace nvsram;

namespace {

MosfetParams nfet(double beta = 1e-4, double vth = 0.25, double lambda = 0.0) {
    return {MosfetPolarity::n, beta, vth, lambda};
}

} // namespace

TEST_CASE("square-law regions and the worked saturation value") {
    const MosfetParams p = nfet();
    CHECK(mosfet_current(MosfetPolarity::n, 0.0, 0.5, p) == 0.0);
    CHECK(mosfet_current(MosfetPolarity::n, 0.8, 0.0, p) == 0.0);
    CHECK(mosfet_current(MosfetPolarity::n, 0.8, 0.8, p) ==
          doctest::Approx(15.125e-6).epsilon(1e-12));

    // Continuity at the triode/saturation boundary, lambda = 0.
    const double vov = 0.55;
    const double triode = p.beta * (vov * vov - 0.5 * vov * vov);
    const double sat = 0.5 * p.beta * vov * vov;
    CHECK(triode == doctest::Approx(sat).epsilon(1e-14));
    const double just_below = mosfet_current(MosfetPolarity::n, 0.8, vov - 1e-9, p);
    const double just_above = mosfet_current(MosfetPolarity::n, 0.8, vov + 1e-9, p);
    CHECK(std::abs(just_below - just_above) < 1e-12);

    // Symmetric device: swapped terminals mirror the current.
    CHECK(mosfet_current(MosfetPolarity::n, 0.8, -0.3, p) ==
          doctest::Approx(-mosfet_current(MosfetPolarity::n, 0.8 + 0.3, 0.3, p)).epsilon(1e-12));

    // P device mirrors the N device.
    CHECK(mosfet_current(MosfetPolarity::p, -0.8, -0.8, p) ==
          doctest::Approx(-15.125e-6).epsilon(1e-12));
}

TEST_CASE("dc operating point: resistor divider and quiescent null") {
    Netlist net;
    const NodeId top = net.add_node("top");
    const NodeId mid = net.add_node("mid");
    net.add_voltage_source("V1", top, ground_node, Waveform(0.8));
    net.add_resistor("R1", top, mid, 5.5e3);
    net.add_resistor("R2", mid, ground_node, 12.0e3);
    TransientConfig cfg;
    cfg.t_end = 1e-12;
    const auto v = dc_operating_point(net, 0.0, cfg);
    // gmin shunts shift the node by a few nV; that is by design.
    CHECK(v[mid] == doctest::Approx(0.8 * 12.0 / 17.5).epsilon(1e-6));

    net.source("V1").waveform = Waveform(0.0);
    const auto v0 = dc_operating_point(net, 0.0, cfg);
    CHECK(std::abs(v0[top]) < 1e-12);
    CHECK(std::abs(v0[mid]) < 1e-12);
}

TEST_CASE("dc operating point: cross-coupled inverters with q forced high") {
    Netlist net;
    const NodeId vddr = net.add_node("vddr");
    const NodeId q = net.add_node("q");
    const NodeId qc = net.add_node("qc");
    net.add_voltage_source("VDD", vddr, ground_node, Waveform(0.8));
    net.add_voltage_source("VQ", q, ground_node, Waveform(0.8)); // force
    const MosfetParams pull_up{MosfetPolarity::p, 3e-3, 0.25, 0.1};
    const MosfetParams pull_dn{MosfetPolarity::n, 12e-3, 0.25, 0.1};
    net.add_mosfet("P1", qc, q, vddr, pull_up);
    net.add_mosfet("N1", qc, q, ground_node, pull_dn);
    net.add_mosfet("P2", q, qc, vddr, pull_up);
    net.add_mosfet("N2", q, qc, ground_node, pull_dn);
    TransientConfig cfg;
    cfg.t_end = 1e-12;
    const auto v = dc_operating_point(net, 0.0, cfg);
    CHECK(v[qc] < 0.25); // below the pull-down threshold region: logic 0
    CHECK(v[q] == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("transient RC charging matches the closed form") {
    Netlist net;
    const NodeId in = net.add_node("in");
    const NodeId out = net.add_node("out");
    Waveform step(0.0);
    step.add(0.0, 0.0).add(1e-15, 0.8);
    net.add_voltage_source("V1", in, ground_node, step);
    net.add_resistor("R1", in, out, 10e3);
    net.add_capacitor("C1", out, ground_node, 1e-15);
    net.set_probe("out", out);

    TransientConfig cfg;
    cfg.dt = 0.25e-12;
    cfg.t_end = 30e-12;
    Trace tr = transient(net, cfg);

    const int k = tr.sample_at_or_after(10e-12);
    const double expected = 0.8 * (1.0 - std::exp(-1.0));
    CHECK(std::abs(tr.voltage("out", k) - expected) / expected < 0.02);

    // Energy identity on the full charge: resistor dissipates C*V^2/2 within
    // a couple percent once the node has settled.
    const int last = tr.sample_count() - 1;
    const int r_idx = net.element_index("R1");
    const int c_idx = net.element_index("C1");
    const int s_idx = net.element_index("V1");
    const double e_r = tr.element_energy[last][r_idx];
    const double e_half_cv2 = 0.5 * 1e-15 * 0.8 * 0.8;
    CHECK(std::abs(e_r - e_half_cv2) / e_half_cv2 < 0.02);

    // Global balance: source energy = dissipated + stored, within 1%.
    const double e_src = -tr.element_energy[last][s_idx]; // source absorbs negative energy
    const double v_end = tr.voltage("out", last);
    const double e_stored = 0.5 * 1e-15 * v_end * v_end;
    CHECK(std::abs(e_src - (e_r + e_stored)) / e_src < 0.01);

    // KCL residual on accepted steps.
    CHECK(tr.max_kcl_residual < 1e-9);
    CHECK(kcl_residual(net, tr, tr.sample_count() / 2) < 1e-9);

    // Artificial perturbation of one node raises the recomputed residual.
    Trace bent = tr;
    bent.node_v[tr.sample_count() / 2][out] += 1e-3;
    CHECK(kcl_residual(net, bent, tr.sample_count() / 2) >
          kcl_residual(net, tr, tr.sample_count() / 2));
}

TEST_CASE("zero-stimulus netlist produces an identically zero trace") {
    Netlist net;
    const NodeId a = net.add_node("a");
    const NodeId b = net.add_node("b");
    net.add_voltage_source("V1", a, ground_node, Waveform(0.0));
    net.add_resistor("R1", a, b, 1e3);
    net.add_capacitor("C1", b, ground_node, 1e-15);
    net.set_probe("b", b);
    TransientConfig cfg;
    cfg.dt = 1e-12;
    cfg.t_end = 100e-12;
    Trace tr = transient(net, cfg);
    for (int k = 0; k < tr.sample_count(); ++k) {
        CHECK(std::abs(tr.voltage("b", k)) < 1e-15);
    }
    CHECK(kcl_residual(net, tr, tr.sample_count() - 1) == 0.0);
}

TEST_CASE("transient determinism: identical runs give identical traces") {
    const auto run = [] {
        Netlist net;
        const NodeId in = net.add_node("in");
        const NodeId out = net.add_node("out");
        Waveform w(0.0);
        w.ramp_to(5e-12, 0.8, 10e-12);
        net.add_voltage_source("V1", in, ground_node, w);
        net.add_resistor("R1", in, out, 10e3);
        net.add_capacitor("C1", out, ground_node, 1e-15);
        net.add_mosfet("M1", in, out, ground_node, MosfetParams{MosfetPolarity::n, 1e-4, 0.25, 0.1});
        net.set_probe("out", out);
        TransientConfig cfg;
        cfg.dt = 1e-12;
        cfg.t_end = 50e-12;
        return transient(net, cfg);
    };
    const Trace a = run();
    const Trace b = run();
    REQUIRE(a.sample_count() == b.sample_count());
    for (int k = 0; k < a.sample_count(); ++k)
        for (std::size_t n = 0; n < a.node_v[k].size(); ++n) CHECK(a.node_v[k][n] == b.node_v[k][n]);
}

TEST_CASE("step refinement on the RC benchmark") {
    const auto run = [](double dt) {
        Netlist net;
        const NodeId in = net.add_node("in");
        const NodeId out = net.add_node("out");
        Waveform step(0.0);
        step.add(0.0, 0.0).add(1e-16, 0.8);
        net.add_voltage_source("V1", in, ground_node, step);
        net.add_resistor("R1", in, out, 10e3);
        net.add_capacitor("C1", out, ground_node, 1e-15);
        net.set_probe("out", out);
        TransientConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 10e-12;
        Trace tr = transient(net, cfg);
        return tr.voltage("out", tr.sample_count() - 1);
    };
    const double coarse = run(4e-15);
    const double fine = run(2e-15);
    CHECK(std::abs(coarse - fine) < 1e-6 * 100);
}

TEST_CASE("mtj in series with a swept source switches state and resistance") {
    MtjParams mp;
    mp.spin_efficiency = 1.5;
    Netlist net;
    const NodeId a = net.add_node("a");
    // 2*Ic for this efficiency is around 53 uA; drive through Rap gives a
    // current that starts above 2*Ic and rises as the junction switches.
    Waveform w(0.0);
    w.ramp_to(0.1e-9, 0.65, 0.1e-9);
    net.add_voltage_source("V1", a, ground_node, w);
    // 1 degree off the pole: the exact pole is a stagnation point at T = 0.
    net.add_mtj("MTJ", a, ground_node,
                MtjDevice{mp, MagnetizationState::tilted(0.01745, false)});
    net.set_probe("a", a);
    TransientConfig cfg;
    cfg.dt = 1e-12;
    cfg.t_end = 30e-9;
    cfg.sample_stride = 10;
    Trace tr = transient(net, cfg);
    CHECK(tr.mtj_mz.front()[0] < -0.99);
    CHECK(tr.mtj_mz.back()[0] > 0.99);
    // Branch resistance transitions Rap -> Rp.
    const int mtj_idx = net.element_index("MTJ");
    const int k_last = tr.sample_count() - 1;
    const double r_end = tr.node_v[k_last][a] / tr.element_i[k_last][mtj_idx];
    CHECK(r_end == doctest::Approx(mp.r_parallel).epsilon(1e-3));
    CHECK(tr.max_norm_error < 1e-9);
}

TEST_CASE("netlist validation catches bad elements and disconnected nodes") {
    Netlist net;
    const NodeId a = net.add_node("a");
    net.add_resistor("R1", a, ground_node, -5.0);
    CHECK_THROWS_AS(net.validate(), ConstructionError);

    Netlist net2;
    const NodeId b = net2.add_node("b");
    net2.add_node("floating");
    net2.add_resistor("R1", b, ground_node, 5.0);
    CHECK_THROWS_AS(net2.validate(), ConstructionError);

    Netlist net3;
    const NodeId c = net3.add_node("c");
    net3.add_resistor("R1", c, ground_node, 5.0);
    net3.set_probe("c", c);
    CHECK_THROWS_AS(net3.set_probe("c", c), ConstructionError);
    CHECK_NOTHROW(net3.validate());
}

TEST_CASE("transient config validation") {
    TransientConfig cfg;
    cfg.t_end = 1e-9;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg.dt = 1e-12;
    cfg.t_end = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
}
