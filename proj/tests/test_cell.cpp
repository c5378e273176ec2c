#include <doctest.h>

#include <cmath>

#include "nvsram/cell.hpp"
#include "nvsram/errors.hpp"

using namespace nvsram;

namespace {

CellConfig test_config() { return CellConfig{}; }

TransientConfig engine() {
    TransientConfig cfg;
    cfg.dt = 1e-12;
    cfg.sample_stride = 10;
    return cfg;
}

MagnetizationState p_state() { return MagnetizationState::tilted(0.0174533, true); }
MagnetizationState ap_state() { return MagnetizationState::tilted(0.0174533, false); }

} // namespace

TEST_CASE("cell config invariants") {
    CellConfig cfg = test_config();
    CHECK_NOTHROW(cfg.validate());

    CellConfig bad = cfg;
    bad.v_buf = cfg.vdd;
    CHECK_THROWS_AS(bad.validate(), ConstructionError);
    bad.v_buf = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConstructionError);

    CellConfig weak_access = cfg;
    weak_access.beta_access = weak_access.beta_pullup / 2;
    CHECK_THROWS_AS(weak_access.validate(), ConstructionError);

    // Backup window must cover 10x the deterministic switching time.
    CellConfig short_window = cfg;
    short_window.wre_window = 2e-9;
    CHECK_THROWS_AS(build_cell(short_window), ConstructionError);
}

TEST_CASE("build_cell produces a valid netlist with all probes") {
    CellInstance cell = build_cell(test_config());
    CHECK_NOTHROW(cell.netlist.validate());
    for (const char* probe : {"q", "qc", "1a", "2a", "1b", "2b", "WT", "WD", "BL", "BL_bar",
                              "WL", "WRE", "EN", "RE", "restore"})
        CHECK_NOTHROW(cell.netlist.probe(probe));
    CHECK(cell.netlist.mtj_devices().size() == 2);
}

TEST_CASE("bistable hold: preloaded state survives 10 ns without stimulus") {
    CellConfig cfg = test_config();
    CellInstance cell = build_cell(cfg);
    TransientConfig eng = engine();
    std::vector<double> state;
    auto w = run_operation(cell, script_write(Bit::one, cfg), eng, state);
    REQUIRE(w.sram_bit == Bit::one);
    auto hold = run_operation(cell, script_hold(cfg, 10e-9), eng, state);
    CHECK(decode_sram(hold.trace, 10e-9, cfg.vdd) == Bit::one);
    const int last = hold.trace.sample_count() - 1;
    CHECK(hold.trace.voltage("q", last) > 0.75);
    CHECK(hold.trace.voltage("qc", last) < 0.05);
}

TEST_CASE("write then decode both polarities; read is non-destructive") {
    CellConfig cfg = test_config();
    TransientConfig eng = engine();
    for (Bit bit : {Bit::zero, Bit::one}) {
        CellInstance cell = build_cell(cfg);
        std::vector<double> state;
        auto w = run_operation(cell, script_write(bit, cfg), eng, state);
        CHECK(w.sram_bit == bit);
        auto r1 = run_operation(cell, script_read(cfg), eng, state);
        CHECK(r1.read_bit == bit);
        auto r2 = run_operation(cell, script_read(cfg), eng, state);
        CHECK(r2.read_bit == bit); // two consecutive reads agree
    }
}

TEST_CASE("read discharges the bitline on the zero side") {
    CellConfig cfg = test_config();
    CellInstance cell = build_cell(cfg);
    TransientConfig eng = engine();
    std::vector<double> state;
    run_operation(cell, script_write(Bit::one, cfg), eng, state);
    auto r = run_operation(cell, script_read(cfg), eng, state);
    const int last = r.trace.sample_count() - 1;
    CHECK(r.trace.voltage("BL", last) > 0.7 * cfg.vdd);       // holds precharge
    CHECK(r.trace.voltage("BL_bar", last) < 0.2 * cfg.vdd);   // discharged
}

TEST_CASE("backup: EN pulse charges WT and X1 conducts") {
    CellConfig cfg = test_config();
    CellInstance cell = build_cell(cfg, ap_state(), p_state());
    TransientConfig eng = engine();
    eng.sample_stride = 1;
    std::vector<double> state;
    run_operation(cell, script_write(Bit::one, cfg), eng, state);
    auto b = run_operation(cell, script_backup(cfg), eng, state);
    // During the EN low pulse WT sits at vdd.
    const int k = b.trace.sample_at_or_after(0.18e-9);
    CHECK(b.trace.voltage("WT", k) > 0.9 * cfg.vdd);
    // Current flows through the MTJs while WT is high.
    CHECK(std::abs(b.trace.element_i[k][cell.mtj1_element]) > 20e-6);
}

TEST_CASE("backup matching vs differing: termination ordering and energy window") {
    CellConfig cfg = test_config();
    TransientConfig eng = engine();

    // Matching: MTJs already encode the stored bit; WT falls at the EN edge.
    CellInstance match_cell = build_cell(cfg, p_state(), ap_state());
    std::vector<double> state;
    run_operation(match_cell, script_write(Bit::one, cfg), eng, state);
    auto match = run_operation(match_cell, script_backup(cfg), eng, state);
    REQUIRE(match.termination_time.has_value());
    CHECK(match.mtj_bits == MtjDecode::one);

    // Differing: WT falls only after both MTJs switch.
    CellInstance diff_cell = build_cell(cfg, ap_state(), p_state());
    state.clear();
    run_operation(diff_cell, script_write(Bit::one, cfg), eng, state);
    auto diff = run_operation(diff_cell, script_backup(cfg), eng, state);
    REQUIRE(diff.termination_time.has_value());
    CHECK(diff.mtj_bits == MtjDecode::one);
    CHECK(*match.termination_time < *diff.termination_time);

    // Termination falls strictly inside (EN rising edge, WRE falling edge).
    const auto en_rise = diff.trace.crossing_time("EN", cfg.vdd / 2, true, 0.0);
    const auto wre_fall =
        diff.trace.crossing_time("WRE", cfg.vdd / 2, false, 1e-9);
    REQUIRE(en_rise.has_value());
    REQUIRE(wre_fall.has_value());
    CHECK(*diff.termination_time > *en_rise);
    CHECK(*diff.termination_time < *wre_fall);

    // After termination WD returns low and WT stays discharged.
    const int last = diff.trace.sample_count() - 1;
    CHECK(diff.trace.voltage("WD", last) < 0.05);
    CHECK(diff.trace.voltage("WT", last) < 0.05);
}

TEST_CASE("restore recovers both bits from the MTJ pair alone") {
    CellConfig cfg = test_config();
    TransientConfig eng = engine();
    struct Case {
        MagnetizationState s1, s2;
        Bit expect;
    };
    for (const Case& c : {Case{p_state(), ap_state(), Bit::one},
                          Case{ap_state(), p_state(), Bit::zero}}) {
        CellInstance cell = build_cell(cfg, c.s1, c.s2);
        // Power-up state: everything discharged.
        std::vector<double> state(cell.netlist.node_count(), 0.0);
        auto r = run_operation(cell, script_restore(cfg), eng, state);
        CHECK(r.sram_bit == c.expect);
        // The bridge current ceased after the restore falling edge.
        const int last = r.trace.sample_count() - 1;
        CHECK(std::abs(r.trace.element_i[last][cell.mtj1_element]) < 1e-9);
    }
}

TEST_CASE("restore symmetry: swapped MTJ pair mirrors the trace") {
    CellConfig cfg = test_config();
    TransientConfig eng = engine();
    CellInstance one = build_cell(cfg, p_state(), ap_state());
    CellInstance zero = build_cell(cfg, ap_state(), p_state());
    std::vector<double> s1(one.netlist.node_count(), 0.0);
    std::vector<double> s2(zero.netlist.node_count(), 0.0);
    auto r1 = run_operation(one, script_restore(cfg), eng, s1);
    auto r0 = run_operation(zero, script_restore(cfg), eng, s2);
    REQUIRE(r1.trace.sample_count() == r0.trace.sample_count());
    double worst = 0.0;
    for (int k = 0; k < r1.trace.sample_count(); ++k) {
        worst = std::max(worst, std::abs(r1.trace.voltage("q", k) - r0.trace.voltage("qc", k)));
        worst = std::max(worst, std::abs(r1.trace.voltage("qc", k) - r0.trace.voltage("q", k)));
        worst = std::max(worst,
                         std::abs(r1.trace.voltage("1a", k) - r0.trace.voltage("2a", k)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("decode helpers") {
    CellConfig cfg = test_config();
    CellInstance cell = build_cell(cfg, p_state(), ap_state());
    CHECK(decode_mtj(cell) == MtjDecode::one);
    cell.set_mtj_states(ap_state(), p_state());
    CHECK(decode_mtj(cell) == MtjDecode::zero);
    cell.set_mtj_states(p_state(), p_state());
    CHECK(decode_mtj(cell) == MtjDecode::corrupt);
    cell.set_mtj_states(MagnetizationState{{1.0, 0.0, 0.0}}, ap_state());
    CHECK(decode_mtj(cell) == MtjDecode::corrupt);
}

TEST_CASE("divider levels reproduce hand analysis with a fixed X1 resistance") {
    CellConfig cfg = test_config();
    cfg.mtj.r_parallel = 5.5e3;
    cfg.mtj.r_antiparallel = 12.0e3;
    // Differing case: stored 1, MTJ1 = AP, MTJ2 = P.
    DividerLevels diff = divider_levels(cfg, Bit::one, ap_state(), p_state(), 1000.0);
    CHECK(diff.v_2a == doctest::Approx(0.8 * 5.5 / 18.5).epsilon(1e-9));
    CHECK(diff.v_1a == doctest::Approx(0.8 * 6.5 / 18.5).epsilon(1e-9));
    // Matching case: stored 1, MTJ1 = P, MTJ2 = AP.
    DividerLevels match = divider_levels(cfg, Bit::one, p_state(), ap_state(), 1000.0);
    CHECK(match.v_2a == doctest::Approx(0.8 * 12.0 / 18.5).epsilon(1e-9));
    CHECK(match.v_1a == doctest::Approx(0.8 * 13.0 / 18.5).epsilon(1e-9));
}

TEST_CASE("divider levels sit on the correct sides of the buffer threshold") {
    CellConfig cfg = test_config();
    const DividerLevels diff = divider_levels(cfg, Bit::one, ap_state(), p_state());
    const DividerLevels match = divider_levels(cfg, Bit::one, p_state(), ap_state());
    CHECK(std::max(diff.v_1a, diff.v_2a) < cfg.v_buf - 0.05);
    CHECK(std::min(match.v_1a, match.v_2a) > cfg.v_buf + 0.05);
}

TEST_CASE("degenerate equal resistances are rejected by the TMR invariant") {
    CellConfig cfg = test_config();
    cfg.mtj.r_antiparallel = cfg.mtj.r_parallel;
    CHECK_THROWS_AS(cfg.mtj.validate(), ParamError);
    CHECK_THROWS_AS(build_cell(cfg), ParamError);
}

TEST_CASE("full pipeline returns the written bit for every initial pair") {
    CellConfig cfg = test_config();
    TransientConfig eng = engine();
    eng.sample_stride = 20;
    for (Bit bit : {Bit::zero, Bit::one}) {
        for (bool m1p : {false, true}) {
            for (bool m2p : {false, true}) {
                CellInstance cell = build_cell(cfg, MagnetizationState::tilted(0.0174533, m1p),
                                               MagnetizationState::tilted(0.0174533, m2p));
                PipelineResult res = run_pipeline(cell, bit, eng);
                CHECK(res.final_read == bit);
            }
        }
    }
}

TEST_CASE("no-termination equivalence: final MTJ states match the terminated run") {
    CellConfig cfg = test_config();
    TransientConfig eng = engine();

    CellInstance active = build_cell(cfg, ap_state(), p_state());
    std::vector<double> state;
    run_operation(active, script_write(Bit::one, cfg), eng, state);
    run_operation(active, script_backup(cfg), eng, state);

    CellInstance baseline = build_cell(cfg, ap_state(), p_state(), true);
    state.clear();
    run_operation(baseline, script_write(Bit::one, cfg), eng, state);
    run_operation(baseline, script_backup(cfg, true), eng, state);

    CHECK(decode_mtj(active) == decode_mtj(baseline));
    CHECK(active.mtj1().state.m.z == doctest::Approx(baseline.mtj1().state.m.z).epsilon(1e-3));
    CHECK(active.mtj2().state.m.z == doctest::Approx(baseline.mtj2().state.m.z).epsilon(1e-3));
}

TEST_CASE("backup on a disabled cell requires the baseline script") {
    CellConfig cfg = test_config();
    CellInstance baseline = build_cell(cfg, ap_state(), p_state(), true);
    std::vector<double> state;
    CHECK_THROWS_AS(run_operation(baseline, script_backup(cfg, false), engine(), state),
                    ParamError);
}
