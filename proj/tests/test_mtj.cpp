#include <doctest.h>

#include <cmath>
#include <vector>

#include "nvsram/errors.hpp"
#include "nvsram/mtj.hpp"

using namespace nvsram;

namespace {

MtjParams table_params() {
    MtjParams p;
    // Calibrated value is exercised separately; most dynamics tests fix a
    // round 1.5 so thresholds sit near 26.3 uA.
    p.spin_efficiency = 1.5;
    return p;
}

} // namespace

TEST_CASE("anisotropy field reproduces the thermal barrier") {
    MtjParams p = table_params();
    const double hk = derive_anisotropy_field(p);
    // 2*56*kB*300 / (mu0 * 7e5 * 5.6e-25), evaluated independently.
    CHECK(hk == doctest::Approx(941730.4843923522).epsilon(1e-12));
    // Round trip to the barrier.
    const double ea = barrier_from_anisotropy_field(p, hk);
    const double expected_ea = 56.0 * 1.380649e-23 * 300.0;
    CHECK(std::abs(ea - expected_ea) / expected_ea < 1e-12);

    MtjParams doubled = p;
    doubled.thermal_stability *= 2.0;
    CHECK(derive_anisotropy_field(doubled) == doctest::Approx(2.0 * hk).epsilon(1e-12));

    MtjParams bigger = p;
    bigger.free_layer_thickness *= 2.0;
    CHECK(derive_anisotropy_field(bigger) == doctest::Approx(0.5 * hk).epsilon(1e-12));

    MtjParams bad = p;
    bad.saturation_magnetization = -1.0;
    CHECK_THROWS_AS(derive_anisotropy_field(bad), ParamError);
}

TEST_CASE("conductance interpolates between Rp and Rap") {
    MtjParams p = table_params();
    const double rp = resistance(MagnetizationState::parallel(), p);
    const double rap = resistance(MagnetizationState::antiparallel(), p);
    CHECK(rp >= 5.3e3);
    CHECK(rp <= 5.7e3);
    CHECK(rap >= 10.2e3);
    CHECK(rap <= 15.03e3);
    CHECK((rap - rp) / rp > 1.0);

    MagnetizationState equator{{1.0, 0.0, 0.0}};
    const double r_mid = resistance(equator, p);
    CHECK(r_mid == doctest::Approx(2.0 * 5.5e3 * 12.0e3 / (5.5e3 + 12.0e3)).epsilon(1e-12));
}

TEST_CASE("conductance bounds hold on the unit sphere") {
    MtjParams p = table_params();
    for (int i = 0; i <= 40; ++i) {
        const double theta = i * 3.14159265358979 / 40.0;
        MagnetizationState s{{std::sin(theta), 0.0, std::cos(theta)}};
        const double r = resistance(s, p);
        CHECK(r >= p.r_parallel - 1e-9);
        CHECK(r <= p.r_antiparallel + 1e-9);
    }
}

TEST_CASE("effective field is the uniaxial term plus thermal") {
    MtjParams p = table_params();
    const double hk = derive_anisotropy_field(p);
    Vec3 h = effective_field(MagnetizationState::parallel(), p, {});
    CHECK(h.z == doctest::Approx(hk));
    CHECK(h.x == 0.0);
    h = effective_field(MagnetizationState::antiparallel(), p, {});
    CHECK(h.z == doctest::Approx(-hk));
    h = effective_field(MagnetizationState{{1.0, 0.0, 0.0}}, p, {});
    CHECK(h.norm() == 0.0);
    h = effective_field(MagnetizationState::parallel(), p, {10.0, 20.0, 30.0});
    CHECK(h.x == doctest::Approx(10.0));
    CHECK(h.y == doctest::Approx(20.0));
    CHECK(h.z == doctest::Approx(hk + 30.0));
}

TEST_CASE("thermal field sampling statistics and determinism") {
    MtjParams p = table_params();
    const double dt = 1e-12;

    NormalSampler zero_rng(7);
    const Vec3 cold = sample_thermal_field(p, 0.0, dt, zero_rng);
    CHECK(cold.norm() == 0.0);

    CHECK_THROWS_AS(thermal_field_sigma(p, 300.0, 0.0), ParamError);

    NormalSampler a(1234), b(1234);
    for (int i = 0; i < 100; ++i) {
        const Vec3 va = sample_thermal_field(p, 300.0, dt, a);
        const Vec3 vb = sample_thermal_field(p, 300.0, dt, b);
        CHECK(va.x == vb.x);
        CHECK(va.y == vb.y);
        CHECK(va.z == vb.z);
    }

    // 2*alpha*kB*T/(gamma*mu0^2*Ms*V*dt) evaluated independently.
    const double expected_var = 2128992353.0023835;
    CHECK(thermal_field_sigma(p, 300.0, dt) ==
          doctest::Approx(std::sqrt(expected_var)).epsilon(1e-9));

    NormalSampler rng(99);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 v = sample_thermal_field(p, 300.0, dt, rng);
        sum += v.x;
        sumsq += v.x * v.x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double sigma = std::sqrt(expected_var);
    CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - expected_var) / expected_var < 0.05);
}

TEST_CASE("llg fixed point and damped relaxation") {
    MtjParams p = table_params();

    MagnetizationState pole = MagnetizationState::parallel();
    MagnetizationState next = llg_step(pole, 0.0, 1e-12, p);
    CHECK(std::abs(next.m.z - 1.0) < 1e-15);
    CHECK(std::abs(next.m.x) < 1e-15);

    MagnetizationState ap = MagnetizationState::antiparallel();
    next = llg_step(ap, 0.0, 1e-12, p);
    CHECK(std::abs(next.m.z + 1.0) < 1e-15);

    // 10 degrees off easy axis, no current: m_z relaxes monotonically up.
    MagnetizationState s = MagnetizationState::tilted(10.0 * 3.14159265358979 / 180.0, true);
    double prev = s.m.z;
    for (int i = 0; i < 10000; ++i) {
        s = llg_step(s, 0.0, 1e-12, p);
        CHECK(s.m.z >= prev - 1e-12);
        prev = s.m.z;
    }
    CHECK(s.m.z > 0.999);
}

TEST_CASE("llg norm preservation and energy dissipation") {
    MtjParams p = table_params();
    MagnetizationState s = MagnetizationState::tilted(0.5, true);
    double prev_energy = macrospin_energy(s, p);
    for (int i = 0; i < 20000; ++i) {
        s = llg_step(s, 0.0, 0.5e-12, p);
        CHECK(std::abs(s.m.norm() - 1.0) < 1e-9);
        const double e = macrospin_energy(s, p);
        CHECK(e <= prev_energy + 1e-25);
        prev_energy = e;
    }
}

TEST_CASE("llg dt cap enforced") {
    MtjParams p = table_params();
    CHECK_THROWS_AS(llg_step(MagnetizationState::parallel(), 0.0, 20e-12, p), ParamError);
    CHECK_THROWS_AS(llg_step(MagnetizationState::parallel(), 0.0, -1e-12, p), ParamError);
}

TEST_CASE("llg threshold behavior around the critical current") {
    MtjParams p = table_params();
    const double ic = measure_critical_current(p);

    // Above twice threshold: switches and settles; at half: never crosses 0.
    auto t_fast = switching_time(p, 2.0 * ic, 0.0, nullptr);
    REQUIRE(t_fast.has_value());
    SwitchingOptions horizon100;
    horizon100.horizon = 100e-9;
    auto t_slow = switching_time(p, 0.5 * ic, 0.0, nullptr, horizon100);
    CHECK(!t_slow.has_value());

    // Overdrive monotonicity.
    auto t15 = switching_time(p, 1.5 * ic, 0.0, nullptr);
    auto t12 = switching_time(p, 1.2 * ic, 0.0, nullptr);
    REQUIRE(t15.has_value());
    REQUIRE(t12.has_value());
    CHECK(*t15 < *t12);
    CHECK(*t_fast < *t15);
}

TEST_CASE("calibration hits the 27 uA target") {
    MtjParams p;
    p.spin_efficiency = 1.0;
    const CalibrationResult cal = calibrate_spin_efficiency(p);
    CHECK(cal.measured_ic0 > 26.73e-6);
    CHECK(cal.measured_ic0 < 27.27e-6);
    // Table I parameters are over-constrained under textbook prefactors; the
    // effective efficiency lands above 1 and is reported, not hidden.
    CHECK(cal.spin_efficiency > 1.0);
    CHECK(cal.spin_efficiency < 2.0);

    MtjParams calibrated = p;
    calibrated.spin_efficiency = cal.spin_efficiency;

    // Below threshold: no switch within the default 50 ns horizon.
    auto below = switching_time(calibrated, 0.9 * 27e-6, 0.0, nullptr);
    CHECK(!below.has_value());

    // Deterministic threshold property at +-5%.
    for (double ratio : {1.05, 1.2, 2.0})
        CHECK(switching_time(calibrated, ratio * 27e-6, 0.0, nullptr).has_value());
    for (double ratio : {0.95, 0.8})
        CHECK(!switching_time(calibrated, ratio * 27e-6, 0.0, nullptr).has_value());

    // Doubling the target roughly halves the efficiency.
    MtjParams doubled = p;
    doubled.ic0_target = 54e-6;
    const CalibrationResult cal2 = calibrate_spin_efficiency(doubled);
    CHECK(cal2.spin_efficiency == doctest::Approx(0.5 * cal.spin_efficiency).epsilon(0.02));
}

TEST_CASE("switching time determinism and stochastic spread") {
    MtjParams p = table_params();
    const double ic = measure_critical_current(p);

    auto t1 = switching_time(p, 2.0 * ic, 0.0, nullptr);
    auto t2 = switching_time(p, 2.0 * ic, 0.0, nullptr);
    REQUIRE(t1.has_value());
    CHECK(*t1 == *t2);

    std::vector<double> times;
    for (int run = 0; run < 100; ++run) {
        NormalSampler rng(derive_seed(2024, run));
        auto t = switching_time(p, 1.5 * ic, 300.0, &rng);
        if (t) times.push_back(*t);
    }
    REQUIRE(times.size() > 90);
    double mean = 0.0;
    for (double t : times) mean += t;
    mean /= static_cast<double>(times.size());
    double var = 0.0;
    for (double t : times) var += (t - mean) * (t - mean);
    var /= static_cast<double>(times.size());
    CHECK(var > 0.0);
}

TEST_CASE("heun refinement on the deterministic switching time") {
    MtjParams p = table_params();
    const double current = 1.5 * measure_critical_current(p);
    SwitchingOptions o1, o2, o4;
    o1.dt = 2e-12;
    o2.dt = 1e-12;
    o4.dt = 0.5e-12;
    const double t1 = *switching_time(p, current, 0.0, nullptr, o1);
    const double t2 = *switching_time(p, current, 0.0, nullptr, o2);
    const double t4 = *switching_time(p, current, 0.0, nullptr, o4);
    const double ratio = std::abs(t1 - t2) / std::abs(t2 - t4);
    CHECK(ratio >= 1.8);
}

TEST_CASE("parameter invariants are enforced") {
    MtjParams p = table_params();
    CHECK_NOTHROW(p.validate());
    CHECK(p.free_layer_volume() == doctest::Approx(5.6e-25).epsilon(1e-12));

    MtjParams low_tmr = p;
    low_tmr.r_antiparallel = 1.9 * low_tmr.r_parallel;
    CHECK_THROWS_AS(low_tmr.validate(), ParamError);

    MtjParams no_damping = p;
    no_damping.damping = 0.0;
    CHECK_THROWS_AS(no_damping.validate(), ParamError);

    MtjParams cold = p;
    cold.temperature = 0.0;
    CHECK_THROWS_AS(cold.validate(), ParamError);
}
