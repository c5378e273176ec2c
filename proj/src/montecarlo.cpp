#include "nvsram/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

void wilson_interval(int failures, int n, double& lo, double& hi) {
    if (n == 0) {
        lo = hi = 0.0;
        return;
    }
    const double z = 1.959963984540054;
    const double p = static_cast<double>(failures) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

// Runs `body(run_index)` for every index, spread over a worker pool. Results
// land in preallocated slots, so aggregation order never depends on timing.
template <typename Body>
void parallel_runs(int n_runs, int threads, Body&& body) {
    int n_workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min(n_workers, n_runs));
    if (n_workers == 1) {
        for (int i = 0; i < n_runs; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

void McConfig::validate() const {
    if (n_runs < 1) throw ParamError("mc config: n_runs must be >= 1");
    if (temperature < 0) throw ParamError("mc config: temperature must be >= 0");
    if (!(horizon > 0)) throw ParamError("mc config: horizon must be positive");
    if (scenario == McScenario::device_switching) {
        if (!(overdrive > 0)) throw ParamError("mc config: overdrive must be positive");
        mtj.validate();
    } else {
        cell.validate();
    }
}

McStats switching_ensemble(const McConfig& config) {
    config.validate();
    const double current = config.overdrive * config.mtj.ic0_target;

    std::vector<double> samples(config.n_runs, -1.0);
    parallel_runs(config.n_runs, config.threads, [&](int run) {
        SwitchingOptions opts;
        opts.horizon = config.horizon;
        if (config.temperature > 0.0) {
            NormalSampler rng(config.run_seed(run));
            const auto t = switching_time(config.mtj, current, config.temperature, &rng, opts);
            samples[run] = t.value_or(-1.0);
        } else {
            const auto t = switching_time(config.mtj, current, 0.0, nullptr, opts);
            samples[run] = t.value_or(-1.0);
        }
    });

    McStats stats;
    stats.n_runs = config.n_runs;
    stats.samples = samples;
    std::vector<double> times;
    times.reserve(samples.size());
    for (double t : samples) {
        if (t >= 0.0)
            times.push_back(t);
        else
            ++stats.n_failed;
    }
    stats.n_switched = static_cast<int>(times.size());
    if (!times.empty()) {
        double sum = 0.0;
        for (double t : times) sum += t;
        stats.mean = sum / static_cast<double>(times.size());
        double var = 0.0;
        for (double t : times) var += (t - stats.mean) * (t - stats.mean);
        stats.stddev = std::sqrt(var / static_cast<double>(times.size()));
        std::sort(times.begin(), times.end());
        stats.min = times.front();
        stats.max = times.back();
        stats.q50 = quantile(times, 0.50);
        stats.q95 = quantile(times, 0.95);
        stats.q99 = quantile(times, 0.99);
    }
    stats.error_rate = static_cast<double>(stats.n_failed) / config.n_runs;
    wilson_interval(stats.n_failed, config.n_runs, stats.error_lo, stats.error_hi);
    return stats;
}

ErrorRate write_error_rate(const McStats& ensemble, double pulse_width) {
    if (!(pulse_width >= 0)) throw ParamError("write error rate: pulse width must be >= 0");
    int failures = 0;
    for (double t : ensemble.samples)
        if (t < 0.0 || t > pulse_width) ++failures;
    ErrorRate out;
    out.n = static_cast<int>(ensemble.samples.size());
    out.rate = out.n ? static_cast<double>(failures) / out.n : 0.0;
    wilson_interval(failures, out.n, out.lo, out.hi);
    return out;
}

SavingsStats termination_savings_ensemble(const McConfig& config) {
    config.validate();
    if (config.scenario != McScenario::cell_backup)
        throw ParamError("termination savings ensemble needs the cell-backup scenario");

    const MagnetizationState p = MagnetizationState::tilted(0.0174532925199433, true);
    const MagnetizationState ap = MagnetizationState::tilted(0.0174532925199433, false);

    SavingsStats stats;
    stats.n_runs = config.n_runs;
    stats.runs.resize(config.n_runs);
    // Only energies leave each run; coarse sampling keeps the transient
    // traces small (energy accumulation is per-step regardless of stride).
    TransientConfig engine = config.engine;
    engine.sample_stride = std::max(engine.sample_stride, 100);
    parallel_runs(config.n_runs, config.threads, [&](int run) {
        const std::uint64_t s1 = derive_seed(config.master_seed, 2 * run);
        const std::uint64_t s2 = derive_seed(config.master_seed, 2 * run + 1);
        // Worst-case differing initial states, stored bit 1. The baseline run
        // reuses the same seeds so both consume one thermal sample path.
        const BackupRunEnergy terminated = run_backup_energy(
            config.cell, engine, Bit::one, ap, p, false, config.temperature, s1, s2);
        const BackupRunEnergy baseline = run_backup_energy(
            config.cell, engine, Bit::one, ap, p, true, config.temperature, s1, s2);
        SavingsRun& r = stats.runs[run];
        r.terminated = terminated.write_path;
        r.baseline = baseline.write_path;
        r.savings_percent = 100.0 * (baseline.write_path - terminated.write_path) /
                            baseline.write_path;
        r.termination_time = terminated.termination_time;
    });

    stats.every_run_saves = true;
    stats.min_savings_percent = 1e300;
    for (const SavingsRun& r : stats.runs) {
        stats.mean_terminated += r.terminated;
        stats.mean_baseline += r.baseline;
        stats.mean_savings_percent += r.savings_percent;
        stats.min_savings_percent = std::min(stats.min_savings_percent, r.savings_percent);
        if (!(r.terminated < r.baseline)) stats.every_run_saves = false;
    }
    stats.mean_terminated /= config.n_runs;
    stats.mean_baseline /= config.n_runs;
    stats.mean_savings_percent /= config.n_runs;
    return stats;
}

} // namespace nvsram
