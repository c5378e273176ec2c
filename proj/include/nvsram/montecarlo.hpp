#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nvsram/cell.hpp"
#include "nvsram/mtj.hpp"
#include "nvsram/power.hpp"

namespace nvsram {

enum class McScenario { device_switching, cell_backup };

struct McConfig {
    int n_runs = 500;
    std::uint64_t master_seed = 1;
    double temperature = 300.0; // K
    McScenario scenario = McScenario::device_switching;
    double overdrive = 1.5;     // device scenario: I = overdrive * ic0_target
    double horizon = 50e-9;
    MtjParams mtj;              // device scenario
    CellConfig cell;            // cell scenario
    TransientConfig engine;     // cell scenario
    int threads = 0;            // 0 = hardware concurrency

    void validate() const;
    std::uint64_t run_seed(int run_index) const {
        return derive_seed(master_seed, static_cast<std::uint64_t>(run_index));
    }
};

struct McStats {
    int n_runs = 0;
    int n_switched = 0;
    int n_failed = 0; // horizon exceeded; excluded from time statistics
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    double q99 = 0.0;
    double error_rate = 0.0; // failed fraction with 95% Wilson interval
    double error_lo = 0.0;
    double error_hi = 0.0;
    // Per-run switching times in run order; horizon misses are negative.
    std::vector<double> samples;
};

// n_runs independent switching_time draws at I = overdrive * ic0_target.
// Per-run seeds derive from (master seed, run index); permuting execution
// order cannot change any per-run result.
McStats switching_ensemble(const McConfig& config);

struct ErrorRate {
    double rate = 0.0;
    double lo = 0.0; // 95% Wilson interval
    double hi = 0.0;
    int n = 0;
};

// Fraction of runs whose switching time exceeds the pulse width, evaluated on
// an ensemble's recorded samples (horizon misses count as failures).
ErrorRate write_error_rate(const McStats& ensemble, double pulse_width);

struct SavingsRun {
    double terminated = 0.0; // write-path J
    double baseline = 0.0;
    double savings_percent = 0.0;
    std::optional<double> termination_time;
};

struct SavingsStats {
    int n_runs = 0;
    double mean_terminated = 0.0;
    double mean_baseline = 0.0;
    double mean_savings_percent = 0.0;
    double min_savings_percent = 0.0;
    bool every_run_saves = false; // terminated < baseline in every paired run
    std::vector<SavingsRun> runs;
};

// Paired terminated/baseline backup energies: both runs of a pair consume
// identical thermal field sequences (same per-run seeds).
SavingsStats termination_savings_ensemble(const McConfig& config);

} // namespace nvsram
