#include "nvsram/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "nvsram/config.hpp"
#include "nvsram/errors.hpp"
#include "nvsram/montecarlo.hpp"
#include "nvsram/power.hpp"
#include "nvsram/report.hpp"

namespace nvsram {

namespace {

namespace fs = std::filesystem;

struct Invocation {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

ScenarioConfig resolve_config(const Invocation& inv) {
    ScenarioConfig cfg;
    if (!inv.config_path.empty()) cfg = load_config_file(inv.config_path);
    if (inv.seed) cfg.seed = *inv.seed;
    return cfg;
}

std::string config_echo_block(const ScenarioConfig& cfg) {
    return "[config]\n" + cfg.echo().dump(2) + "\n";
}

void say(const Invocation& inv, const std::string& line) {
    if (!inv.quiet) std::fputs((line + "\n").c_str(), stdout);
}

const char* bit_text(Bit b) { return b == Bit::one ? "1" : "0"; }

const char* mtj_text(MtjDecode d) {
    switch (d) {
        case MtjDecode::zero: return "0";
        case MtjDecode::one: return "1";
        default: return "corrupt";
    }
}

OperationScript script_for_token(const std::string& token, const CellConfig& c) {
    if (token == "write0") return script_write(Bit::zero, c);
    if (token == "write1") return script_write(Bit::one, c);
    if (token == "read") return script_read(c);
    if (token == "backup") return script_backup(c);
    if (token == "powerdown") return script_power_down(c);
    if (token == "restore") return script_restore(c);
    if (token == "hold") return script_hold(c, 5e-9);
    throw ConfigError("unknown operation token: " + token);
}

int cmd_run(const Invocation& inv) {
    const ScenarioConfig cfg = resolve_config(inv);
    CellInstance cell = build_cell(cfg.cell, initial_state_from_name(cfg.mtj1_initial),
                                   initial_state_from_name(cfg.mtj2_initial));

    std::vector<OperationResult> results;
    std::vector<double> node_state;
    for (const auto& token : cfg.operations)
        results.push_back(
            run_operation(cell, script_for_token(token, cfg.cell), cfg.engine, node_state));

    std::ostringstream sum;
    sum << "# nvsram-sim run summary\n";
    sum << "seed = " << cfg.seed << "\n";
    sum << "operation_count = " << results.size() << "\n";
    double t_offset = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const OperationResult& r = results[i];
        const std::string prefix = "op." + std::to_string(i);
        sum << prefix << ".kind = " << cfg.operations[i] << "\n";
        sum << prefix << ".t_start_s = " << format_value(t_offset) << "\n";
        if (r.sram_bit) sum << prefix << ".sram_bit = " << bit_text(*r.sram_bit) << "\n";
        if (r.read_bit) sum << prefix << ".read_bit = " << bit_text(*r.read_bit) << "\n";
        if (r.mtj_bits) sum << prefix << ".mtj_state = " << mtj_text(*r.mtj_bits) << "\n";
        if (r.termination_time)
            sum << prefix
                << ".termination_time_s = " << format_value(t_offset + *r.termination_time)
                << "\n";
        const EnergyBalance bal = energy_balance(r.trace, cell.netlist);
        sum << prefix << ".supply_energy_j = " << format_value(bal.source_delivered) << "\n";
        sum << prefix << ".dissipated_j = " << format_value(bal.dissipated) << "\n";
        sum << prefix << ".energy_balance_error = " << format_value(bal.relative_error) << "\n";
        t_offset += r.trace.time.empty() ? 0.0 : r.trace.time.back();
    }
    sum << config_echo_block(cfg);

    atomic_write((fs::path(inv.out_dir) / cfg.trace_csv).string(),
                 trace_csv_text(cell, results));
    atomic_write((fs::path(inv.out_dir) / cfg.summary_file).string(), sum.str());
    say(inv, "run complete: " + std::to_string(results.size()) + " operations");
    return 0;
}

int cmd_calibrate(const Invocation& inv) {
    const ScenarioConfig cfg = resolve_config(inv);
    const CalibrationResult cal = calibrate_spin_efficiency(cfg.cell.mtj);

    std::ostringstream out;
    out << "# nvsram-sim calibration report\n";
    out << "seed = " << cfg.seed << "\n";
    out << "spin_efficiency = " << format_value(cal.spin_efficiency) << "\n";
    out << "measured_ic0_a = " << format_value(cal.measured_ic0) << "\n";
    out << "target_ic0_a = " << format_value(cfg.cell.mtj.ic0_target) << "\n";
    out << "relative_error = "
        << format_value((cal.measured_ic0 - cfg.cell.mtj.ic0_target) / cfg.cell.mtj.ic0_target)
        << "\n";
    if (cal.spin_efficiency > 1.0)
        out << "note = effective spin efficiency exceeds 1; the parameter set is "
               "over-constrained under macrospin prefactors and the knob absorbs the "
               "difference\n";
    out << config_echo_block(cfg);
    atomic_write((fs::path(inv.out_dir) / "calibration.txt").string(), out.str());
    say(inv, "calibration: spin_efficiency = " + format_value(cal.spin_efficiency) +
                 ", measured Ic0 = " + format_value(cal.measured_ic0) + " A");
    return 0;
}

int cmd_backup_compare(const Invocation& inv) {
    const ScenarioConfig cfg = resolve_config(inv);
    const EnergyReport base = backup_comparison(cfg.cell, cfg.engine);
    CellConfig doubled = cfg.cell;
    doubled.wre_window *= 2.0;
    const EnergyReport twice = backup_comparison(doubled, cfg.engine);

    std::ostringstream out;
    out << "# nvsram-sim backup energy comparison\n";
    out << "seed = " << cfg.seed << "\n";
    out << "scope = MTJ pair + X1 + detection logic, integrated over the WRE window\n";
    out << "e_backup_0_j = " << format_value(base.e_backup_0) << "\n";
    out << "e_backup_1_j = " << format_value(base.e_backup_1) << "\n";
    out << "e_backup_mean_j = " << format_value(base.mean) << "\n";
    out << "baseline_0_j = " << format_value(base.baseline_0) << "\n";
    out << "baseline_1_j = " << format_value(base.baseline_1) << "\n";
    out << "baseline_mean_j = " << format_value(base.baseline_mean) << "\n";
    out << "savings_percent = " << format_value(base.savings_percent) << "\n";
    out << "supply_0_j = " << format_value(base.supply_0) << "\n";
    out << "supply_1_j = " << format_value(base.supply_1) << "\n";
    out << "supply_baseline_0_j = " << format_value(base.supply_baseline_0) << "\n";
    out << "supply_baseline_1_j = " << format_value(base.supply_baseline_1) << "\n";
    out << "supply_savings_percent = " << format_value(base.supply_savings_percent) << "\n";
    if (base.termination_time_0)
        out << "termination_time_0_s = " << format_value(*base.termination_time_0) << "\n";
    if (base.termination_time_1)
        out << "termination_time_1_s = " << format_value(*base.termination_time_1) << "\n";
    out << "doubled_window.baseline_mean_j = " << format_value(twice.baseline_mean) << "\n";
    out << "doubled_window.e_backup_mean_j = " << format_value(twice.mean) << "\n";
    out << "doubled_window.baseline_growth = "
        << format_value(twice.baseline_mean / base.baseline_mean) << "\n";
    out << "doubled_window.terminated_change_percent = "
        << format_value(100.0 * (twice.mean - base.mean) / base.mean) << "\n";
    out << "reference.savings_percent = 17.88\n";
    out << "reference.note = figure reported for the original 20 nm FinFET realization of "
           "this cell, shown for context only; absolute energies depend on the transistor "
           "kit and are not comparable\n";
    out << config_echo_block(cfg);
    atomic_write((fs::path(inv.out_dir) / "energy_report.txt").string(), out.str());
    say(inv, "backup comparison: savings_percent = " + format_value(base.savings_percent) +
                 " (reference figure 17.88)");
    return 0;
}

int cmd_montecarlo(const Invocation& inv) {
    const ScenarioConfig cfg = resolve_config(inv);
    McConfig mc = cfg.mc;
    mc.master_seed = cfg.seed;

    std::ostringstream out;
    std::ostringstream samples;
    out << "# nvsram-sim monte carlo report\n";
    out << "seed = " << cfg.seed << "\n";
    out << "n_runs = " << mc.n_runs << "\n";
    out << "temperature_k = " << format_value(mc.temperature) << "\n";

    if (cfg.mc.kind == McKind::switching) {
        mc.scenario = McScenario::device_switching;
        samples << "run,overdrive,switch_time_s\n";
        McStats first;
        for (std::size_t i = 0; i < cfg.mc.overdrives.size(); ++i) {
            mc.overdrive = cfg.mc.overdrives[i];
            const McStats stats = switching_ensemble(mc);
            if (i == 0) first = stats;
            const std::string prefix = "overdrive." + std::to_string(i);
            out << prefix << ".ratio = " << format_value(mc.overdrive) << "\n";
            out << prefix << ".n_switched = " << stats.n_switched << "\n";
            out << prefix << ".n_failed = " << stats.n_failed << "\n";
            out << prefix << ".mean_s = " << format_value(stats.mean) << "\n";
            out << prefix << ".stddev_s = " << format_value(stats.stddev) << "\n";
            out << prefix << ".min_s = " << format_value(stats.min) << "\n";
            out << prefix << ".max_s = " << format_value(stats.max) << "\n";
            out << prefix << ".q50_s = " << format_value(stats.q50) << "\n";
            out << prefix << ".q95_s = " << format_value(stats.q95) << "\n";
            out << prefix << ".q99_s = " << format_value(stats.q99) << "\n";
            out << prefix << ".error_rate = " << format_value(stats.error_rate) << "\n";
            out << prefix << ".error_rate_lo = " << format_value(stats.error_lo) << "\n";
            out << prefix << ".error_rate_hi = " << format_value(stats.error_hi) << "\n";
            for (std::size_t k = 0; k < stats.samples.size(); ++k)
                samples << k << "," << format_value(mc.overdrive) << ","
                        << format_value(stats.samples[k]) << "\n";
        }
        for (std::size_t i = 0; i < cfg.mc.pulse_widths.size(); ++i) {
            const ErrorRate er = write_error_rate(first, cfg.mc.pulse_widths[i]);
            const std::string prefix = "write_error." + std::to_string(i);
            out << prefix << ".pulse_width_s = " << format_value(cfg.mc.pulse_widths[i]) << "\n";
            out << prefix << ".rate = " << format_value(er.rate) << "\n";
            out << prefix << ".lo = " << format_value(er.lo) << "\n";
            out << prefix << ".hi = " << format_value(er.hi) << "\n";
        }
    } else {
        mc.scenario = McScenario::cell_backup;
        const SavingsStats stats = termination_savings_ensemble(mc);
        out << "savings.mean_terminated_j = " << format_value(stats.mean_terminated) << "\n";
        out << "savings.mean_baseline_j = " << format_value(stats.mean_baseline) << "\n";
        out << "savings.mean_savings_percent = " << format_value(stats.mean_savings_percent)
            << "\n";
        out << "savings.min_savings_percent = " << format_value(stats.min_savings_percent)
            << "\n";
        out << "savings.every_run_saves = " << (stats.every_run_saves ? "true" : "false")
            << "\n";
        samples << "run,terminated_j,baseline_j,savings_percent,termination_time_s\n";
        for (std::size_t k = 0; k < stats.runs.size(); ++k) {
            const SavingsRun& r = stats.runs[k];
            samples << k << "," << format_value(r.terminated) << "," << format_value(r.baseline)
                    << "," << format_value(r.savings_percent) << ","
                    << format_value(r.termination_time.value_or(-1.0)) << "\n";
        }
    }
    out << config_echo_block(cfg);
    atomic_write((fs::path(inv.out_dir) / "mc_stats.txt").string(), out.str());
    if (!cfg.samples_csv.empty())
        atomic_write((fs::path(inv.out_dir) / cfg.samples_csv).string(), samples.str());
    say(inv, "monte carlo complete");
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"STT-MTJ non-volatile SRAM cell simulator"};
    app.require_subcommand(1);

    Invocation inv;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", inv.config_path, "JSON configuration file");
        sub->add_option("--out", inv.out_dir, "output directory");
        sub->add_option("--seed", [&inv](const std::vector<std::string>& vals) {
            inv.seed = std::stoull(vals.at(0));
            return true;
        }, "seed override");
        sub->add_flag("--quiet", inv.quiet, "suppress progress output");
    };

    CLI::App* run = app.add_subcommand("run", "execute an operation sequence on one cell");
    CLI::App* cal = app.add_subcommand("calibrate", "calibrate the spin efficiency to Ic0");
    CLI::App* cmp = app.add_subcommand("backup-compare",
                                       "with/without-termination backup energy comparison");
    CLI::App* mcr = app.add_subcommand("montecarlo", "seeded stochastic ensembles");
    for (CLI::App* sub : {run, cal, cmp, mcr}) add_common(sub);

    std::vector<const char*> argv;
    argv.push_back("nvsram_sim");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(inv);
        if (cal->parsed()) return cmd_calibrate(inv);
        if (cmp->parsed()) return cmd_backup_compare(inv);
        if (mcr->parsed()) return cmd_montecarlo(inv);
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const DecodeError& e) {
        std::fprintf(stderr, "decode error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace nvsram
