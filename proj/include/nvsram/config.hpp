#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvsram/cell.hpp"
#include "nvsram/montecarlo.hpp"
#include "nvsram/transient.hpp"

namespace nvsram {

enum class ScenarioKind { sequence, calibrate, montecarlo, backup_compare };

enum class McKind { switching, savings };

struct McSection {
    McKind kind = McKind::switching;
    int n_runs = 500;
    double temperature = 300.0;
    std::vector<double> overdrives = {1.5};
    std::vector<double> pulse_widths; // s; error-rate sweep over the first overdrive
    double horizon = 50e-9;
    int threads = 0;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    CellConfig cell; // holds mtj + transistor + cell sections
    TransientConfig engine;
    ScenarioKind kind = ScenarioKind::sequence;
    std::vector<std::string> operations{"write1", "read", "backup", "powerdown", "restore",
                                        "read"};
    std::string mtj1_initial = "AP";
    std::string mtj2_initial = "P";
    McSection mc;
    std::string trace_csv = "trace.csv";
    std::string summary_file = "summary.txt";
    std::string samples_csv; // empty = no raw sample export

    // Fully-resolved echo (defaults applied), embedded in every output.
    nlohmann::json echo() const;
};

// Parses and validates a config document. Unknown keys are rejected; missing
// keys take the documented defaults. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config_file(const std::string& path);

MagnetizationState initial_state_from_name(const std::string& name);

} // namespace nvsram
