#include "nvsram/config.hpp"

#include <fstream>
#include <set>

#include "nvsram/errors.hpp"

namespace nvsram {

namespace {

using nlohmann::json;

// Applies `target = doc[key]` when present; tracks consumed keys.
struct SectionReader {
    const json& doc;
    std::string section;
    std::set<std::string> seen;

    SectionReader(const json& d, std::string name) : doc(d), section(std::move(name)) {
        if (!doc.is_object()) throw ConfigError("section '" + section + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& target) {
        seen.insert(key);
        if (!doc.contains(key)) return;
        try {
            target = doc.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("key '" + section + "." + key + "' has the wrong type");
        }
    }

    void finish() const {
        for (const auto& [key, value] : doc.items()) {
            (void)value;
            if (!seen.count(key))
                throw ConfigError("unknown key '" + section + "." + key + "'");
        }
    }
};

void read_mtj(const json& doc, MtjParams& p) {
    SectionReader r(doc, "mtj");
    r.get("free_layer_width_m", p.free_layer_width);
    r.get("free_layer_length_m", p.free_layer_length);
    r.get("free_layer_thickness_m", p.free_layer_thickness);
    r.get("oxide_thickness_m", p.oxide_thickness);
    r.get("saturation_magnetization_a_per_m", p.saturation_magnetization);
    r.get("damping", p.damping);
    r.get("thermal_stability", p.thermal_stability);
    r.get("r_parallel_ohm", p.r_parallel);
    r.get("r_antiparallel_ohm", p.r_antiparallel);
    r.get("ic0_target_a", p.ic0_target);
    r.get("temperature_k", p.temperature);
    r.get("spin_efficiency", p.spin_efficiency);
    r.get("gyromagnetic_ratio_rad_per_s_t", p.gyromagnetic_ratio);
    r.finish();
}

void read_transistors(const json& doc, CellConfig& c) {
    SectionReader r(doc, "transistors");
    r.get("vdd_v", c.vdd);
    r.get("vth_v", c.vth);
    r.get("lambda_per_v", c.lambda);
    r.get("beta_pullup_a_per_v2", c.beta_pullup);
    r.get("beta_pulldown_a_per_v2", c.beta_pulldown);
    r.get("beta_access_a_per_v2", c.beta_access);
    r.get("beta_x1_a_per_v2", c.beta_x1);
    r.get("beta_x2_a_per_v2", c.beta_x2);
    r.get("beta_buffer_a_per_v2", c.beta_buffer);
    r.get("beta_logic_a_per_v2", c.beta_logic);
    r.get("beta_driver_a_per_v2", c.beta_driver);
    r.finish();
}

void read_cell(const json& doc, CellConfig& c) {
    SectionReader r(doc, "cell");
    r.get("v_buf_v", c.v_buf);
    r.get("c_node_f", c.c_node);
    r.get("c_latch_f", c.c_latch);
    r.get("c_detect_f", c.c_detect);
    r.get("c_wt_f", c.c_wt);
    r.get("c_bitline_f", c.c_bitline);
    r.get("c_overlap_f", c.c_overlap);
    r.get("r_bleed_ohm", c.r_bleed);
    r.get("slew_s", c.slew);
    r.get("write_wl_start_s", c.write_wl_start);
    r.get("write_wl_width_s", c.write_wl_width);
    r.get("write_duration_s", c.write_duration);
    r.get("read_precharge_end_s", c.read_precharge_end);
    r.get("read_wl_start_s", c.read_wl_start);
    r.get("read_wl_width_s", c.read_wl_width);
    r.get("read_duration_s", c.read_duration);
    r.get("en_pulse_s", c.en_pulse);
    r.get("wre_window_s", c.wre_window);
    r.get("powerdown_ramp_s", c.powerdown_ramp);
    r.get("powerdown_hold_s", c.powerdown_hold);
    r.get("restore_vdd_ramp_s", c.restore_vdd_ramp);
    r.get("restore_equalize_s", c.restore_equalize);
    r.get("restore_window_s", c.restore_window);
    r.get("restore_settle_s", c.restore_settle);
    r.finish();
}

void read_engine(const json& doc, TransientConfig& e) {
    SectionReader r(doc, "engine");
    r.get("dt_s", e.dt);
    r.get("newton_tol_v", e.newton_tol);
    r.get("newton_max_iters", e.newton_max_iters);
    r.get("gmin_s", e.gmin);
    r.get("current_tol_a", e.current_tol);
    r.get("sample_stride", e.sample_stride);
    r.finish();
}

void read_mc(const json& doc, McSection& m) {
    SectionReader r(doc, "scenario.mc");
    std::string kind = m.kind == McKind::switching ? "switching" : "savings";
    r.get("kind", kind);
    if (kind == "switching")
        m.kind = McKind::switching;
    else if (kind == "savings")
        m.kind = McKind::savings;
    else
        throw ConfigError("scenario.mc.kind must be 'switching' or 'savings'");
    r.get("n_runs", m.n_runs);
    r.get("temperature_k", m.temperature);
    r.get("overdrives", m.overdrives);
    r.get("pulse_widths_s", m.pulse_widths);
    r.get("horizon_s", m.horizon);
    r.get("threads", m.threads);
    r.finish();
    if (m.n_runs < 1) throw ConfigError("scenario.mc.n_runs must be >= 1");
    if (m.overdrives.empty()) throw ConfigError("scenario.mc.overdrives must not be empty");
}

void read_scenario(const json& doc, ScenarioConfig& c) {
    SectionReader r(doc, "scenario");
    std::string kind = "sequence";
    switch (c.kind) {
        case ScenarioKind::sequence: kind = "sequence"; break;
        case ScenarioKind::calibrate: kind = "calibrate"; break;
        case ScenarioKind::montecarlo: kind = "montecarlo"; break;
        case ScenarioKind::backup_compare: kind = "backup-compare"; break;
    }
    r.get("type", kind);
    if (kind == "sequence")
        c.kind = ScenarioKind::sequence;
    else if (kind == "calibrate")
        c.kind = ScenarioKind::calibrate;
    else if (kind == "montecarlo")
        c.kind = ScenarioKind::montecarlo;
    else if (kind == "backup-compare")
        c.kind = ScenarioKind::backup_compare;
    else
        throw ConfigError("scenario.type must be sequence|calibrate|montecarlo|backup-compare");
    r.get("operations", c.operations);
    r.get("mtj1_initial", c.mtj1_initial);
    r.get("mtj2_initial", c.mtj2_initial);
    r.seen.insert("mc");
    if (doc.contains("mc")) read_mc(doc.at("mc"), c.mc);
    r.finish();

    static const std::set<std::string> ops{"write0", "write1", "read",   "backup",
                                           "powerdown", "restore", "hold"};
    for (const auto& op : c.operations)
        if (!ops.count(op)) throw ConfigError("unknown operation '" + op + "' in scenario");
    initial_state_from_name(c.mtj1_initial);
    initial_state_from_name(c.mtj2_initial);
}

void read_output(const json& doc, ScenarioConfig& c) {
    SectionReader r(doc, "output");
    r.get("trace_csv", c.trace_csv);
    r.get("summary", c.summary_file);
    r.get("samples_csv", c.samples_csv);
    int stride = c.engine.sample_stride;
    r.get("sample_stride", stride);
    c.engine.sample_stride = stride;
    r.finish();
}

} // namespace

MagnetizationState initial_state_from_name(const std::string& name) {
    // 1 degree off the pole; the exact pole is a stagnation point at T = 0.
    if (name == "P") return MagnetizationState::tilted(0.0174532925199433, true);
    if (name == "AP") return MagnetizationState::tilted(0.0174532925199433, false);
    throw ConfigError("MTJ initial state must be 'P' or 'AP', got '" + name + "'");
}

ScenarioConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    ScenarioConfig cfg;
    static const std::set<std::string> sections{"seed",    "mtj",      "transistors", "cell",
                                                "engine",  "scenario", "output"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!sections.count(key)) throw ConfigError("unknown top-level key '" + key + "'");
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
            throw ConfigError("seed must be an unsigned integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("mtj")) read_mtj(doc.at("mtj"), cfg.cell.mtj);
    if (doc.contains("transistors")) read_transistors(doc.at("transistors"), cfg.cell);
    if (doc.contains("cell")) read_cell(doc.at("cell"), cfg.cell);
    if (doc.contains("engine")) read_engine(doc.at("engine"), cfg.engine);
    if (doc.contains("scenario")) read_scenario(doc.at("scenario"), cfg);
    if (doc.contains("output")) read_output(doc.at("output"), cfg);

    cfg.cell.mtj.validate();
    try {
        cfg.cell.validate();
    } catch (const ConstructionError& err) {
        throw ConfigError(err.what());
    }
    TransientConfig probe = cfg.engine;
    probe.t_end = std::max(probe.dt, 1e-12);
    try {
        probe.validate();
    } catch (const ParamError& err) {
        throw ConfigError(err.what());
    }
    cfg.mc.mtj = cfg.cell.mtj;
    cfg.mc.cell = cfg.cell;
    cfg.mc.engine = cfg.engine;
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("config parse failure: ") + err.what());
    }
    return parse_config(doc);
}

nlohmann::json ScenarioConfig::echo() const {
    nlohmann::json j;
    j["seed"] = seed;
    const MtjParams& m = cell.mtj;
    j["mtj"] = {{"free_layer_width_m", m.free_layer_width},
                {"free_layer_length_m", m.free_layer_length},
                {"free_layer_thickness_m", m.free_layer_thickness},
                {"oxide_thickness_m", m.oxide_thickness},
                {"saturation_magnetization_a_per_m", m.saturation_magnetization},
                {"damping", m.damping},
                {"thermal_stability", m.thermal_stability},
                {"r_parallel_ohm", m.r_parallel},
                {"r_antiparallel_ohm", m.r_antiparallel},
                {"ic0_target_a", m.ic0_target},
                {"temperature_k", m.temperature},
                {"spin_efficiency", m.spin_efficiency},
                {"gyromagnetic_ratio_rad_per_s_t", m.gyromagnetic_ratio}};
    j["transistors"] = {{"vdd_v", cell.vdd},
                        {"vth_v", cell.vth},
                        {"lambda_per_v", cell.lambda},
                        {"beta_pullup_a_per_v2", cell.beta_pullup},
                        {"beta_pulldown_a_per_v2", cell.beta_pulldown},
                        {"beta_access_a_per_v2", cell.beta_access},
                        {"beta_x1_a_per_v2", cell.beta_x1},
                        {"beta_x2_a_per_v2", cell.beta_x2},
                        {"beta_buffer_a_per_v2", cell.beta_buffer},
                        {"beta_logic_a_per_v2", cell.beta_logic},
                        {"beta_driver_a_per_v2", cell.beta_driver}};
    j["cell"] = {{"v_buf_v", cell.v_buf},
                 {"c_node_f", cell.c_node},
                 {"c_latch_f", cell.c_latch},
                 {"c_detect_f", cell.c_detect},
                 {"c_wt_f", cell.c_wt},
                 {"c_bitline_f", cell.c_bitline},
                 {"c_overlap_f", cell.c_overlap},
                 {"r_bleed_ohm", cell.r_bleed},
                 {"slew_s", cell.slew},
                 {"write_wl_start_s", cell.write_wl_start},
                 {"write_wl_width_s", cell.write_wl_width},
                 {"write_duration_s", cell.write_duration},
                 {"read_precharge_end_s", cell.read_precharge_end},
                 {"read_wl_start_s", cell.read_wl_start},
                 {"read_wl_width_s", cell.read_wl_width},
                 {"read_duration_s", cell.read_duration},
                 {"en_pulse_s", cell.en_pulse},
                 {"wre_window_s", cell.wre_window},
                 {"powerdown_ramp_s", cell.powerdown_ramp},
                 {"powerdown_hold_s", cell.powerdown_hold},
                 {"restore_vdd_ramp_s", cell.restore_vdd_ramp},
                 {"restore_equalize_s", cell.restore_equalize},
                 {"restore_window_s", cell.restore_window},
                 {"restore_settle_s", cell.restore_settle}};
    j["engine"] = {{"dt_s", engine.dt},
                   {"newton_tol_v", engine.newton_tol},
                   {"newton_max_iters", engine.newton_max_iters},
                   {"gmin_s", engine.gmin},
                   {"current_tol_a", engine.current_tol},
                   {"sample_stride", engine.sample_stride}};
    const char* kind_name = "sequence";
    switch (kind) {
        case ScenarioKind::sequence: kind_name = "sequence"; break;
        case ScenarioKind::calibrate: kind_name = "calibrate"; break;
        case ScenarioKind::montecarlo: kind_name = "montecarlo"; break;
        case ScenarioKind::backup_compare: kind_name = "backup-compare"; break;
    }
    j["scenario"] = {{"type", kind_name},
                     {"operations", operations},
                     {"mtj1_initial", mtj1_initial},
                     {"mtj2_initial", mtj2_initial},
                     {"mc",
                      {{"kind", mc.kind == McKind::switching ? "switching" : "savings"},
                       {"n_runs", mc.n_runs},
                       {"temperature_k", mc.temperature},
                       {"overdrives", mc.overdrives},
                       {"pulse_widths_s", mc.pulse_widths},
                       {"horizon_s", mc.horizon},
                       {"threads", mc.threads}}}};
    j["output"] = {{"trace_csv", trace_csv},
                   {"summary", summary_file},
                   {"samples_csv", samples_csv},
                   {"sample_stride", engine.sample_stride}};
    return j;
}

} // namespace nvsram
