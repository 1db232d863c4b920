#pragma once

#include "locnot/errors.hpp"
#include "locnot/gate.hpp"
#include "locnot/measurement.hpp"
#include "locnot/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace locnot {

/// Flat key-path configuration file: one `dotted.key = value` per line,
/// '#' starts a comment. Values are free-form strings parsed on access.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::istream& is) {
        KeyValueConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::filesystem::path& path) {
        std::ifstream is(path);
        if (!is) throw ValidationError("cannot open config file " + path.string());
        return parse(is);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing");
            return d;
        } catch (const std::exception&) {
            throw ValidationError("config key '" + key + "': cannot parse '" + *v + "' as a number");
        }
    }

    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        try {
            return std::stoull(*v);
        } catch (const std::exception&) {
            throw ValidationError("config key '" + key + "': cannot parse '" + *v + "' as an integer");
        }
    }

    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        std::vector<double> out;
        std::istringstream ss(*v);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                out.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ValidationError("config key '" + key + "': cannot parse list entry '" + cell + "'");
            }
        }
        if (out.empty())
            throw ValidationError("config key '" + key + "': empty list");
        return out;
    }

    bool any_key_with_prefix(const std::string& prefix) const {
        auto it = values_.lower_bound(prefix);
        return it != values_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Gate configuration file: keys ppbs1.tH, ppbs1.tV, ppbs2.tH, ppbs2.tV,
/// ppbs3.tH, ppbs3.tV. Omitted keys default to the ideal gate; the first
/// PPBS's reflectivities follow from T + R = 1.
inline GateConfig gate_config_from_keys(const KeyValueConfig& cfg, const std::string& prefix = "") {
    GateConfig g = GateConfig::ideal();
    g.ppbs1.t_h = cfg.get_double(prefix + "ppbs1.tH", g.ppbs1.t_h);
    g.ppbs1.t_v = cfg.get_double(prefix + "ppbs1.tV", g.ppbs1.t_v);
    g.ppbs1.r_h = 1.0 - g.ppbs1.t_h;
    g.ppbs1.r_v = 1.0 - g.ppbs1.t_v;
    g.ppbs2.t_h = cfg.get_double(prefix + "ppbs2.tH", g.ppbs2.t_h);
    g.ppbs2.t_v = cfg.get_double(prefix + "ppbs2.tV", g.ppbs2.t_v);
    g.ppbs3.t_h = cfg.get_double(prefix + "ppbs3.tH", g.ppbs3.t_h);
    g.ppbs3.t_v = cfg.get_double(prefix + "ppbs3.tV", g.ppbs3.t_v);
    g.validate();
    return g;
}

inline GateConfig load_gate_config(const std::filesystem::path& path) {
    return gate_config_from_keys(KeyValueConfig::parse_file(path));
}

inline void save_gate_config(const GateConfig& g, std::ostream& os) {
    os.precision(17);
    os << "ppbs1.tH = " << g.ppbs1.t_h << "\n";
    os << "ppbs1.tV = " << g.ppbs1.t_v << "\n";
    os << "ppbs2.tH = " << g.ppbs2.t_h << "\n";
    os << "ppbs2.tV = " << g.ppbs2.t_v << "\n";
    os << "ppbs3.tH = " << g.ppbs3.t_h << "\n";
    os << "ppbs3.tV = " << g.ppbs3.t_v << "\n";
}

inline void save_gate_config(const GateConfig& g, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    save_gate_config(g, os);
}

/// Everything one simulation run needs: either an explicit eta override or a
/// waveform chain (presets or CSV files, programmed delay, integration
/// window) that produces it, plus the gate, counting, and output settings.
struct ScenarioConfig {
    std::optional<double> eta_override;
    std::string source_waveform = "preset";  ///< "preset" or a CSV path
    std::string memory_waveform = "preset";
    TimeGrid grid = default_grid();
    double programmed_delay_s = 0.0;  ///< extra delay applied to the memory photon
    GateConfig gate = GateConfig::ideal();
    double window_offset_s = -0.3e-9;
    double window_tau_int_s = 1.0e-9;
    std::vector<double> sweep_tau_s{0.5e-9, 0.75e-9, 1e-9, 1.5e-9, 2e-9, 3e-9, 4e-9, 6e-9};
    std::vector<double> hom_delays_s;  ///< empty = default +-3 ns scan, 50 ps steps
    std::uint64_t shots = 1'000'000;
    std::uint64_t seed = 1;
    NoiseConfig noise;
    std::string out_dir = ".";
};

inline ScenarioConfig scenario_from_keys(const KeyValueConfig& cfg) {
    ScenarioConfig sc;
    const bool has_eta = cfg.has("eta.override");
    if (cfg.any_key_with_prefix("waveform.") && has_eta)
        throw ValidationError("scenario: eta.override and waveform.* keys are mutually exclusive");
    if (has_eta) {
        const double eta = cfg.get_double("eta.override", 0.0);
        if (!(eta >= 0.0 && eta <= 1.0))
            throw ValidationError("scenario: eta.override must lie in [0, 1]");
        sc.eta_override = eta;
    }
    sc.source_waveform = cfg.get("waveform.source").value_or(sc.source_waveform);
    sc.memory_waveform = cfg.get("waveform.memory").value_or(sc.memory_waveform);
    sc.grid.t_start = cfg.get_double("waveform.grid.t_start_s", sc.grid.t_start);
    sc.grid.dt = cfg.get_double("waveform.grid.dt_s", sc.grid.dt);
    sc.grid.n_samples = cfg.get_uint("waveform.grid.n", sc.grid.n_samples);
    sc.programmed_delay_s = cfg.get_double("waveform.delay_s", sc.programmed_delay_s);
    for (const auto& name : {sc.source_waveform, sc.memory_waveform})
        if (name != "preset" && !std::filesystem::exists(name))
            throw ValidationError("scenario: waveform file '" + name + "' does not exist");
    if (auto path = cfg.get("gate.config")) {
        if (!std::filesystem::exists(*path))
            throw ValidationError("scenario: gate config '" + *path + "' does not exist");
        sc.gate = load_gate_config(*path);
    } else {
        sc.gate = gate_config_from_keys(cfg, "gate.");
    }
    sc.window_offset_s = cfg.get_double("window.offset_s", sc.window_offset_s);
    sc.window_tau_int_s = cfg.get_double("window.tau_int_s", sc.window_tau_int_s);
    sc.sweep_tau_s = cfg.get_double_list("window.sweep_tau_s", sc.sweep_tau_s);
    sc.hom_delays_s = cfg.get_double_list("hom.delays_s", sc.hom_delays_s);
    sc.shots = cfg.get_uint("shots", sc.shots);
    if (sc.shots < 1) throw ValidationError("scenario: shots must be at least 1");
    sc.seed = cfg.get_uint("seed", sc.seed);
    sc.noise.epsilon = cfg.get_double("noise.epsilon", sc.noise.epsilon);
    if (!(sc.noise.epsilon >= 0.0 && sc.noise.epsilon <= 1.0))
        throw ValidationError("scenario: noise.epsilon must lie in [0, 1]");
    if (auto model = cfg.get("noise.model")) {
        if (*model == "multinomial") sc.noise.model = CountModel::multinomial;
        else if (*model == "poisson") sc.noise.model = CountModel::poisson;
        else throw ValidationError("scenario: noise.model must be multinomial or poisson");
    }
    sc.out_dir = cfg.get("out").value_or(sc.out_dir);
    return sc;
}

/// Result of resolving a scenario's indistinguishability.
struct ResolvedEta {
    double eta = 0.0;
    double acceptance_memory = 1.0;
    double acceptance_source = 1.0;
};

struct ScenarioWaveforms {
    TemporalWaveform memory;
    TemporalWaveform source;
};

inline ScenarioWaveforms scenario_waveforms(const ScenarioConfig& sc) {
    if (sc.eta_override)
        throw ValidationError("scenario: eta override set, no waveforms to build");
    TemporalWaveform source = sc.source_waveform == "preset"
                                  ? preset_source_waveform(sc.grid)
                                  : read_waveform_csv(sc.source_waveform, true);
    TemporalWaveform memory = sc.memory_waveform == "preset"
                                  ? preset_memory_waveform(sc.grid)
                                  : read_waveform_csv(sc.memory_waveform, true);
    if (sc.programmed_delay_s != 0.0) memory = delay(memory, sc.programmed_delay_s);
    return ScenarioWaveforms{std::move(memory), std::move(source)};
}

/// Window both photons with the scenario's window and compute the resulting
/// overlap, or pass through the explicit eta override.
inline ResolvedEta resolve_eta(const ScenarioConfig& sc) {
    if (sc.eta_override) return ResolvedEta{*sc.eta_override, 1.0, 1.0};
    const ScenarioWaveforms wf = scenario_waveforms(sc);
    const WindowConfig window{sc.window_offset_s, sc.window_tau_int_s};
    const WindowedWaveform wm = apply_window(wf.memory, window);
    const WindowedWaveform ws = apply_window(wf.source, window);
    return ResolvedEta{overlap_eta(wm.waveform, ws.waveform), wm.acceptance, ws.acceptance};
}

} // namespace locnot
