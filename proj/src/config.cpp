#include "rfsi/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rfsi/errors.hpp"

namespace rfsi {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawConfig {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> data;
    std::vector<std::string> errors;

    const std::pair<std::string, int>* find(const std::string& sec, const std::string& key) const {
        auto s = data.find(sec);
        if (s == data.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }
};

RawConfig parse_raw(const std::string& text) {
    RawConfig raw;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                raw.errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                raw.errors.push_back("line " + std::to_string(lineno) + ": empty section name");
            raw.data[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            raw.errors.push_back("line " + std::to_string(lineno) + " col " +
                                 std::to_string(line.size()) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            raw.errors.push_back("line " + std::to_string(lineno) + " col 1: empty key");
            continue;
        }
        if (section.empty()) {
            raw.errors.push_back("line " + std::to_string(lineno) + ": key '" + key +
                                 "' outside any section");
            continue;
        }
        if (raw.data[section].count(key))
            raw.errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + section +
                                 "." + key + "'");
        raw.data[section][key] = {val, lineno};
    }
    return raw;
}

struct Reader {
    const RawConfig& raw;
    std::vector<std::string>& errors;
    std::map<std::string, std::vector<std::string>> known;  // section -> keys consumed

    void note(const std::string& sec, const std::string& key) { known[sec].push_back(key); }

    double num(const std::string& sec, const std::string& key) {
        note(sec, key);
        const auto* e = raw.find(sec, key);
        if (!e) {
            errors.push_back("missing required field " + sec + "." + key);
            return 0.0;
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(e->first, &pos);
            if (pos != e->first.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            errors.push_back("line " + std::to_string(e->second) + ": " + sec + "." + key +
                             " is not a number: '" + e->first + "'");
            return 0.0;
        }
    }

    double num_opt(const std::string& sec, const std::string& key, double dflt) {
        note(sec, key);
        return raw.find(sec, key) ? num_checked(sec, key) : dflt;
    }

    double num_checked(const std::string& sec, const std::string& key) {
        const auto* e = raw.find(sec, key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(e->first, &pos);
            if (pos != e->first.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            errors.push_back("line " + std::to_string(e->second) + ": " + sec + "." + key +
                             " is not a number: '" + e->first + "'");
            return 0.0;
        }
    }

    int integer(const std::string& sec, const std::string& key) {
        const double v = num(sec, key);
        if (v != std::floor(v)) errors.push_back(sec + "." + key + " must be an integer");
        return static_cast<int>(v);
    }

    int integer_opt(const std::string& sec, const std::string& key, int dflt) {
        note(sec, key);
        if (!raw.find(sec, key)) return dflt;
        const double v = num_checked(sec, key);
        if (v != std::floor(v)) errors.push_back(sec + "." + key + " must be an integer");
        return static_cast<int>(v);
    }

    bool flag_opt(const std::string& sec, const std::string& key, bool dflt) {
        note(sec, key);
        const auto* e = raw.find(sec, key);
        if (!e) return dflt;
        if (e->first == "true") return true;
        if (e->first == "false") return false;
        errors.push_back("line " + std::to_string(e->second) + ": " + sec + "." + key +
                         " must be 'true' or 'false'");
        return dflt;
    }

    std::string text_opt(const std::string& sec, const std::string& key, std::string dflt) {
        note(sec, key);
        const auto* e = raw.find(sec, key);
        return e ? e->first : std::move(dflt);
    }

    std::string text(const std::string& sec, const std::string& key) {
        note(sec, key);
        const auto* e = raw.find(sec, key);
        if (!e) {
            errors.push_back("missing required field " + sec + "." + key);
            return "";
        }
        return e->first;
    }

    void reject_unknown() {
        for (const auto& [sec, keys] : raw.data) {
            auto it = known.find(sec);
            if (it == known.end()) {
                errors.push_back("unknown section [" + sec + "]");
                continue;
            }
            for (const auto& [key, val] : keys) {
                if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                    errors.push_back("line " + std::to_string(val.second) + ": unknown key " + sec +
                                     "." + key);
            }
        }
    }
};

// "t0:w0, t1:w1, ..." -> RotationSpec schedule
void parse_schedule(const std::string& s, RotationSpec& spec, std::vector<std::string>& errors) {
    spec.times.clear();
    spec.omegas.clear();
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            errors.push_back("rotation.omega_schedule entry '" + item + "' is not 'time:omega'");
            return;
        }
        try {
            spec.times.push_back(std::stod(item.substr(0, colon)));
            spec.omegas.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            errors.push_back("rotation.omega_schedule entry '" + item + "' is not numeric");
            return;
        }
    }
    if (spec.times.empty()) {
        errors.push_back("rotation.omega_schedule must contain at least one 'time:omega' entry");
        return;
    }
    if (spec.times.front() != 0.0)
        errors.push_back("rotation.omega_schedule must start at time 0");
    for (std::size_t i = 1; i < spec.times.size(); ++i)
        if (!(spec.times[i] > spec.times[i - 1]))
            errors.push_back("rotation.omega_schedule times must be strictly increasing");
}

void parse_e_list(const std::string& s, std::vector<double>& out, std::vector<std::string>& errors) {
    out.clear();
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            errors.push_back("sweep.youngs_values entry '" + item + "' is not numeric");
            return;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] <= 0.0) errors.push_back("sweep.youngs_values must be positive");
        if (i > 0 && !(out[i] > out[i - 1]))
            errors.push_back("sweep.youngs_values must be strictly ascending");
    }
}

}  // namespace

void RunConfig::validate() const {
    std::vector<std::string> errors;
    try {
        geometry.validate();
    } catch (const InvalidGeometry& e) {
        errors.push_back(std::string("geometry: ") + e.what());
    }
    try {
        materials.validate();
    } catch (const ValidationError& e) {
        errors.push_back(std::string("materials: ") + e.what());
    }
    try {
        loop.validate();
    } catch (const ValidationError& e) {
        errors.push_back(std::string("timeloop: ") + e.what());
    }
    if (!rotation.valid()) errors.push_back("rotation: schedule invalid");
    if (!(mesh_h > 0.0)) errors.push_back("discretization: mesh_h must be positive");
    if (ring_nodes != 0 && (ring_nodes % 8 != 0 || ring_nodes < 24))
        errors.push_back("discretization: ring_nodes must be 0 or a multiple of 8 that is >= 24");
    if (rf_layers < 0) errors.push_back("discretization: rf_layers must be >= 0");
    if (!(disc.delta0 > 0.0 && disc.delta0 < 1.0))
        errors.push_back("discretization: delta0 must satisfy 0 < delta0 < 1");
    if (disc.delta_supg < 0.0) errors.push_back("discretization: delta_supg must be >= 0");
    if (disc.viscous_factor != 1.0 && disc.viscous_factor != 2.0)
        errors.push_back("discretization: viscous_factor must be 1 or 2");
    if (!(flow.inlet_peak >= 0.0)) errors.push_back("flow: inlet_peak_velocity must be >= 0");
    if (flow.ramp_time < 0.0) errors.push_back("flow: inlet_ramp_time must be >= 0");
    if (!(solver.outer_tol > 0.0)) errors.push_back("solver: outer_tol must be positive");
    if (solver.restart < 1) errors.push_back("solver: restart must be >= 1");
    if (solver.max_outer < 1) errors.push_back("solver: max_outer must be >= 1");
    if (!(solver.inner_tol > 0.0)) errors.push_back("solver: inner_tol must be positive");
    if (solver.inner_max_iter < 1) errors.push_back("solver: inner_max_iter must be >= 1");
    if (output.vtk_cadence < 0.0) errors.push_back("output: vtk_cadence must be >= 0");
    if (output.probe_arm < 0 || output.probe_arm > 3)
        errors.push_back("output: probe_arm must be in 0..3");
    if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors) msg += e + "\n";
        throw ValidationError(msg);
    }
}

RunConfig load_config(const std::string& text) {
    RawConfig raw = parse_raw(text);
    std::vector<std::string> errors = raw.errors;
    Reader rd{raw, errors, {}};
    RunConfig cfg;

    cfg.geometry.channel_length = rd.num("geometry", "channel_length");
    cfg.geometry.channel_width = rd.num("geometry", "channel_width");
    cfg.geometry.arm_length = rd.num("geometry", "rotor_arm_length");
    cfg.geometry.arm_width = rd.num("geometry", "rotor_arm_width");
    cfg.geometry.buffer_radius = rd.num("geometry", "buffer_radius");
    cfg.geometry.axis_radius = rd.num("geometry", "axis_radius");
    cfg.geometry.center.x = rd.num("geometry", "center_x");
    cfg.geometry.center.y = rd.num("geometry", "center_y");

    cfg.materials.rho_f = rd.num("materials", "fluid_density");
    cfg.materials.mu_f = rd.num("materials", "fluid_viscosity");
    cfg.materials.rho_s = rd.num("materials", "structure_density");
    cfg.materials.youngs = rd.num("materials", "youngs_modulus");
    cfg.materials.poisson = rd.num("materials", "poisson_ratio");

    const std::string sched = rd.text("rotation", "omega_schedule");
    if (!sched.empty()) parse_schedule(sched, cfg.rotation, errors);
    cfg.rotation.theta0 = rd.num_opt("rotation", "theta0", 0.0);
    cfg.rotation.center = cfg.geometry.center;

    cfg.flow.inlet_peak = rd.num("flow", "inlet_peak_velocity");
    cfg.flow.ramp_time = rd.num("flow", "inlet_ramp_time");

    cfg.mesh_h = rd.num("discretization", "mesh_h");
    cfg.ring_nodes = rd.integer_opt("discretization", "ring_nodes", 0);
    cfg.rf_layers = rd.integer_opt("discretization", "rf_layers", 0);
    cfg.disc.delta0 = rd.num("discretization", "delta0");
    cfg.disc.delta_supg = rd.num("discretization", "delta_supg");
    cfg.disc.viscous_factor = rd.num("discretization", "viscous_factor");

    cfg.loop.dt = rd.num("timeloop", "dt");
    cfg.loop.t_end = rd.num("timeloop", "t_end");
    cfg.loop.relaxation = rd.num("timeloop", "relaxation");
    cfg.loop.fp_tol = rd.num("timeloop", "fixedpoint_tol");
    cfg.loop.newton_tol = rd.num("timeloop", "newton_tol");
    cfg.loop.max_sweeps = rd.integer("timeloop", "max_sweeps");
    cfg.loop.max_newton = rd.integer("timeloop", "max_newton");

    cfg.solver.outer_tol = rd.num("solver", "outer_tol");
    cfg.solver.restart = rd.integer("solver", "restart");
    cfg.solver.max_outer = rd.integer("solver", "max_outer");
    cfg.solver.inner_tol = rd.num("solver", "inner_tol");
    cfg.solver.inner_max_iter = rd.integer("solver", "inner_max_iter");

    cfg.output.directory = rd.text_opt("output", "directory", "out");
    cfg.output.vtk_cadence = rd.num_opt("output", "vtk_cadence", 0.1);
    cfg.output.probe_arm = rd.integer_opt("output", "probe_arm", 0);
    cfg.output.write_mesh_snapshots = rd.flag_opt("output", "write_mesh_snapshots", false);
    cfg.output.dump_matrix = rd.flag_opt("output", "dump_matrix", false);

    rd.note("sweep", "youngs_values");
    if (const auto* e = raw.find("sweep", "youngs_values"))
        parse_e_list(e->first, cfg.sweep.youngs_values, errors);

    rd.reject_unknown();

    if (errors.empty()) {
        try {
            cfg.validate();
        } catch (const ValidationError& e) {
            throw;  // already aggregated
        }
    } else {
        // run semantic validation too so the report is as complete as possible
        try {
            cfg.validate();
        } catch (const ValidationError& e) {
            std::istringstream is(e.what());
            std::string l;
            while (std::getline(is, l))
                if (!l.empty()) errors.push_back(l);
        }
        std::string msg;
        for (const auto& e : errors) msg += e + "\n";
        const bool any_parse = !raw.errors.empty();
        if (any_parse) throw ParseError(msg);
        throw ValidationError(msg);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return load_config(ss.str());
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[geometry]\n";
    os << "channel_length = " << fmt(cfg.geometry.channel_length) << "\n";
    os << "channel_width = " << fmt(cfg.geometry.channel_width) << "\n";
    os << "rotor_arm_length = " << fmt(cfg.geometry.arm_length) << "\n";
    os << "rotor_arm_width = " << fmt(cfg.geometry.arm_width) << "\n";
    os << "buffer_radius = " << fmt(cfg.geometry.buffer_radius) << "\n";
    os << "axis_radius = " << fmt(cfg.geometry.axis_radius) << "\n";
    os << "center_x = " << fmt(cfg.geometry.center.x) << "\n";
    os << "center_y = " << fmt(cfg.geometry.center.y) << "\n";
    os << "\n[materials]\n";
    os << "fluid_density = " << fmt(cfg.materials.rho_f) << "\n";
    os << "fluid_viscosity = " << fmt(cfg.materials.mu_f) << "\n";
    os << "structure_density = " << fmt(cfg.materials.rho_s) << "\n";
    os << "youngs_modulus = " << fmt(cfg.materials.youngs) << "\n";
    os << "poisson_ratio = " << fmt(cfg.materials.poisson) << "\n";
    os << "\n[rotation]\n";
    os << "omega_schedule = ";
    for (std::size_t i = 0; i < cfg.rotation.times.size(); ++i) {
        if (i) os << ", ";
        os << fmt(cfg.rotation.times[i]) << ":" << fmt(cfg.rotation.omegas[i]);
    }
    os << "\n";
    os << "theta0 = " << fmt(cfg.rotation.theta0) << "\n";
    os << "\n[flow]\n";
    os << "inlet_peak_velocity = " << fmt(cfg.flow.inlet_peak) << "\n";
    os << "inlet_ramp_time = " << fmt(cfg.flow.ramp_time) << "\n";
    os << "\n[discretization]\n";
    os << "mesh_h = " << fmt(cfg.mesh_h) << "\n";
    os << "ring_nodes = " << cfg.ring_nodes << "\n";
    os << "rf_layers = " << cfg.rf_layers << "\n";
    os << "delta0 = " << fmt(cfg.disc.delta0) << "\n";
    os << "delta_supg = " << fmt(cfg.disc.delta_supg) << "\n";
    os << "viscous_factor = " << fmt(cfg.disc.viscous_factor) << "\n";
    os << "\n[timeloop]\n";
    os << "dt = " << fmt(cfg.loop.dt) << "\n";
    os << "t_end = " << fmt(cfg.loop.t_end) << "\n";
    os << "relaxation = " << fmt(cfg.loop.relaxation) << "\n";
    os << "fixedpoint_tol = " << fmt(cfg.loop.fp_tol) << "\n";
    os << "newton_tol = " << fmt(cfg.loop.newton_tol) << "\n";
    os << "max_sweeps = " << cfg.loop.max_sweeps << "\n";
    os << "max_newton = " << cfg.loop.max_newton << "\n";
    os << "\n[solver]\n";
    os << "outer_tol = " << fmt(cfg.solver.outer_tol) << "\n";
    os << "restart = " << cfg.solver.restart << "\n";
    os << "max_outer = " << cfg.solver.max_outer << "\n";
    os << "inner_tol = " << fmt(cfg.solver.inner_tol) << "\n";
    os << "inner_max_iter = " << cfg.solver.inner_max_iter << "\n";
    os << "\n[output]\n";
    os << "directory = " << cfg.output.directory << "\n";
    os << "vtk_cadence = " << fmt(cfg.output.vtk_cadence) << "\n";
    os << "probe_arm = " << cfg.output.probe_arm << "\n";
    os << "write_mesh_snapshots = " << (cfg.output.write_mesh_snapshots ? "true" : "false") << "\n";
    os << "dump_matrix = " << (cfg.output.dump_matrix ? "true" : "false") << "\n";
    if (!cfg.sweep.youngs_values.empty()) {
        os << "\n[sweep]\n";
        os << "youngs_values = ";
        for (std::size_t i = 0; i < cfg.sweep.youngs_values.size(); ++i) {
            if (i) os << ", ";
            os << fmt(cfg.sweep.youngs_values[i]);
        }
        os << "\n";
    }
    return os.str();
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.rotation = RotationSpec::constant(cfg.geometry.center, 1.0);
    cfg.sweep.youngs_values = {2.5e4, 2.5e5, 2.5e6, 2.5e7, 2.5e8, 2.5e9};
    return cfg;
}

}  // namespace rfsi
