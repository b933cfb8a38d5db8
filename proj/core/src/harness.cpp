#include "dqbm/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "dqbm/constants.hpp"
#include "dqbm/states.hpp"
#include "dqbm/version.hpp"

namespace dqbm {

namespace {

std::vector<Scenario> build_catalog() {
    std::vector<Scenario> cat;

    Scenario dec_mu;
    dec_mu.name = "decoherence-mu";
    dec_mu.summary = "relative coherence C_R(t) vs environment damping mu";
    dec_mu.potential = PotentialKind::Quartic;
    dec_mu.initial = InitialStateKind::DoubleGaussianAtWells;
    dec_mu.omega_r = 0.025;
    dec_mu.x0 = 2.5;
    dec_mu.gamma = 2.5e-4;
    dec_mu.sweep_key = "mu";
    dec_mu.sweep_values = {0.1, 0.5, 1.0};
    dec_mu.half_width = 8.0;
    dec_mu.n_points = 257;
    dec_mu.t_end = 50.0;
    dec_mu.record_interval = 0.5;
    dec_mu.observable = "C_R";
    cat.push_back(dec_mu);

    Scenario dec_slope = dec_mu;
    dec_slope.name = "decoherence-slope";
    dec_slope.summary = "coherence ratio C_g(t) on linear ramps, undamped environment";
    dec_slope.potential = PotentialKind::Linear;
    dec_slope.mu = 0.0;
    dec_slope.sweep_key = "g";
    dec_slope.sweep_values = {0.5, 1.0, 2.0};
    dec_slope.observable = "C_g";
    cat.push_back(dec_slope);

    Scenario dec_gamma = dec_mu;
    dec_gamma.name = "decoherence-gamma";
    dec_gamma.summary = "relative coherence C_R(t) vs relaxation rate gamma, mu = 1";
    dec_gamma.mu = 1.0;
    dec_gamma.sweep_key = "gamma";
    dec_gamma.sweep_values = {1.25e-4, 2.5e-4, 5.0e-4};
    cat.push_back(dec_gamma);

    Scenario tr_mu;
    tr_mu.name = "transfer-mu";
    tr_mu.summary = "left-well probability P(t) vs environment damping mu";
    tr_mu.potential = PotentialKind::Quartic;
    tr_mu.initial = InitialStateKind::SingleGaussianRightWell;
    tr_mu.omega_r = 0.005;
    tr_mu.x0 = 2.5;
    tr_mu.gamma = 2.5e-4;
    tr_mu.sweep_key = "mu";
    tr_mu.sweep_values = {0.0, 0.01, 0.1, 0.5};
    tr_mu.half_width = 14.0;
    tr_mu.n_points = 257;
    tr_mu.t_end = 1000.0;
    tr_mu.record_interval = 5.0;
    tr_mu.observable = "P";
    cat.push_back(tr_mu);

    Scenario tr_gw = tr_mu;
    tr_gw.name = "transfer-gamma-weak";
    tr_gw.summary = "P(t) vs gamma at weak environment damping, mu = 0.01";
    tr_gw.mu = 0.01;
    tr_gw.sweep_key = "gamma";
    tr_gw.sweep_values = {1.25e-4, 2.5e-4, 5.0e-4};
    cat.push_back(tr_gw);

    Scenario tr_gs = tr_gw;
    tr_gs.name = "transfer-gamma-strong";
    tr_gs.summary = "P(t) vs gamma at strong environment damping, mu = 1";
    tr_gs.mu = 1.0;
    cat.push_back(tr_gs);

    Scenario resc;
    resc.name = "rescaled-free";
    resc.summary = "absolute coherence C(t) under gamma = gamma0/a, mu = mu0*a";
    resc.potential = PotentialKind::Free;
    resc.initial = InitialStateKind::DoubleGaussianAtWells;
    resc.omega_r = 0.025;  // sets the default initial-state width
    resc.x0 = 2.5;
    resc.gamma0 = 2.5e-4;
    resc.mu0 = 1.0;
    resc.sweep_key = "a";
    resc.sweep_values = {0.5, 1.0, 2.0, 4.0};
    resc.half_width = 8.0;
    resc.n_points = 257;
    resc.t_end = 30.0;
    resc.record_interval = 0.5;
    resc.observable = "C";
    cat.push_back(resc);

    return cat;
}

constexpr double kBoundaryFluxLimit = 1e-8;

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string format_12g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- configuration -------------------------------------------------------

struct KeyRule {
    const char* key;
    bool (*valid)(double);
    const char* message;
};

constexpr KeyRule kScalarRules[] = {
    {"kT", [](double v) { return v > 0.0; }, "kT must be > 0"},
    {"gamma", [](double v) { return v >= 0.0; }, "gamma must be >= 0"},
    {"mu", [](double v) { return v >= 0.0; }, "mu must be >= 0"},
    {"omega_R", [](double v) { return v > 0.0; }, "omega_R must be > 0"},
    {"x0", [](double v) { return v > 0.0; }, "x0 must be > 0"},
    {"sigma", [](double v) { return v > 0.0; }, "sigma must be > 0"},
    {"t_end", [](double v) { return v > 0.0; }, "t_end must be > 0"},
    {"dt", [](double v) { return v > 0.0; }, "dt must be > 0"},
    {"record_interval", [](double v) { return v > 0.0; }, "record_interval must be > 0"},
    {"half_width", [](double v) { return v > 0.0; }, "half_width must be > 0"},
    {"grid_points",
     [](double v) { return v >= 3.0 && v == std::floor(v) && std::fmod(v, 2.0) == 1.0; },
     "grid_points must be an odd integer >= 3"},
};

struct ListRule {
    const char* key;
    bool (*valid)(double);
    const char* message;
};

constexpr ListRule kListRules[] = {
    {"mu-list", [](double v) { return v >= 0.0; }, "mu must be >= 0"},
    {"gamma-list", [](double v) { return v >= 0.0; }, "gamma must be >= 0"},
    {"g-list", [](double v) { return v >= 0.0; }, "g must be >= 0"},
    {"a-list", [](double v) { return v > 0.0; }, "a must be > 0"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: value for '" + key + "' is not a number: " + text);
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw std::invalid_argument("config: value for '" + key + "' is not a number: " + text);
    }
    return v;
}

void set_key(ConfigOverrides& dst, const std::string& key, const std::string& value) {
    for (const auto& rule : kListRules) {
        if (key == rule.key) {
            std::vector<double> vals;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                const double v = parse_double(key, item);
                if (!rule.valid(v)) {
                    throw std::invalid_argument("config: " + std::string(rule.message) +
                                                " (got " + item + ")");
                }
                vals.push_back(v);
            }
            if (vals.empty()) {
                throw std::invalid_argument("config: empty list for '" + key + "'");
            }
            dst.lists[key] = std::move(vals);
            return;
        }
    }
    for (const auto& rule : kScalarRules) {
        if (key == rule.key) {
            const double v = parse_double(key, value);
            if (!rule.valid(v)) {
                throw std::invalid_argument("config: " + std::string(rule.message) + " (got " +
                                            value + ")");
            }
            dst.scalars[key] = v;
            return;
        }
    }
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

}  // namespace

const std::vector<Scenario>& scenario_catalog() {
    static const std::vector<Scenario> catalog = build_catalog();
    return catalog;
}

const Scenario& find_scenario(const std::string& name) {
    for (const auto& s : scenario_catalog()) {
        if (s.name == name) return s;
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

ConfigOverrides parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path.string());
    }
    ConfigOverrides out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value: " + line);
        }
        set_key(out, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

void apply_override(ConfigOverrides& dst, const std::string& item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("--set expects key=value, got '" + item + "'");
    }
    set_key(dst, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
}

// ---- scenario execution ----------------------------------------------------

namespace {

struct Plan {
    std::string run_label;     // diagnostics key, e.g. "mu=0.5" or "baseline"
    std::string column_label;  // CSV column; empty for internal baselines
    EvolutionParams params{};
    PotentialSpec potential{FreeParticle{}, 0.0};
    double init_center = 0.0;
    double init_width = 0.0;
    bool init_double = false;
    int ratio_to = -1;  // baseline plan index for C_R / C_g columns
};

struct RunOutput {
    ObservableSeries raw;
    RunDiagnostics diag;
};

struct Resolved {
    Scenario sc;
    double mass = constants::proton_mass;
    double kT = constants::kT_room;
    double sigma = 0.0;  // 0: use default width
    double dt = 0.0;     // 0: probe-calibrated
};

Resolved resolve(const Scenario& base, const ConfigOverrides& ov) {
    Resolved r;
    r.sc = base;
    for (const auto& [key, vals] : ov.lists) {
        if (key != base.sweep_key + "-list") {
            throw std::invalid_argument("scenario '" + base.name + "' sweeps '" + base.sweep_key +
                                        "'; list key '" + key + "' does not apply");
        }
        r.sc.sweep_values = vals;
    }
    for (const auto& [key, v] : ov.scalars) {
        if (key == base.sweep_key) {
            throw std::invalid_argument("'" + key + "' is swept in scenario '" + base.name +
                                        "'; use " + key + "-list");
        }
        if (key == "kT") r.kT = v;
        else if (key == "gamma") r.sc.gamma = v;
        else if (key == "mu") r.sc.mu = v;
        else if (key == "omega_R") r.sc.omega_r = v;
        else if (key == "x0") r.sc.x0 = v;
        else if (key == "sigma") r.sigma = v;
        else if (key == "dt") r.dt = v;
        else if (key == "t_end") r.sc.t_end = v;
        else if (key == "record_interval") r.sc.record_interval = v;
        else if (key == "half_width") r.sc.half_width = v;
        else if (key == "grid_points") r.sc.n_points = static_cast<int>(v);
    }
    if (r.sigma == 0.0) r.sigma = default_gaussian_width(r.mass, r.sc.omega_r);
    return r;
}

PotentialSpec potential_for(const Resolved& r, double sweep_value, bool is_sweep_g) {
    switch (r.sc.potential) {
        case PotentialKind::Quartic:
            return make_quartic_double_well(r.sc.omega_r, r.sc.x0, r.mass);
        case PotentialKind::Linear:
            return make_linear_ramp(is_sweep_g ? sweep_value : 1.0, r.mass);
        case PotentialKind::Free:
            return make_free(r.mass);
    }
    throw std::logic_error("unreachable");
}

std::vector<Plan> build_plans(const Resolved& r) {
    const auto& sc = r.sc;
    std::vector<Plan> plans;

    auto make_params = [&](double gamma, double mu) {
        return EvolutionParams{constants::hbar, r.mass, gamma, mu, r.kT};
    };

    auto init_for = [&](Plan& p) {
        if (sc.initial == InitialStateKind::DoubleGaussianAtWells) {
            p.init_double = true;
            p.init_center = sc.x0;
        } else {
            p.init_double = false;
            p.init_center = well_minima(p.potential, p.params.damping()).second;
        }
        p.init_width = r.sigma;
    };

    if (sc.observable == "C_R") {
        // one damped run per sweep value, with a mu = 0 twin at the same gamma
        const bool sweep_is_mu = (sc.sweep_key == "mu");
        for (double v : sc.sweep_values) {
            const double gamma = sweep_is_mu ? sc.gamma : v;
            const double mu = sweep_is_mu ? v : sc.mu;

            Plan base;
            base.run_label = "baseline-mu0,gamma=" + format_g(gamma);
            base.params = make_params(gamma, 0.0);
            base.potential = potential_for(r, v, false);
            init_for(base);

            int base_index = -1;
            for (std::size_t k = 0; k < plans.size(); ++k) {
                if (plans[k].run_label == base.run_label) base_index = static_cast<int>(k);
            }
            if (base_index < 0) {
                plans.push_back(base);
                base_index = static_cast<int>(plans.size()) - 1;
            }

            Plan run;
            run.run_label = sc.sweep_key + "=" + format_g(v);
            run.column_label = "C_R@" + format_g(v);
            run.params = make_params(gamma, mu);
            run.potential = potential_for(r, v, false);
            run.ratio_to = base_index;
            init_for(run);
            plans.push_back(run);
        }
    } else if (sc.observable == "C_g") {
        Plan ref;
        ref.run_label = "reference-g=1";
        ref.params = make_params(sc.gamma, sc.mu);
        ref.potential = potential_for(r, 1.0, true);
        init_for(ref);
        plans.push_back(ref);
        for (double g : sc.sweep_values) {
            Plan run;
            run.run_label = "g=" + format_g(g);
            run.column_label = "C_g@" + format_g(g);
            run.params = make_params(sc.gamma, sc.mu);
            run.potential = potential_for(r, g, true);
            run.ratio_to = 0;
            init_for(run);
            plans.push_back(run);
        }
    } else if (sc.observable == "P") {
        const bool sweep_is_mu = (sc.sweep_key == "mu");
        for (double v : sc.sweep_values) {
            Plan run;
            run.run_label = sc.sweep_key + "=" + format_g(v);
            run.column_label = "P@" + format_g(v);
            run.params = sweep_is_mu ? make_params(sc.gamma, v) : make_params(v, sc.mu);
            run.potential = potential_for(r, v, false);
            init_for(run);
            plans.push_back(run);
        }
        Plan vn;  // gamma = 0 von Neumann twin
        vn.run_label = "vn-baseline";
        vn.column_label = "P@vn";
        vn.params = make_params(0.0, 0.0);
        vn.potential = potential_for(r, 0.0, false);
        init_for(vn);
        plans.push_back(vn);
    } else if (sc.observable == "C") {
        for (double a : sc.sweep_values) {
            Plan run;
            run.run_label = "a=" + format_g(a);
            run.column_label = "C@" + format_g(a);
            run.params = make_params(sc.gamma0 / a, sc.mu0 * a);
            run.potential = potential_for(r, a, false);
            init_for(run);
            plans.push_back(run);
        }
    } else {
        throw std::logic_error("scenario '" + sc.name + "': unknown observable");
    }
    return plans;
}

DensityField build_initial(const Plan& p, const SpatialGrid& grid) {
    if (p.init_double) return double_gaussian(p.init_center, p.init_width, grid);
    return gaussian_pure({p.init_center, p.init_width}, grid);
}

RunOutput execute_plan(const Plan& plan, const SpatialGrid& grid, const StepperConfig& cfg,
                       double c_stab, const std::string& observable) {
    RunOutput out;
    out.raw.label = plan.column_label.empty() ? plan.run_label : plan.column_label;
    out.raw.params_fingerprint = fingerprint({plan.params.hbar, plan.params.mass,
                                              plan.params.gamma, plan.params.mu, plan.params.kT,
                                              grid.half_width, static_cast<double>(grid.n_points),
                                              cfg.dt, cfg.t_end});
    out.diag.dt = cfg.dt;
    out.diag.c_stab = c_stab;
    out.diag.min_eigenvalue = 1.0;

    const DensityField initial = build_initial(plan, grid);
    const bool wants_coherence = (observable != "P");

    auto observer = [&](double t, const DensityField& f) {
        out.raw.push(t, wants_coherence ? l1_coherence(f) : left_probability(f));

        out.diag.max_trace_drift = std::max(out.diag.max_trace_drift, std::abs(trace(f) - 1.0));
        double peak = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) peak = std::max(peak, std::abs(f.data()[k]));
        if (peak > 0.0) {
            out.diag.max_herm_defect =
                std::max(out.diag.max_herm_defect, hermiticity_defect(f) / peak);
        }
        out.diag.max_boundary_flux = std::max(out.diag.max_boundary_flux, boundary_ring_max(f));
        out.diag.min_eigenvalue = std::min(out.diag.min_eigenvalue, min_eigenvalue_coarse(f));
    };

    evolve(initial, cfg, plan.params, plan.potential, observer);
    return out;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    const auto path = dir / (manifest.scenario + ".manifest.json");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << manifest.to_json() << '\n';
}

}  // namespace

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    j["parameters"] = parameters;
    j["sweep"] = {{"key", sweep_key}, {"values", sweep_values}};
    j["grid"] = {{"half_width_A", half_width}, {"n_points", n_points}};
    j["stepper"] = {{"t_end_fs", t_end}, {"record_interval_fs", record_interval}};
    j["unit_constants"] = unit_constants;
    nlohmann::json diag;
    for (const auto& [label, d] : diagnostics) {
        diag[label] = {{"dt_fs", d.dt},
                       {"c_stab", d.c_stab},
                       {"max_trace_drift", d.max_trace_drift},
                       {"max_hermiticity_defect_rel", d.max_herm_defect},
                       {"max_boundary_flux", d.max_boundary_flux},
                       {"min_eigenvalue_coarse", d.min_eigenvalue}};
    }
    j["diagnostics"] = diag;
    j["output_files"] = output_files;
    j["notes"] = notes;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["code_version"] = code_version;
    return j.dump(2);
}

void write_csv(const std::vector<ObservableSeries>& series, const std::filesystem::path& path) {
    for (const auto& s : series) {
        if (s.times.size() != series.front().times.size()) {
            throw std::invalid_argument("write_csv: series have mismatched lengths");
        }
    }
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());

    out << "t_fs";
    for (const auto& s : series) out << ',' << s.label;
    out << '\n';
    if (!series.empty()) {
        for (std::size_t row = 0; row < series.front().times.size(); ++row) {
            out << format_12g(series.front().times[row]);
            for (const auto& s : series) out << ',' << format_12g(s.values[row]);
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("write_csv: I/O failure writing " + path.string());
}

ScenarioResult run_scenario(const std::string& name, const ConfigOverrides& overrides,
                            const RunOptions& options) {
    const Resolved r = resolve(find_scenario(name), overrides);
    const Scenario& sc = r.sc;

    ScenarioResult result;
    RunManifest& manifest = result.manifest;
    manifest.scenario = sc.name;
    manifest.status = "running";
    manifest.started_at = utc_now();
    manifest.code_version = version_string();
    manifest.sweep_key = sc.sweep_key;
    manifest.sweep_values = sc.sweep_values;
    manifest.half_width = sc.half_width;
    manifest.n_points = sc.n_points;
    manifest.t_end = sc.t_end;
    manifest.record_interval = sc.record_interval;
    manifest.unit_constants = {{"hbar_eV_fs", constants::hbar},
                               {"c_A_fs", constants::light_speed},
                               {"mass_eV_fs2_A2", r.mass}};
    manifest.parameters = {{"kT_eV", r.kT},
                           {"gamma_fs1", sc.gamma},
                           {"mu_fs1", sc.mu},
                           {"omega_R_fs1", sc.omega_r},
                           {"x0_A", sc.x0},
                           {"sigma_A", r.sigma}};
    if (sc.sweep_key == "a") {
        manifest.parameters["gamma0_fs1"] = sc.gamma0;
        manifest.parameters["mu0_fs1"] = sc.mu0;
    }
    write_manifest(manifest, options.out_dir);

    try {
        const SpatialGrid grid = make_grid(sc.half_width, sc.n_points);
        std::vector<Plan> plans = build_plans(r);

        // Common step size: the stability probe over every planned run, so
        // that baseline twins and sweep members share identical stepping.
        double dt = sc.record_interval;
        double c_stab = 0.0;
        if (r.dt > 0.0) {
            dt = r.dt;
            c_stab = dt * constants::hbar / (r.mass * grid.spacing * grid.spacing);
        } else {
            for (const auto& plan : plans) {
                const auto probe = probe_stability(build_initial(plan, grid), plan.params,
                                                   plan.potential);
                if (probe.dt < dt) {
                    dt = probe.dt;
                    c_stab = probe.c_stab;
                }
            }
        }
        const int per_record = static_cast<int>(std::ceil(sc.record_interval / dt - 1e-12));
        dt = sc.record_interval / per_record;
        const double t_end = sc.record_interval * std::round(sc.t_end / sc.record_interval);
        const StepperConfig cfg{dt, t_end, per_record};

        // Resolution guard: the peaks should span >= 8 nodes
        if (std::sqrt(2.0) * r.sigma / grid.spacing < 8.0) {
            manifest.notes.push_back(
                "resolution warning: initial peaks are resolved by fewer than 8 grid points");
        }
        // mu-range guard: decoherence must not outpace the bath damping
        if (sc.initial == InitialStateKind::DoubleGaussianAtWells) {
            const double sep = 2.0 * sc.x0;
            for (const auto& plan : plans) {
                if (plan.params.mu <= 0.0 || plan.params.gamma <= 0.0) continue;
                const double rate =
                    2.0 * r.mass * plan.params.gamma * r.kT * sep * sep /
                    (constants::hbar * constants::hbar);
                if (1.0 / rate < 1.0 / plan.params.mu) {
                    manifest.notes.push_back("mu-range warning (" + plan.run_label +
                                             "): decoherence timescale " + format_g(1.0 / rate) +
                                             " fs is shorter than the bath damping time " +
                                             format_g(1.0 / plan.params.mu) + " fs");
                }
            }
        }

        // Execute plans, at most options.workers at a time.
        std::vector<RunOutput> outputs(plans.size());
        const int workers = std::max(1, options.workers);
        for (std::size_t begin = 0; begin < plans.size();
             begin += static_cast<std::size_t>(workers)) {
            const std::size_t end = std::min(plans.size(), begin + workers);
            std::vector<std::future<RunOutput>> batch;
            for (std::size_t k = begin + 1; k < end; ++k) {
                batch.push_back(std::async(std::launch::async, [&, k] {
                    return execute_plan(plans[k], grid, cfg, c_stab, sc.observable);
                }));
            }
            outputs[begin] = execute_plan(plans[begin], grid, cfg, c_stab, sc.observable);
            for (std::size_t k = begin + 1; k < end; ++k) {
                outputs[k] = batch[k - begin - 1].get();
            }
        }

        for (std::size_t k = 0; k < plans.size(); ++k) {
            manifest.diagnostics[plans[k].run_label] = outputs[k].diag;
            if (outputs[k].diag.max_boundary_flux > kBoundaryFluxLimit) {
                manifest.notes.push_back(
                    "boundary-flux warning (" + plans[k].run_label + "): max ring amplitude " +
                    format_g(outputs[k].diag.max_boundary_flux) + " exceeds " +
                    format_g(kBoundaryFluxLimit));
            }
        }

        for (std::size_t k = 0; k < plans.size(); ++k) {
            const Plan& plan = plans[k];
            if (plan.column_label.empty()) continue;
            if (plan.ratio_to >= 0) {
                auto ratio = relative_coherence(outputs[k].raw, outputs[plan.ratio_to].raw);
                ratio.label = plan.column_label;
                if (ratio.truncated) {
                    manifest.notes.push_back("series " + plan.column_label +
                                             " truncated at the coherence floor");
                }
                result.series.push_back(std::move(ratio));
            } else {
                result.series.push_back(outputs[k].raw);
            }
        }

        // Ratio series may be shorter than their sources when truncated;
        // pad-free CSV requires a common length, so clip all to the shortest.
        std::size_t rows = result.series.empty() ? 0 : result.series.front().size();
        for (const auto& s : result.series) rows = std::min(rows, s.size());
        for (auto& s : result.series) {
            s.times.resize(rows);
            s.values.resize(rows);
        }

        if (!options.out_dir.empty()) {
            std::filesystem::create_directories(options.out_dir);
            result.csv_path = options.out_dir / (sc.name + ".csv");
            write_csv(result.series, result.csv_path);
            manifest.output_files.push_back(result.csv_path.string());
        }
        manifest.status = "ok";
    } catch (...) {
        manifest.status = "failed";
        try {
            throw;
        } catch (const std::exception& e) {
            manifest.error = e.what();
        }
        manifest.finished_at = utc_now();
        write_manifest(manifest, options.out_dir);
        throw;
    }

    manifest.finished_at = utc_now();
    for (const auto& note : manifest.notes) {
        std::cerr << "[" << sc.name << "] " << note << '\n';
    }
    write_manifest(manifest, options.out_dir);
    return result;
}

// ---- validation suite -----------------------------------------------------

namespace {

ValidationCheck check(const std::string& name, bool ok, const std::string& detail) {
    return {name, ok, detail};
}

}  // namespace

std::vector<ValidationCheck> run_validation_suite() {
    std::vector<ValidationCheck> checks;
    const double mass = constants::proton_mass;

    {  // grid arithmetic
        const auto g = make_grid(8.0, 5);
        const bool ok = g.spacing == 4.0 && g.points[2] == 0.0 && g.points[0] == -8.0 &&
                        g.points[4] == 8.0;
        checks.push_back(check("grid arithmetic", ok, "L=8, n=5 -> h=4, nodes exact"));
    }
    {  // state construction invariants
        const auto g = make_grid(8.0, 129);
        const auto rho = double_gaussian(2.5, default_gaussian_width(mass, 0.025), g);
        const double tr = trace(rho);
        const double hd = hermiticity_defect(rho);
        const double pl = left_probability(rho);
        const bool ok = std::abs(tr - 1.0) < 1e-12 && hd == 0.0 && std::abs(pl - 0.5) < 1e-9;
        checks.push_back(check("double-Gaussian state", ok,
                               "trace=" + format_g(tr) + " herm=" + format_g(hd) +
                                   " P_left=" + format_g(pl)));
    }
    {  // well geometry
        const auto spec = make_quartic_double_well(0.005, 2.5, mass);
        const DampingParams d{2.5e-4, 1.0};
        const auto [lo, hi] = well_minima(spec, d);
        const double delta = 1e-5;
        const double grad =
            (v_full(hi + delta, spec, d) - v_full(hi - delta, spec, d)) / (2.0 * delta);
        const bool ok = std::abs(grad) < 1e-10 && std::abs(hi - 6.12372435696) < 1e-6 && lo == -hi;
        checks.push_back(
            check("well minima", ok, "x_min=" + format_g(hi) + " |dV/dx|=" + format_g(grad)));
    }
    {  // undamped limit: V_F == V_R when mu = 0
        const auto spec = make_quartic_double_well(0.025, 2.5, mass);
        bool ok = true;
        for (double x = -6.0; x <= 6.0; x += 0.37) {
            ok = ok && v_full(x, spec, {2.5e-4, 0.0}) == v_renormalized(x, spec);
        }
        checks.push_back(check("undamped potential limit", ok, "V_F(mu=0) == V_R pointwise"));
    }
    {  // short evolution conservation + mu=0 twin identity
        const auto g = make_grid(8.0, 65);
        const auto rho0 = double_gaussian(2.5, default_gaussian_width(mass, 0.025), g);
        const auto spec = make_quartic_double_well(0.025, 2.5, mass);
        const EvolutionParams p{constants::hbar, mass, 2.5e-4, 0.5, constants::kT_room};
        const auto probe = probe_stability(rho0, p, spec);
        const StepperConfig cfg{probe.dt, std::floor(5.0 / probe.dt) * probe.dt, 1000000};
        double drift = 0.0, herm = 0.0;
        const auto final = evolve(rho0, cfg, p, spec, [&](double, const DensityField& f) {
            drift = std::max(drift, std::abs(trace(f) - 1.0));
            herm = std::max(herm, hermiticity_defect(f));
        });
        const bool ok = drift < 1e-8 && herm < 1e-10;
        checks.push_back(check("5 fs conservation", ok,
                               "trace drift=" + format_g(drift) + " herm=" + format_g(herm)));
    }
    {  // free spreading vs the analytic variance
        const auto g = make_grid(8.0, 129);
        const double sigma0 = 0.5;
        const auto rho0 = gaussian_pure({0.0, sigma0}, g);
        const EvolutionParams p{constants::hbar, mass, 0.0, 0.0, constants::kT_room};
        const auto spec = make_free(mass);
        const auto probe = probe_stability(rho0, p, spec);
        const double t_end = std::floor(10.0 / probe.dt) * probe.dt;
        const auto final = evolve(rho0, {probe.dt, t_end, 1000000}, p, spec, {});
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < g.n_points; ++i) {
            const double w = (i == 0 || i == g.n_points - 1) ? 0.5 : 1.0;
            const double rho_d = final.at(i, i).real();
            m1 += w * g.points[i] * rho_d;
            m2 += w * g.points[i] * g.points[i] * rho_d;
        }
        m1 *= g.spacing;
        m2 *= g.spacing;
        const double var = m2 - m1 * m1;
        const double expected =
            sigma0 * sigma0 +
            std::pow(constants::hbar * t_end / (2.0 * mass * sigma0), 2);
        const bool ok = std::abs(var - expected) / expected < 0.02;
        checks.push_back(check("free Gaussian spreading", ok,
                               "var=" + format_g(var) + " expected=" + format_g(expected)));
    }
    return checks;
}

}  // namespace dqbm
