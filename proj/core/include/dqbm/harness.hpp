#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dqbm/evolution.hpp"
#include "dqbm/observables.hpp"
#include "dqbm/potentials.hpp"

namespace dqbm {

enum class PotentialKind { Quartic, Linear, Free };
enum class InitialStateKind {
    DoubleGaussianAtWells,   // peaks at the V_R wells (+-x0)
    SingleGaussianRightWell  // centered at the right minimum of V_F
};

// One catalog entry: fixed parameters plus one swept parameter.
struct Scenario {
    std::string name;
    std::string summary;
    PotentialKind potential = PotentialKind::Quartic;
    InitialStateKind initial = InitialStateKind::DoubleGaussianAtWells;
    double omega_r = 0.0;  // quartic frequency, 1/fs
    double x0 = 2.5;       // well half-separation, Angstrom
    double gamma = 0.0;    // fixed relaxation rate unless swept
    double mu = 0.0;       // fixed damping coefficient unless swept
    std::string sweep_key;              // "mu" | "gamma" | "g" | "a"
    std::vector<double> sweep_values;   // catalog defaults, config-exposed
    double gamma0 = 0.0, mu0 = 0.0;     // rescaling anchors (sweep_key == "a")
    double half_width = 8.0;
    int n_points = 257;
    double t_end = 50.0;
    double record_interval = 0.5;  // fs
    std::string observable;        // "C_R" | "C_g" | "P" | "C"
};

const std::vector<Scenario>& scenario_catalog();
const Scenario& find_scenario(const std::string& name);

// Typed, validated key=value overrides. Unknown keys and out-of-domain
// values are rejected at parse time.
struct ConfigOverrides {
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> lists;  // "<sweep>-list" keys

    bool empty() const { return scalars.empty() && lists.empty(); }
};

// key=value file, one pair per line, '#' comments.
ConfigOverrides parse_config(const std::filesystem::path& path);
// One "key=value" item (CLI --set); merges into dst, overriding the file.
void apply_override(ConfigOverrides& dst, const std::string& item);

struct RunDiagnostics {
    double dt = 0.0;
    double c_stab = 0.0;           // measured stability probe result
    double max_trace_drift = 0.0;  // max |trace - 1| over recorded times
    double max_herm_defect = 0.0;  // relative to max |rho|
    double max_boundary_flux = 0.0;
    double min_eigenvalue = 0.0;   // most negative coarse eigenvalue seen
};

struct RunManifest {
    std::string scenario;
    std::string status;  // "running" -> "ok" | "failed"
    std::string error;
    std::map<std::string, double> parameters;  // resolved physical parameters
    std::vector<double> sweep_values;
    std::string sweep_key;
    double half_width = 0.0;
    int n_points = 0;
    double t_end = 0.0, record_interval = 0.0;
    std::map<std::string, double> unit_constants;
    std::map<std::string, RunDiagnostics> diagnostics;  // per run label
    std::vector<std::string> output_files;
    std::vector<std::string> notes;
    std::string started_at, finished_at;  // ISO-8601 UTC
    std::string code_version;

    std::string to_json() const;
};

struct RunOptions {
    std::filesystem::path out_dir;  // empty: no files written
    int workers = 1;                // concurrent evolutions per scenario
};

struct ScenarioResult {
    std::vector<ObservableSeries> series;  // CSV columns, time-aligned
    RunManifest manifest;
    std::filesystem::path csv_path;  // empty when out_dir was empty
};

// Executes one evolution per sweep value plus the required baselines
// (mu = 0 twins for relative-coherence scenarios, a gamma = 0 von Neumann
// twin for well-transfer), all with identical grid and stepper settings.
ScenarioResult run_scenario(const std::string& name, const ConfigOverrides& overrides = {},
                            const RunOptions& options = {});

// One file per scenario: header "t_fs,<label>,...", rows in time order,
// 12 significant digits, '\n' newlines, UTF-8.
void write_csv(const std::vector<ObservableSeries>& series, const std::filesystem::path& path);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Reduced-resolution invariant suite backing `dampedqbm validate`.
std::vector<ValidationCheck> run_validation_suite();

}  // namespace dqbm
