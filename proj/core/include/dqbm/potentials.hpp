#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "dqbm/grid.hpp"

namespace dqbm {

// Relaxation rate and environment damping coefficient, both 1/fs.
struct DampingParams {
    double gamma = 0.0;
    double mu = 0.0;
};

// V_R(x) = (M w_R^2 / 2 x0^2) (x - x0)^2 (x + x0)^2
struct QuarticDoubleWell {
    double omega_r;  // 1/fs
    double x0;       // Angstrom
};

// V(x) = slope_factor * reference_gradient * x, applied over the full grid.
// reference_gradient is |dV_F/dx| at x = 2.5 A for the double-well benchmark
// parameter set; see make_linear_ramp.
struct LinearRamp {
    double slope_factor;
    double reference_gradient;  // eV/Angstrom
};

// No system potential. The damping correction V_D still applies when
// gamma*mu > 0; set either to zero for a truly flat potential.
struct FreeParticle {};

struct PotentialSpec {
    std::variant<QuarticDoubleWell, LinearRamp, FreeParticle> shape;
    double mass;  // eV fs^2 / Angstrom^2

    bool is_quartic() const { return std::holds_alternative<QuarticDoubleWell>(shape); }
    bool is_linear() const { return std::holds_alternative<LinearRamp>(shape); }
};

PotentialSpec make_quartic_double_well(double omega_r, double x0, double mass);
PotentialSpec make_free(double mass);

// Builds the linear control potential with the stored reference gradient
// evaluated once from the benchmark double-well set (omega_r = 0.025/fs,
// x0 = 2.5 A, gamma = 2.5e-4/fs, mu = 1/fs) at x = 2.5 A.
PotentialSpec make_linear_ramp(double slope_factor, double mass);
double benchmark_reference_gradient(double mass);

double v_renormalized(double x, const PotentialSpec& spec);
double v_damping(double x, double mass, const DampingParams& d);
double v_full(double x, const PotentialSpec& spec, const DampingParams& d);

// Stationary minima of V_F for the quartic variant:
// +- x0 sqrt(1 + gamma mu / (2 w_R^2)).
std::pair<double, double> well_minima(const PotentialSpec& spec, const DampingParams& d);

// V_F sampled on every grid node; computed once per run.
std::vector<double> potential_profile(const SpatialGrid& grid, const PotentialSpec& spec,
                                      const DampingParams& d);

}  // namespace dqbm
