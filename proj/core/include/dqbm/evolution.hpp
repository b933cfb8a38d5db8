#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqbm/grid.hpp"
#include "dqbm/potentials.hpp"

namespace dqbm {

// Thrown when a run must stop for numerical reasons (NaN/Inf in the state,
// trace drift from a too-large step). CLI maps this to exit code 3.
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvolutionParams {
    double hbar;   // eV fs
    double mass;   // eV fs^2 / A^2
    double gamma;  // 1/fs
    double mu;     // 1/fs
    double kT;     // eV

    DampingParams damping() const { return {gamma, mu}; }
};

// Four-stage explicit scheme of order 4, fixed step.
struct StepperConfig {
    double dt;             // fs
    double t_end;          // fs
    int record_every = 1;  // observer cadence in steps
};

// d rho/dt of the damped master equation with the full potential V_F:
//   (i hbar/2M)(d_xx - d_yy) rho - (i/hbar)(V_F(x) - V_F(y)) rho
//   - gamma (x-y)(d_x - d_y) rho - (2 M gamma kT / hbar^2)(x-y)^2 rho
// 3-point central stencils for second derivatives, 2-point central for
// first; rho == 0 outside the boundary (Dirichlet).
DensityField me_rhs(const DensityField& field, const EvolutionParams& p,
                    const PotentialSpec& potential);

// In-place core used by the stepper; v_profile is V_F on the grid nodes.
void me_rhs_into(const DensityField& in, DensityField& out, const EvolutionParams& p,
                 const std::vector<double>& v_profile);

// One RK4 update. Boundary rows/columns stay exactly zero.
DensityField step(const DensityField& field, double dt, const EvolutionParams& p,
                  const PotentialSpec& potential);

using Observer = std::function<void(double t, const DensityField& field)>;

// Steps from t = 0 to cfg.t_end, invoking the observer at t = 0 and then
// every record_every steps (and at the final step). Deterministic:
// identical inputs give bit-identical outputs regardless of thread count.
DensityField evolve(const DensityField& initial, const StepperConfig& cfg,
                    const EvolutionParams& p, const PotentialSpec& potential,
                    const Observer& observer = {});

// Linear stability estimate for the explicit scheme: bounds the spectral
// radius contributions of the kinetic stencil, the potential phase, the
// (x-y) drift and the decoherence damping, and applies the RK4 stability
// interval with a safety factor.
double stable_dt_estimate(const SpatialGrid& grid, const EvolutionParams& p,
                          const std::vector<double>& v_profile);

struct StabilityProbe {
    double dt;         // validated step
    double c_stab;     // dt * hbar / (M h^2), recorded in manifests
    double max_drift;  // |trace - 1| drift over the probe
    int halvings;      // times dt was halved before the probe passed
};

// 100-step probe run from the given initial state: starts from the spectral
// estimate (capped at 0.1 M h^2 / hbar), halves dt until the probe keeps the
// trace drift in tolerance, and reports the validated constant.
StabilityProbe probe_stability(const DensityField& initial, const EvolutionParams& p,
                               const PotentialSpec& potential);

// Largest |rho| on the outermost interior ring; the Dirichlet boundary
// assumption is sound while this stays < 1e-8.
double boundary_ring_max(const DensityField& field);

}  // namespace dqbm
