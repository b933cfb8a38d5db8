#pragma once

#include "dqbm/grid.hpp"

namespace dqbm {

struct GaussianSpec {
    double center;  // x_c, Angstrom
    double width;   // sigma, Angstrom (position standard deviation)
};

// rho(x,y) = phi(x) phi*(y) with phi(x) = (2 pi s^2)^{-1/4} exp(-(x-xc)^2/4s^2),
// renormalized on the grid so the trapezoid trace is exactly 1.
// Rejects states whose 3-sigma support leaks past the boundary.
DensityField gaussian_pure(const GaussianSpec& g, const SpatialGrid& grid);

// psi = N [phi(-xc) + phi(+xc)], N^2 = 1 / (2 (1 + exp(-xc^2/2s^2))),
// rho = psi psi*, grid-renormalized to unit trace.
DensityField double_gaussian(double center, double width, const SpatialGrid& grid);

// Ground-state width of the local harmonic approximation of a V_R well
// (V_R'' at +-x0 equals 4 M w_R^2, i.e. a well frequency of 2 w_R).
double default_gaussian_width(double mass, double omega_r);

}  // namespace dqbm
