#include "dqbm/states.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqbm/constants.hpp"

namespace dqbm {

namespace {

void check_support(double center, double width, const SpatialGrid& grid) {
    if (width <= 0.0) throw std::invalid_argument("gaussian: width must be positive");
    if (std::abs(center) + 3.0 * width >= grid.half_width) {
        throw std::invalid_argument("gaussian: state leaks past boundary (|x_c| + 3 sigma >= L)");
    }
}

std::vector<double> sample_phi(double center, double width, const SpatialGrid& grid) {
    const double norm = std::pow(2.0 * std::numbers::pi * width * width, -0.25);
    std::vector<double> phi(grid.points.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double d = grid.points[k] - center;
        phi[k] = norm * std::exp(-d * d / (4.0 * width * width));
    }
    return phi;
}

DensityField outer_product_renormalized(const std::vector<double>& psi, const SpatialGrid& grid) {
    DensityField rho(grid);
    const int n = grid.n_points;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            rho.at(i, j) = psi[i] * psi[j];
        }
    }
    const double tr = trace(rho);
    if (tr <= 0.0) throw std::runtime_error("state construction: nonpositive trace");
    const double inv = 1.0 / tr;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            rho.at(i, j) *= inv;
        }
    }
    return rho;
}

}  // namespace

DensityField gaussian_pure(const GaussianSpec& g, const SpatialGrid& grid) {
    check_support(g.center, g.width, grid);
    return outer_product_renormalized(sample_phi(g.center, g.width, grid), grid);
}

DensityField double_gaussian(double center, double width, const SpatialGrid& grid) {
    if (center <= 0.0) throw std::invalid_argument("double_gaussian: center must be positive");
    check_support(center, width, grid);

    const auto left = sample_phi(-center, width, grid);
    const auto right = sample_phi(center, width, grid);
    // Exact normalization including the peak overlap integral
    const double overlap = std::exp(-center * center / (2.0 * width * width));
    const double norm = 1.0 / std::sqrt(2.0 * (1.0 + overlap));
    std::vector<double> psi(left.size());
    for (std::size_t k = 0; k < psi.size(); ++k) {
        psi[k] = norm * (left[k] + right[k]);
    }
    return outer_product_renormalized(psi, grid);
}

double default_gaussian_width(double mass, double omega_r) {
    const double omega_loc = 2.0 * omega_r;  // V_R''(+-x0) = 4 M w_R^2
    return std::sqrt(constants::hbar / (mass * omega_loc));
}

}  // namespace dqbm
