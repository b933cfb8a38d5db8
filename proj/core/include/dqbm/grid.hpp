#pragma once

#include <complex>
#include <vector>

namespace dqbm {

using Complex = std::complex<double>;

// Symmetric 1D discretization of position, shared by both axes of the
// (x, y) density-matrix plane. n_points is odd so that x = 0 is a node.
struct SpatialGrid {
    double half_width = 0.0;        // L, Angstrom
    int n_points = 0;               // odd, >= 33 for production use
    double spacing = 0.0;           // h = 2L/(n-1), Angstrom
    std::vector<double> points;     // -L + k*h, strictly increasing

    bool same_layout(const SpatialGrid& other) const {
        return n_points == other.n_points && half_width == other.half_width;
    }
};

SpatialGrid make_grid(double half_width, int n_points);

// rho(x_i, y_j) sampled on the grid, row-major, units 1/Angstrom.
// Value type: copying a field copies its grid, so fields can be handed
// between threads freely.
class DensityField {
public:
    DensityField() = default;
    explicit DensityField(SpatialGrid grid)
        : grid_(std::move(grid)),
          values_(static_cast<std::size_t>(grid_.n_points) * grid_.n_points) {}

    int n() const { return grid_.n_points; }
    const SpatialGrid& grid() const { return grid_; }

    Complex& at(int i, int j) { return values_[static_cast<std::size_t>(i) * grid_.n_points + j]; }
    const Complex& at(int i, int j) const {
        return values_[static_cast<std::size_t>(i) * grid_.n_points + j];
    }

    Complex* data() { return values_.data(); }
    const Complex* data() const { return values_.data(); }
    std::size_t size() const { return values_.size(); }

private:
    SpatialGrid grid_;
    std::vector<Complex> values_;
};

// Region selectors for quadrant_integral. The axes x = 0 and y = 0 carry
// half trapezoid weight, so the four regions tile the plane additively.
enum class Quadrant {
    UpperLeft,      // x < 0, y > 0  (off-diagonal peak)
    LowerRight,     // x > 0, y < 0  (off-diagonal peak)
    DiagonalLeft,   // x < 0, y < 0  strip containing the left diagonal peak
    DiagonalRight,  // x > 0, y > 0
};

// Trapezoid quadrature of rho(x, x) over [-L, L]. Im part must stay below
// tolerance; a larger imaginary diagonal mass means the state is corrupted.
double trace(const DensityField& field);

// max_ij |rho(i,j) - conj(rho(j,i))|
double hermiticity_defect(const DensityField& field);

// 2D trapezoid quadrature of |rho| over one region.
double quadrant_integral(const DensityField& field, Quadrant region);

// Full-plane 2D trapezoid quadrature of |rho|.
double abs_integral(const DensityField& field);

// (x, y) -> (-x, -y)
DensityField reflected(const DensityField& field);

// Compensated (Kahan) summation; quadratures use it so that results are
// insensitive to traversal order.
double kahan_sum(const double* values, std::size_t count);

}  // namespace dqbm
