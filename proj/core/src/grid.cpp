#include "dqbm/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dqbm {

SpatialGrid make_grid(double half_width, int n_points) {
    if (half_width <= 0.0) {
        throw std::invalid_argument("make_grid: half_width must be positive");
    }
    if (n_points % 2 == 0) {
        throw std::invalid_argument("make_grid: even point count (zero must be a node)");
    }
    if (n_points < 3) {
        throw std::invalid_argument("make_grid: need at least 3 points");
    }

    SpatialGrid g;
    g.half_width = half_width;
    g.n_points = n_points;
    g.spacing = 2.0 * half_width / (n_points - 1);
    g.points.resize(n_points);
    for (int k = 0; k < n_points; ++k) {
        g.points[k] = -half_width + k * g.spacing;
    }
    g.points[n_points / 2] = 0.0;  // exact center node
    g.points[n_points - 1] = half_width;
    return g;
}

double kahan_sum(const double* values, std::size_t count) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double y = values[k] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

namespace {

// Kahan accumulator for streaming use.
struct Accum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

double trapezoid_weight(int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; }

}  // namespace

double trace(const DensityField& field) {
    const int n = field.n();
    const double h = field.grid().spacing;
    Accum re, im;
    for (int i = 0; i < n; ++i) {
        const double w = trapezoid_weight(i, n);
        re.add(w * field.at(i, i).real());
        im.add(w * field.at(i, i).imag());
    }
    const double imag_mass = std::abs(im.sum * h);
    if (imag_mass > 1e-10) {
        throw std::runtime_error("trace: corrupted state, imaginary diagonal mass " +
                                 std::to_string(imag_mass));
    }
    return re.sum * h;
}

double hermiticity_defect(const DensityField& field) {
    const int n = field.n();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double d = std::abs(field.at(i, j) - std::conj(field.at(j, i)));
            if (d > worst) worst = d;
        }
    }
    return worst;
}

namespace {

// Axis weight for a half-line selection: trapezoid weight times a half
// weight on the x = 0 node, zero outside the selected half.
double half_axis_weight(int k, int n, bool positive) {
    const int mid = n / 2;
    if (positive ? (k < mid) : (k > mid)) return 0.0;
    double w = trapezoid_weight(k, n);
    if (k == mid) w *= 0.5;
    return w;
}

}  // namespace

double quadrant_integral(const DensityField& field, Quadrant region) {
    const int n = field.n();
    const int mid = n / 2;
    const double h = field.grid().spacing;
    const bool x_pos = (region == Quadrant::LowerRight || region == Quadrant::DiagonalRight);
    const bool y_pos = (region == Quadrant::UpperLeft || region == Quadrant::DiagonalRight);
    const bool off_diagonal =
        (region == Quadrant::LowerRight || region == Quadrant::UpperLeft);

    Accum total;
    for (int i = 0; i < n; ++i) {
        const double wx = half_axis_weight(i, n, x_pos);
        if (wx == 0.0) continue;
        Accum row;
        for (int j = 0; j < n; ++j) {
            double wy = half_axis_weight(j, n, y_pos);
            if (wy == 0.0) continue;
            // The origin sits on the diagonal: it never counts as coherence,
            // so the off-diagonal quadrants drop it and the diagonal strips
            // absorb its full trapezoid weight (half each), keeping the
            // four-region decomposition exactly additive.
            if (i == mid && j == mid) {
                if (off_diagonal) continue;
                wy *= 2.0;
            }
            row.add(wy * std::abs(field.at(i, j)));
        }
        total.add(wx * row.sum);
    }
    return total.sum * h * h;
}

double abs_integral(const DensityField& field) {
    const int n = field.n();
    const double h = field.grid().spacing;
    Accum total;
    for (int i = 0; i < n; ++i) {
        Accum row;
        for (int j = 0; j < n; ++j) {
            row.add(trapezoid_weight(j, n) * std::abs(field.at(i, j)));
        }
        total.add(trapezoid_weight(i, n) * row.sum);
    }
    return total.sum * h * h;
}

DensityField reflected(const DensityField& field) {
    const int n = field.n();
    DensityField out(field.grid());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out.at(i, j) = field.at(n - 1 - i, n - 1 - j);
        }
    }
    return out;
}

}  // namespace dqbm
