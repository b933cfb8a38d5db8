#include "dqbm/observables.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dqbm {

namespace {

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

double half_line_diagonal(const DensityField& field, bool positive) {
    const int n = field.n();
    const int mid = n / 2;
    const double h = field.grid().spacing;
    Accum re, im;
    const int lo = positive ? mid : 0;
    const int hi = positive ? n - 1 : mid;
    for (int i = lo; i <= hi; ++i) {
        double w = trapezoid_weight(i, n);
        if (i == mid) w *= 0.5;
        re.add(w * field.at(i, i).real());
        im.add(w * field.at(i, i).imag());
    }
    if (std::abs(im.sum * h) > 1e-10) {
        throw std::runtime_error("left_probability: imaginary diagonal mass above tolerance");
    }
    return re.sum * h;
}

}  // namespace

double l1_coherence(const DensityField& field, double L_int) {
    const auto& grid = field.grid();
    if (L_int > grid.half_width * (1.0 + 1e-12)) {
        throw std::invalid_argument("l1_coherence: L_int exceeds grid half-width");
    }
    const int n = field.n();
    const int mid = n / 2;
    const double h = grid.spacing;

    Accum total;
    for (int i = mid; i < n; ++i) {  // x >= 0
        if (grid.points[i] > L_int * (1.0 + 1e-12)) break;
        double wx = trapezoid_weight(i, n);
        if (i == mid) wx *= 0.5;
        Accum row;
        for (int j = 0; j <= mid; ++j) {  // y <= 0
            if (-grid.points[j] > L_int * (1.0 + 1e-12)) continue;
            if (i == mid && j == mid) continue;  // origin is diagonal population
            double wy = trapezoid_weight(j, n);
            if (j == mid) wy *= 0.5;
            row.add(wy * std::abs(field.at(i, j)));
        }
        total.add(wx * row.sum);
    }
    return total.sum * h * h;
}

double l1_coherence(const DensityField& field) {
    return l1_coherence(field, field.grid().half_width);
}

ObservableSeries relative_coherence(const ObservableSeries& damped,
                                    const ObservableSeries& undamped) {
    if (damped.times.size() != undamped.times.size()) {
        throw std::invalid_argument("relative_coherence: mismatched time stamps");
    }
    constexpr double floor = 1e-8;
    ObservableSeries out;
    out.label = damped.label;
    out.params_fingerprint = damped.params_fingerprint;
    for (std::size_t k = 0; k < damped.times.size(); ++k) {
        if (damped.times[k] != undamped.times[k]) {
            throw std::invalid_argument("relative_coherence: mismatched time stamps");
        }
        if (undamped.values[k] < floor) {
            out.truncated = true;  // ratio of numerical noise is meaningless
            break;
        }
        out.push(damped.times[k], damped.values[k] / undamped.values[k]);
    }
    return out;
}

double left_probability(const DensityField& field) { return half_line_diagonal(field, false); }
double right_probability(const DensityField& field) { return half_line_diagonal(field, true); }

double purity(const DensityField& field) {
    const int n = field.n();
    const double h = field.grid().spacing;
    Accum total;
    for (int i = 0; i < n; ++i) {
        Accum row;
        for (int j = 0; j < n; ++j) {
            row.add(trapezoid_weight(j, n) * std::norm(field.at(i, j)));
        }
        total.add(trapezoid_weight(i, n) * row.sum);
    }
    return total.sum * h * h;
}

double min_eigenvalue_coarse(const DensityField& field, int max_dim) {
    const int n = field.n();
    int stride = 1;
    while ((n - 1) / stride + 1 > max_dim && stride < n) stride *= 2;
    const int m = (n - 1) / stride + 1;

    Eigen::MatrixXcd sampled(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            sampled(a, b) = field.at(a * stride, b * stride);
        }
    }
    // rho * (coarse spacing) approximates the dimensionless density operator
    sampled *= field.grid().spacing * stride;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sampled,
                                                           Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

std::uint64_t fingerprint(const std::vector<double>& params) {
    std::uint64_t hash = 1469598103934665603ULL;  // FNV offset basis
    for (double v : params) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            hash ^= (bits >> (8 * b)) & 0xffULL;
            hash *= 1099511628211ULL;  // FNV prime
        }
    }
    return hash;
}

}  // namespace dqbm
