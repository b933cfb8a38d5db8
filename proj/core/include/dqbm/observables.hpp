#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqbm/grid.hpp"

namespace dqbm {

// Time-stamped scalar record emitted during evolution.
struct ObservableSeries {
    std::vector<double> times;   // fs, strictly increasing
    std::vector<double> values;  // same length as times
    std::string label;           // e.g. "C_R@0.5"
    std::uint64_t params_fingerprint = 0;
    bool truncated = false;  // relative_coherence hit the ratio floor

    std::size_t size() const { return times.size(); }
    void push(double t, double v) {
        times.push_back(t);
        values.push_back(v);
    }
};

// l1-norm of coherence: integral of |rho| over the x > 0, y < 0 quadrant
// restricted to |x|, |y| <= L_int (trapezoid, half-weight on the axes).
double l1_coherence(const DensityField& field, double L_int);
double l1_coherence(const DensityField& field);  // L_int = grid half-width

// Pointwise ratio damped/undamped. Requires identical time stamps. Once the
// undamped series falls below the 1e-8 floor, the ratio is truncated there
// and the result flagged.
ObservableSeries relative_coherence(const ObservableSeries& damped,
                                    const ObservableSeries& undamped);

// P = integral of rho(x,x) over [-L, 0], trapezoid with half-weight at 0.
double left_probability(const DensityField& field);
double right_probability(const DensityField& field);

// tr(rho^2) = h^2 sum |rho_ij|^2 with trapezoid edge weights.
double purity(const DensityField& field);

// Most negative eigenvalue of the field subsampled to at most max_dim
// points per axis (the equation is not completely positive; transient
// negative eigenvalues are monitored, not corrected).
double min_eigenvalue_coarse(const DensityField& field, int max_dim = 65);

// FNV-1a over a canonical byte serialization; tags series with the
// parameter set that generated them.
std::uint64_t fingerprint(const std::vector<double>& params);

}  // namespace dqbm
