#include "dqbm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dqbm {

namespace {

struct RhsCoefficients {
    double k_kin;    // hbar / (2 M h^2), multiplies i*(stencil)
    double k_drift;  // gamma / (2 h)
    double k_dec;    // 2 M gamma kT / hbar^2
    double inv_hbar;
};

RhsCoefficients coefficients(const SpatialGrid& grid, const EvolutionParams& p) {
    const double h = grid.spacing;
    return {p.hbar / (2.0 * p.mass * h * h), p.gamma / (2.0 * h),
            2.0 * p.mass * p.gamma * p.kT / (p.hbar * p.hbar), 1.0 / p.hbar};
}

// out(i,j) for the interior; boundary entries are left untouched (the
// caller keeps them at exactly zero).
void rhs_interior(const Complex* in, Complex* out, int n, const double* x, const double* v,
                  const RhsCoefficients& c) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 1; i < n - 1; ++i) {
        const Complex* row = in + static_cast<std::size_t>(i) * n;
        const Complex* up = row - n;
        const Complex* down = row + n;
        Complex* o = out + static_cast<std::size_t>(i) * n;
        const double xi = x[i];
        const double vi = v[i];
        for (int j = 1; j < n - 1; ++j) {
            const Complex xp = down[j];  // rho(i+1, j)
            const Complex xm = up[j];    // rho(i-1, j)
            const Complex yp = row[j + 1];
            const Complex ym = row[j - 1];
            const Complex center = row[j];

            const double u = xi - x[j];
            const Complex kin = c.k_kin * (xp + xm - yp - ym);  // -2*center terms cancel
            // (-i/hbar)(V_i - V_j) - k_dec * u^2, applied multiplicatively
            const Complex mul(-c.k_dec * u * u, -(vi - v[j]) * c.inv_hbar);
            const Complex drift = (c.k_drift * u) * (xp - xm - yp + ym);

            o[j] = Complex(-kin.imag(), kin.real()) + mul * center - drift;
        }
    }
}

void zero_boundary(DensityField& f) {
    const int n = f.n();
    for (int j = 0; j < n; ++j) {
        f.at(0, j) = 0.0;
        f.at(n - 1, j) = 0.0;
        f.at(j, 0) = 0.0;
        f.at(j, n - 1) = 0.0;
    }
}

// dst = a + s * b on the interior (boundaries stay zero)
void axpy_interior(DensityField& dst, const DensityField& a, double s, const DensityField& b) {
    const int n = dst.n();
    const Complex* pa = a.data();
    const Complex* pb = b.data();
    Complex* pd = dst.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 1; i < n - 1; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * n;
        for (int j = 1; j < n - 1; ++j) {
            pd[off + j] = pa[off + j] + s * pb[off + j];
        }
    }
}

// Workspace for repeated RK4 steps on one grid.
class Rk4Engine {
public:
    Rk4Engine(const SpatialGrid& grid, const EvolutionParams& p, std::vector<double> v_profile)
        : grid_(grid),
          coefs_(coefficients(grid, p)),
          v_(std::move(v_profile)),
          k_(grid),
          acc_(grid),
          stage_(grid) {
        if (static_cast<int>(v_.size()) != grid.n_points) {
            throw std::invalid_argument("evolution: potential profile does not match grid");
        }
    }

    // One step: next = RK4(state, dt). next and state may not alias.
    void advance(const DensityField& state, DensityField& next, double dt) {
        const double* x = grid_.points.data();
        const int n = grid_.n_points;
        rhs_interior(state.data(), k_.data(), n, x, v_.data(), coefs_);
        axpy_interior(acc_, state, dt / 6.0, k_);
        axpy_interior(stage_, state, dt / 2.0, k_);

        rhs_interior(stage_.data(), k_.data(), n, x, v_.data(), coefs_);
        axpy_interior(acc_, acc_, dt / 3.0, k_);
        axpy_interior(stage_, state, dt / 2.0, k_);

        rhs_interior(stage_.data(), k_.data(), n, x, v_.data(), coefs_);
        axpy_interior(acc_, acc_, dt / 3.0, k_);
        axpy_interior(stage_, state, dt, k_);

        rhs_interior(stage_.data(), k_.data(), n, x, v_.data(), coefs_);
        axpy_interior(next, acc_, dt / 6.0, k_);
    }

    const std::vector<double>& profile() const { return v_; }
    const RhsCoefficients& coefs() const { return coefs_; }

private:
    SpatialGrid grid_;
    RhsCoefficients coefs_;
    std::vector<double> v_;
    DensityField k_, acc_, stage_;
};

struct DiagonalMass {
    double real_part;
    double imag_part;
    bool finite;
};

DiagonalMass diagonal_mass(const DensityField& f) {
    const int n = f.n();
    const double h = f.grid().spacing;
    double re = 0.0, im = 0.0;
    bool finite = true;
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const Complex d = f.at(i, i);
        re += w * d.real();
        im += w * d.imag();
        finite = finite && std::isfinite(d.real()) && std::isfinite(d.imag());
    }
    return {re * h, im * h, finite};
}

bool all_finite(const DensityField& f) {
    const Complex* p = f.data();
    const std::size_t count = f.size();
    for (std::size_t k = 0; k < count; ++k) {
        if (!std::isfinite(p[k].real()) || !std::isfinite(p[k].imag())) return false;
    }
    return true;
}

// Per-term magnitudes at the first non-finite location, for the abort
// diagnostic.
std::string locate_failure(const DensityField& next, const DensityField& prev,
                           const RhsCoefficients& c, const std::vector<double>& v) {
    const int n = next.n();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Complex z = next.at(i, j);
            if (std::isfinite(z.real()) && std::isfinite(z.imag())) continue;
            std::ostringstream msg;
            const auto& x = prev.grid().points;
            msg << "non-finite value at (i=" << i << ", j=" << j << "), x=" << x[i]
                << " A, y=" << x[j] << " A";
            if (i > 0 && i < n - 1 && j > 0 && j < n - 1) {
                const double u = x[i] - x[j];
                const Complex kin =
                    c.k_kin * (prev.at(i + 1, j) + prev.at(i - 1, j) - prev.at(i, j + 1) -
                               prev.at(i, j - 1));
                const Complex pot = Complex(0.0, -(v[i] - v[j]) * c.inv_hbar) * prev.at(i, j);
                const Complex drift = (c.k_drift * u) * (prev.at(i + 1, j) - prev.at(i - 1, j) -
                                                         prev.at(i, j + 1) + prev.at(i, j - 1));
                const Complex dec = Complex(-c.k_dec * u * u, 0.0) * prev.at(i, j);
                msg << "; |kinetic|=" << std::abs(kin) << " |potential|=" << std::abs(pot)
                    << " |dissipation|=" << std::abs(drift) << " |decoherence|=" << std::abs(dec);
            }
            return msg.str();
        }
    }
    return "non-finite value (location not recovered)";
}

}  // namespace

void me_rhs_into(const DensityField& in, DensityField& out, const EvolutionParams& p,
                 const std::vector<double>& v_profile) {
    if (!in.grid().same_layout(out.grid())) {
        throw std::invalid_argument("me_rhs: field dimensions do not match");
    }
    zero_boundary(out);
    rhs_interior(in.data(), out.data(), in.n(), in.grid().points.data(), v_profile.data(),
                 coefficients(in.grid(), p));
    if (!all_finite(out)) {
        throw NumericalAbort("me_rhs: " + locate_failure(out, in, coefficients(in.grid(), p),
                                                         v_profile));
    }
}

DensityField me_rhs(const DensityField& field, const EvolutionParams& p,
                    const PotentialSpec& potential) {
    DensityField out(field.grid());
    me_rhs_into(field, out, p, potential_profile(field.grid(), potential, p.damping()));
    return out;
}

DensityField step(const DensityField& field, double dt, const EvolutionParams& p,
                  const PotentialSpec& potential) {
    Rk4Engine engine(field.grid(), p,
                     potential_profile(field.grid(), potential, p.damping()));
    DensityField next(field.grid());
    engine.advance(field, next, dt);

    const auto before = diagonal_mass(field);
    const auto after = diagonal_mass(next);
    if (!after.finite || !all_finite(next)) {
        throw NumericalAbort("step: " + locate_failure(next, field, engine.coefs(),
                                                       engine.profile()));
    }
    if (std::abs(after.real_part - before.real_part) > 1e-4) {
        throw NumericalAbort("step: trace drift above 1e-4 in one step, reduce dt");
    }
    return next;
}

DensityField evolve(const DensityField& initial, const StepperConfig& cfg,
                    const EvolutionParams& p, const PotentialSpec& potential,
                    const Observer& observer) {
    if (cfg.dt < 0.0 || cfg.t_end < 0.0 || cfg.record_every < 1) {
        throw std::invalid_argument("evolve: bad stepper configuration");
    }
    long n_steps = 0;
    if (cfg.t_end > 0.0) {
        if (cfg.dt == 0.0) throw std::invalid_argument("evolve: dt = 0 with t_end > 0");
        n_steps = std::lround(cfg.t_end / cfg.dt);
        if (std::abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * std::max(1.0, cfg.t_end)) {
            throw std::invalid_argument("evolve: t_end must be an integer multiple of dt");
        }
    }

    if (n_steps == 0) {
        if (observer) observer(0.0, initial);
        return initial;
    }

    Rk4Engine engine(initial.grid(), p,
                     potential_profile(initial.grid(), potential, p.damping()));
    DensityField curr = initial;
    zero_boundary(curr);  // Dirichlet convention on the working copy
    DensityField next(initial.grid());

    if (observer) observer(0.0, curr);
    double prev_trace = diagonal_mass(curr).real_part;

    for (long s = 1; s <= n_steps; ++s) {
        engine.advance(curr, next, cfg.dt);

        const auto mass = diagonal_mass(next);
        if (!mass.finite || !all_finite(next)) {
            std::ostringstream msg;
            msg << "evolve: step " << s << " (t=" << s * cfg.dt << " fs): "
                << locate_failure(next, curr, engine.coefs(), engine.profile());
            throw NumericalAbort(msg.str());
        }
        if (std::abs(mass.real_part - prev_trace) > 1e-4) {
            std::ostringstream msg;
            msg << "evolve: trace drift " << std::abs(mass.real_part - prev_trace) << " at step "
                << s << " exceeds 1e-4, reduce dt";
            throw NumericalAbort(msg.str());
        }
        prev_trace = mass.real_part;
        std::swap(curr, next);

        if (observer && (s % cfg.record_every == 0 || s == n_steps)) {
            observer(s * cfg.dt, curr);
        }
    }
    return curr;
}

double stable_dt_estimate(const SpatialGrid& grid, const EvolutionParams& p,
                          const std::vector<double>& v_profile) {
    const double h = grid.spacing;
    const auto [vmin, vmax] = std::minmax_element(v_profile.begin(), v_profile.end());
    const double span = 2.0 * grid.half_width;

    const double lam_kinetic = 2.0 * p.hbar / (p.mass * h * h);
    const double lam_potential = (*vmax - *vmin) / p.hbar;
    const double lam_drift = p.gamma * span / h;
    const double lam_imag = lam_kinetic + lam_potential + lam_drift;
    const double lam_real = (2.0 * p.mass * p.gamma * p.kT / (p.hbar * p.hbar)) * span * span;

    constexpr double rk4_imag_limit = 2.0 * 1.41421356237309515;  // 2*sqrt(2)
    constexpr double rk4_real_limit = 2.785;
    constexpr double safety = 0.8;

    double dt = safety * rk4_imag_limit / lam_imag;
    if (lam_real > 0.0) dt = std::min(dt, safety * rk4_real_limit / lam_real);
    return dt;
}

StabilityProbe probe_stability(const DensityField& initial, const EvolutionParams& p,
                               const PotentialSpec& potential) {
    const auto& grid = initial.grid();
    const auto profile = potential_profile(grid, potential, p.damping());
    const double h = grid.spacing;
    const double diffusive_guess = 0.1 * p.mass * h * h / p.hbar;
    double dt = std::min(stable_dt_estimate(grid, p, profile), diffusive_guess);

    constexpr int probe_steps = 100;
    constexpr int max_halvings = 12;
    for (int halvings = 0;; ++halvings) {
        Rk4Engine engine(grid, p, profile);
        DensityField curr = initial;
        zero_boundary(curr);
        DensityField next(grid);

        const double trace0 = diagonal_mass(curr).real_part;
        double max_drift = 0.0;
        bool ok = true;
        for (int s = 0; s < probe_steps && ok; ++s) {
            engine.advance(curr, next, dt);
            const auto mass = diagonal_mass(next);
            ok = mass.finite && std::abs(mass.real_part - trace0) < 1e-8 &&
                 std::abs(mass.imag_part) < 1e-10;
            max_drift = std::max(max_drift, std::abs(mass.real_part - trace0));
            std::swap(curr, next);
        }
        ok = ok && all_finite(curr);
        if (ok) {
            return {dt, dt * p.hbar / (p.mass * h * h), max_drift, halvings};
        }
        if (halvings == max_halvings) {
            throw NumericalAbort("stability probe failed to find a stable dt");
        }
        dt *= 0.5;
    }
}

double boundary_ring_max(const DensityField& field) {
    const int n = field.n();
    double worst = 0.0;
    for (int k = 1; k < n - 1; ++k) {
        worst = std::max({worst, std::abs(field.at(1, k)), std::abs(field.at(n - 2, k)),
                          std::abs(field.at(k, 1)), std::abs(field.at(k, n - 2))});
    }
    return worst;
}

}  // namespace dqbm
