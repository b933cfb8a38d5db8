#include <doctest.h>

#include <cmath>

#include "dqbm/constants.hpp"
#include "dqbm/evolution.hpp"
#include "dqbm/observables.hpp"
#include "dqbm/states.hpp"
#include "oracles.hpp"

using namespace dqbm;

namespace {

const double M = constants::proton_mass;

EvolutionParams params(double gamma, double mu, double kT = constants::kT_room) {
    return {constants::hbar, M, gamma, mu, kT};
}

double max_abs(const DensityField& f) {
    double worst = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) worst = std::max(worst, std::abs(f.data()[k]));
    return worst;
}

double max_pointwise_diff(const DensityField& a, const DensityField& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
    }
    return worst;
}

}  // namespace

TEST_CASE("rhs preserves Hermiticity") {
    const auto g = make_grid(8.0, 129);
    const auto rho = double_gaussian(2.5, 0.35, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto out = me_rhs(rho, params(2.5e-4, 1.0), spec);
    CHECK(hermiticity_defect(out) < 1e-12 * max_abs(out));
}

TEST_CASE("rhs diagonal carries no net probability flux") {
    const auto g = make_grid(8.0, 129);
    const double h = g.spacing;
    const auto rho = double_gaussian(2.5, 0.35, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto out = me_rhs(rho, params(2.5e-4, 1.0), spec);

    double sum_re = 0.0, sum_im = 0.0;
    for (int i = 0; i < g.n_points; ++i) {
        const double w = (i == 0 || i == g.n_points - 1) ? 0.5 : 1.0;
        sum_re += w * out.at(i, i).real();
        sum_im += w * out.at(i, i).imag();
    }
    CHECK(std::abs(sum_re * h) < 1e-10);
    CHECK(std::abs(sum_im * h) < 1e-10);
}

TEST_CASE("mu = 0 rhs equals the reference Caldeira-Leggett implementation") {
    const auto g = make_grid(8.0, 97);
    const auto rho = double_gaussian(2.5, 0.4, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto p = params(2.5e-4, 0.0);

    const auto ours = me_rhs(rho, p, spec);
    oracle::ReferenceClEvolver ref(g, potential_profile(g, spec, p.damping()), p.hbar, p.mass,
                                   p.gamma, p.kT);
    const auto theirs = ref.rhs(rho);
    CHECK(max_pointwise_diff(ours, theirs) < 1e-14 * std::max(1.0, max_abs(ours)));
}

TEST_CASE("free Gaussian spreading follows the analytic variance") {
    const auto g = make_grid(8.0, 129);
    const double sigma0 = default_gaussian_width(M, 0.025);
    const auto rho0 = gaussian_pure({0.0, sigma0}, g);
    const auto spec = make_free(M);
    const auto p = params(0.0, 0.0);

    const auto probe = probe_stability(rho0, p, spec);
    const long steps = std::lround(std::ceil(20.0 / probe.dt));
    const double dt = 20.0 / steps;
    const auto final = evolve(rho0, {dt, 20.0, 1 << 30}, p, spec, {});

    const double expected =
        sigma0 * sigma0 + std::pow(constants::hbar * 20.0 / (2.0 * M * sigma0), 2);
    CHECK(oracle::diagonal_variance(final) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("single step") {
    const auto g = make_grid(8.0, 65);
    const auto rho = double_gaussian(2.5, 0.5, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto p = params(2.5e-4, 1.0);

    SUBCASE("dt = 0 is the identity") {
        const auto next = step(rho, 0.0, p, spec);
        for (int i = 1; i < g.n_points - 1; ++i) {
            for (int j = 1; j < g.n_points - 1; ++j) {
                CHECK(next.at(i, j) == rho.at(i, j));
            }
        }
    }

    SUBCASE("trace is conserved through one step") {
        const auto probe = probe_stability(rho, p, spec);
        const auto next = step(rho, probe.dt, p, spec);
        CHECK(trace(next) == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("boundary rows and columns stay exactly zero") {
        const auto next = step(rho, 0.01, p, spec);
        for (int k = 0; k < g.n_points; ++k) {
            CHECK(next.at(0, k) == Complex(0.0, 0.0));
            CHECK(next.at(g.n_points - 1, k) == Complex(0.0, 0.0));
            CHECK(next.at(k, 0) == Complex(0.0, 0.0));
            CHECK(next.at(k, g.n_points - 1) == Complex(0.0, 0.0));
        }
    }

    SUBCASE("a grossly unstable step aborts") {
        DensityField state = rho;
        CHECK_THROWS_AS(
            [&] {
                for (int k = 0; k < 400; ++k) state = step(state, 1.5, p, spec);
            }(),
            NumericalAbort);
    }
}

TEST_CASE("step refinement shows fourth-order convergence") {
    // Richardson ratio on a short von Neumann run
    const auto g = make_grid(8.0, 65);
    const auto rho0 = double_gaussian(2.5, 0.5, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto p = params(0.0, 0.0);

    auto advance = [&](double dt, long steps) {
        return evolve(rho0, {dt, dt * steps, 1 << 30}, p, spec, {});
    };
    const double dt0 = 0.08;
    const long n0 = std::lround(10.0 / dt0);
    const auto coarse = advance(dt0, n0);
    const auto medium = advance(dt0 / 2.0, 2 * n0);
    const auto fine = advance(dt0 / 4.0, 4 * n0);

    const double e1 = max_pointwise_diff(coarse, medium);
    const double e2 = max_pointwise_diff(medium, fine);
    const double ratio = e1 / e2;
    CHECK(ratio > 16.0 * 0.8);
    CHECK(ratio < 16.0 * 1.2);
}

TEST_CASE("evolve") {
    const auto g = make_grid(8.0, 97);
    const auto rho0 = double_gaussian(2.5, 0.4, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);

    SUBCASE("zero steps returns the initial state unchanged") {
        int calls = 0;
        const auto out = evolve(rho0, {0.1, 0.0, 1}, params(2.5e-4, 1.0), spec,
                                [&](double t, const DensityField&) {
                                    CHECK(t == 0.0);
                                    ++calls;
                                });
        CHECK(calls == 1);
        CHECK(max_pointwise_diff(out, rho0) == 0.0);
    }

    SUBCASE("damped and undamped evolutions diverge") {
        const auto probe = probe_stability(rho0, params(2.5e-4, 1.0), spec);
        const long steps = std::lround(std::ceil(1.0 / probe.dt));
        const StepperConfig cfg{1.0 / steps, 1.0, 1 << 30};
        const auto undamped = evolve(rho0, cfg, params(2.5e-4, 0.0), spec, {});
        const auto damped = evolve(rho0, cfg, params(2.5e-4, 1.0), spec, {});
        CHECK(max_pointwise_diff(undamped, damped) > 0.0);
    }

    SUBCASE("10 fs run conserves trace and Hermiticity") {
        const auto p = params(2.5e-4, 1.0);
        const auto probe = probe_stability(rho0, p, spec);
        const long steps = std::lround(std::ceil(10.0 / probe.dt));
        double drift = 0.0, defect = 0.0;
        evolve(rho0, {10.0 / steps, 10.0, 10}, p, spec, [&](double, const DensityField& f) {
            drift = std::max(drift, std::abs(trace(f) - 1.0));
            defect = std::max(defect, hermiticity_defect(f) / max_abs(f));
        });
        CHECK(drift < 1e-6);
        CHECK(defect < 1e-10);
    }

    SUBCASE("observer exceptions propagate") {
        CHECK_THROWS_AS(evolve(rho0, {0.05, 0.5, 1}, params(0.0, 0.0), spec,
                               [](double t, const DensityField&) {
                                   if (t > 0.2) throw std::runtime_error("observer bail");
                               }),
                        std::runtime_error);
    }
}

TEST_CASE("coherence decays monotonically for a flat potential") {
    const auto g = make_grid(8.0, 129);
    const auto rho0 = double_gaussian(2.5, 0.35, g);
    const auto spec = make_free(M);
    const auto p = params(2.5e-4, 0.0);  // V == 0, gamma kT > 0

    const auto probe = probe_stability(rho0, p, spec);
    const int per = static_cast<int>(std::ceil(0.5 / probe.dt));
    std::vector<double> c;
    evolve(rho0, {0.5 / per, 20.0, per}, p, spec,
           [&](double, const DensityField& f) { c.push_back(l1_coherence(f)); });
    REQUIRE(c.size() > 10);
    for (std::size_t k = 2; k < c.size(); ++k) {
        CHECK(c[k] <= c[k - 1]);
    }
}

TEST_CASE("unitary limit preserves purity") {
    const auto g = make_grid(8.0, 129);
    const auto rho0 = double_gaussian(2.5, 0.35, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto p = params(0.0, 0.0);

    const auto probe = probe_stability(rho0, p, spec);
    const int per = static_cast<int>(std::ceil(1.0 / probe.dt));
    const double p0 = purity(rho0);
    double worst = 0.0;
    evolve(rho0, {1.0 / per, 30.0, per}, p, spec, [&](double, const DensityField& f) {
        worst = std::max(worst, std::abs(purity(f) - p0));
    });
    CHECK(worst < 1e-5);
}

TEST_CASE("stability probe reports a validated constant") {
    const auto g = make_grid(8.0, 97);
    const auto rho0 = double_gaussian(2.5, 0.4, g);
    const auto spec = make_quartic_double_well(0.025, 2.5, M);
    const auto probe = probe_stability(rho0, params(2.5e-4, 1.0), spec);

    CHECK(probe.dt > 0.0);
    CHECK(probe.dt <= 0.1 * M * g.spacing * g.spacing / constants::hbar);
    CHECK(probe.c_stab ==
          doctest::Approx(probe.dt * constants::hbar / (M * g.spacing * g.spacing)));
    CHECK(probe.max_drift < 1e-8);
}
