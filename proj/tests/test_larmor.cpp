#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "subscat/larmor.hpp"
#include "subscat/timing.hpp"

using namespace subscat;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// E = V0/2 with m = hbar = k = 1 and d = 2.
Barrier analytic_barrier(double a = 200.0) { return make_rectangular(a, a + 2.0, 1.0); }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace

TEST_CASE("clock readings at the analytic point") {
    const UnitSystem u = UnitSystem::natural();
    for (BasisMethod m : {BasisMethod::Automatic, BasisMethod::Integrate}) {
        LarmorClocks c = larmor_clocks(analytic_barrier(), 1.0, u, m);
        CHECK(rel(c.tau_end, std::tanh(2.0)) < 1e-6);
        CHECK(rel(c.tau0, 2.0 / std::cosh(2.0)) < 1e-6);
        CHECK(rel(c.tau_dwell, std::sinh(2.0)) < 1e-6);
        CHECK(rel(c.tau_int, -3.1944372854) < 1e-6);
        CHECK(std::abs(c.identity_residual) < 1e-8);
        CHECK(rel(c.tau0_ref, c.tau0) < 1e-6);
        CHECK(rel(c.tau_end_ref, c.tau_end) < 1e-6);
        CHECK(c.fd_disagreement < 1e-5);
    }
}

TEST_CASE("clock readings match the rectangular closed forms in physical units") {
    const UnitSystem u = UnitSystem::nm_ev(0.067);
    const Barrier bar = make_rectangular(200.0, 215.0, 0.2);
    for (double e : {0.02, 0.05, 0.15, 0.25}) {
        const double k = u.wavenumber(e);
        LarmorClocks c = larmor_clocks(bar, k, u);
        OracleRecord o = rectangular_oracle(bar, k, u);
        CHECK(rel(c.tau0, o.tau0) < 1e-6);
        CHECK(rel(c.tau_end, o.tau_end) < 1e-6);
        CHECK(rel(c.tau_int, o.tau_int) < 1e-6);
        CHECK(std::abs(c.identity_residual) < 1e-6 * std::max(c.tau_dwell, std::abs(c.tau_end)));
    }
}

TEST_CASE("piecewise barrier: identity and reflection equalities") {
    const UnitSystem u = UnitSystem::natural();
    const Barrier bar = make_piecewise(10.0, {{0.5, 0.8}, {1.0, 1.6}, {0.5, 0.8}});
    for (double k : {0.6, 1.1, 2.0}) {
        LarmorClocks c = larmor_clocks(bar, k, u);
        LarmorClocks ci = larmor_clocks(bar, k, u, BasisMethod::Integrate);
        CHECK(std::abs(c.identity_residual) < 1e-7 * std::max(c.tau_dwell, std::abs(c.tau_end)));
        CHECK(rel(c.tau0_ref, c.tau0) < 1e-6);
        CHECK(rel(c.tau_end_ref, c.tau_end) < 1e-6);
        CHECK(rel(ci.tau_end, c.tau_end) < 1e-7);
        CHECK(rel(ci.tau0, c.tau0) < 1e-7);
    }
}

TEST_CASE("vanishing barrier: first-order response of a free wave") {
    // psi~ is the first Born derivative here, not zero: tau_end = m d / (hbar k)
    // and the two reading terms cancel.
    const UnitSystem u = UnitSystem::natural();
    const double k = 1.3, d = 2.0;
    LarmorClocks c = larmor_clocks(make_rectangular(5.0, 5.0 + d, 0.0), k, u);
    CHECK(rel(c.tau_end, d / k) < 1e-6);
    CHECK(rel(c.tau0, std::sin(k * d) / (k * k)) < 1e-6);
    CHECK(rel(c.tau_int, -c.tau0) < 1e-6);
    CHECK(rel(c.tau_dwell, d / k) < 1e-9);
}

TEST_CASE("shifted barrier agrees with psi - omega psi~ to second order") {
    const UnitSystem u = UnitSystem::natural();
    const Barrier bar = analytic_barrier();
    PerturbationField pf(bar, 1.0, u);
    auto error = [&](double omega, double x) {
        StationaryTriple up = solve_stationary(bar.shifted(-0.5 * omega), 1.0, u);
        const cplx linear = pf.base().eval(Field::Transmitted, x).value - omega * pf.eval(Field::Transmitted, x).value;
        return std::abs(up.eval(Field::Transmitted, x).value - linear);
    };
    for (double x : {199.0, 200.7, 201.3, 203.5}) {
        const double ratio = error(2e-3, x) / error(1e-3, x);
        CHECK(ratio > 3.6);
        CHECK(ratio < 4.4);
    }
}

TEST_CASE("finite differences reuse the ODE step sequence") {
    const UnitSystem u = UnitSystem::natural();
    const Barrier bar = make_sampled(3.0, 6.0, [](double x) { return 1.2 * std::exp(-std::pow((x - 4.5) / 0.6, 2)); });
    LarmorClocks c = larmor_clocks(bar, 1.1, u);
    CHECK(c.fd_disagreement < 1e-7);
    CHECK(std::abs(c.identity_residual) < 1e-7 * std::max(c.tau_dwell, std::abs(c.tau_end)));
}

TEST_CASE("opaque limit of the interference term") {
    const UnitSystem u = UnitSystem::natural();
    LarmorClocks c = larmor_clocks(make_rectangular(1.0, 13.0, 1.0), 1.0, u);
    CHECK(c.tau_int < 0.0);
    CHECK(std::abs(c.tau_int) / c.tau_dwell > 0.99);
    CHECK(std::abs(c.tau_int) / c.tau_dwell <= 1.0);
}

TEST_CASE("narrow packet: spectral averages, direct double integral and the spinor") {
    const UnitSystem u = UnitSystem::natural();
    const Barrier bar = analytic_barrier(1000.0);
    // The transient Sz error during the passage falls as 1/l0; 1e-8 needs l0 of a few hundred.
    const double l0 = 400.0;
    const SpectralProfile prof = build_profile(1.0, l0, 768);
    auto set = make_scattering_set(prof, bar, u);

    LarmorTimes lt = larmor_times(*set);
    CHECK(std::abs(lt.identity_residual) < 1e-8 * std::max(lt.tau_L, std::abs(lt.tau_end)));
    CHECK(rel(lt.tau_L, std::sinh(2.0)) < 5e-3);
    CHECK(rel(lt.tau0_ref, lt.tau0) < 1e-3);
    CHECK(rel(lt.tau_end_ref, lt.tau_end) < 1e-3);

    DirectLarmor dl = direct_larmor_time(*set);
    CHECK(dl.truncation < 1e-4);
    CHECK(rel(dl.tau_L, lt.tau_L) < 1e-4);

    const double omega = default_larmor_frequency(bar, prof.k0, u);
    CHECK(omega == doctest::Approx(1e-5));
    const auto times = linspace(1000.0 - 12.0 * l0, 1002.0 + 12.0 * l0, 17);
    LarmorRichardson lr = spinor_richardson(prof, bar, u, omega, times);
    CHECK(rel(lr.extrapolated, lt.tau_L + lt.tau_int) < 1e-3);
    CHECK(lr.coarse.theta_spread < 1e-6);
    CHECK(lr.coarse.max_Sz_error < 1e-8);
    CHECK(lr.coarse.max_length_excess < 1e-12);
    CHECK(std::abs(lr.coarse.theta.front() - lr.coarse.theta_expected) < 1e-8);
    CHECK(std::abs(lr.coarse.theta.front() - 0.5 * std::numbers::pi) < 1e-3);
    // phi0 is first order in omega.
    CHECK(lr.fine.phi0 / lr.coarse.phi0 == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("spinor field rejects a strong field") {
    const UnitSystem u = UnitSystem::natural();
    const SpectralProfile prof = build_profile(1.0, 20.0, 128);
    CHECK_THROWS_AS(make_spinor_field(prof, analytic_barrier(), u, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(make_spinor_field(prof, analytic_barrier(), u, 0.0), std::invalid_argument);
}
