#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "subscat/errors.hpp"
#include "subscat/timing.hpp"

using namespace subscat;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("analytic point: group length and dwell time") {
    UnitSystem u = UnitSystem::natural();
    Barrier bar = make_rectangular(1.0, 3.0, 1.0);
    const double s2 = std::sinh(2.0), c2 = std::cosh(2.0);
    CHECK(rel(group_length(bar, 1.0, u), (2.0 * s2 - 2.0) / c2) < 1e-8);
    CHECK(group_length(bar, 1.0, u) == doctest::Approx(1.3964508).epsilon(1e-6));
    DwellResult dw = dwell_time(bar, 1.0, u);
    CHECK(rel(dw.tau_dwell, s2) < 1e-10);
    CHECK(rel(dw.form_full, s2) < 1e-10);
    REQUIRE(dw.closed_form);
    CHECK(rel(*dw.closed_form, s2) < 1e-13);
    CHECK(dw.current == doctest::Approx(1.0 / (c2 * c2)));
    DwellResult ode = dwell_time(bar, 1.0, u, BasisMethod::Integrate);
    CHECK(rel(ode.tau_dwell, s2) < 1e-8);
}

TEST_CASE("both dwell definitions agree on random barriers") {
    UnitSystem u = UnitSystem::natural();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> v0(0.1, 3.0), width(0.2, 4.0), kk(0.2, 2.5);
    for (int i = 0; i < 100; ++i) {
        double h = v0(rng), d = width(rng), k = kk(rng);
        Barrier bar = i % 3 == 0 ? make_piecewise(2.0, {{0.25 * d, 0.5 * h}, {0.5 * d, h}, {0.25 * d, 0.5 * h}})
                                 : make_rectangular(2.0, 2.0 + d, h);
        DwellResult dw = dwell_time(bar, k, u);
        CHECK(dw.tau_dwell > 0.0);
        CHECK(dw.both_forms_delta <= 1e-8 * dw.tau_dwell);
        if (dw.closed_form) CHECK(rel(dw.tau_dwell, *dw.closed_form) < 1e-8);
    }
}

TEST_CASE("dwell time grows exponentially with width") {
    UnitSystem u = UnitSystem::natural();
    const double k = 1.0, kb = 1.0;
    std::vector<double> widths;
    for (double x = 4.0; x <= 12.0; x += 0.5) widths.push_back(x / kb);
    std::vector<double> logs;
    for (double d : widths) logs.push_back(std::log(dwell_time(make_rectangular(1.0, 1.0 + d, 1.0), k, u).tau_dwell));
    double slope = (logs.back() - logs.front()) / (widths.back() - widths.front());
    CHECK(std::abs(slope / kb - 1.0) < 0.01);
}

TEST_CASE("opaque barriers fall back to the closed form") {
    UnitSystem u = UnitSystem::natural();
    Barrier wide = make_rectangular(1.0, 1001.0, 1.0);
    DwellResult dw = dwell_time(wide, 1.0, u);
    CHECK(dw.from_closed_form);
    CHECK(dw.log_tau_dwell == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-12));
    Barrier pw = make_piecewise(1.0, {{500.0, 1.0}, {500.0, 1.0}});
    CHECK_THROWS_AS(dwell_time(pw, 1.0, u), NumericalError);
}

TEST_CASE("Hartman sweep at E = V0/2") {
    UnitSystem u = UnitSystem::natural();
    std::vector<double> widths;
    for (double d = 3.0; d <= 12.0; d += 0.25) widths.push_back(d);
    HartmanSweep sw = hartman_sweep(1.0, 1.0, widths, u);
    CHECK(sw.tau_end_limit == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& r : sw.rows) {
        CHECK(rel(r.tau_end, std::tanh(r.d)) < 1e-12);
        CHECK(rel(r.tau_dwell, std::sinh(r.d)) < 1e-12);
    }
    HartmanChecks c = check_hartman(sw);
    CHECK(c.tau_end_monotone);
    CHECK(c.final_gap < 1e-3);
    CHECK(c.dwell_slope_error < 0.01);
    CHECK(c.tau_int_negative);
    CHECK(c.int_to_dwell_ratio >= 0.5);
    CHECK(c.int_to_dwell_ratio <= 1.0);

    const double d2[] = {2.0};
    HartmanSweep one = hartman_sweep(1.0, 1.0, d2, u);
    CHECK(one.rows[0].tau_int == doctest::Approx(-3.1944372854).epsilon(1e-9));
}

TEST_CASE("free packet crosses virtual markers uniformly") {
    UnitSystem u = UnitSystem::natural();
    auto set = make_scattering_set(build_profile(1.0, 10.0, 512, 8.0), make_rectangular(100.0, 102.0, 1.0), u);
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(2.0 * i);
    ExactGroupTime g = exact_group_time({set, Field::Free}, times, 20.0, 50.0);
    // <x>(t) = <v> t with <v> = hbar <k> / m.
    const double v = u.velocity(set->profile().mean_k());
    CHECK(rel(g.tau_exact, 30.0 / v) < 1e-6);
    CHECK(g.crossings_left == 1);
    CHECK(g.crossings_right == 1);
}

TEST_CASE("narrow packet group length matches the closed form") {
    UnitSystem u = UnitSystem::natural();
    Barrier bar = make_rectangular(500.0, 502.0, 1.0);
    auto set = make_scattering_set(build_profile(1.0, 200.0, 512, 8.0), bar, u);
    AsymptoticGroupTime ag = asymptotic_group_time(*set);
    OracleRecord r = rectangular_oracle(bar, 1.0, u);
    CHECK(rel(ag.d_gr, r.d_gr) < 1e-4);
    CHECK(ag.tau_free == doctest::Approx(2.0));
    CHECK(ag.tau_interval(0.0, 0.0) == doctest::Approx(ag.tau_as));
}

TEST_CASE("near-free barrier reduces to free motion") {
    UnitSystem u = UnitSystem::nm_ev(0.067);
    Barrier bar = make_rectangular(200.0, 215.0, 1e-12);
    const double k0 = u.wavenumber(0.05);
    auto set = make_scattering_set(build_profile(k0, 10.0, 1024, 4.0), bar, u);
    AsymptoticGroupTime ag = asymptotic_group_time(*set);
    CHECK(rel(ag.tau_as, u.mass_over_hbar() * 15.0 / ag.mean_k_tr) < 1e-4);
    CHECK(rel(dwell_time(bar, k0, u).tau_dwell, ag.tau_free) < 1e-4);
}
