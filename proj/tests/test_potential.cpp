#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "subscat/potential.hpp"
#include "subscat/special.hpp"
#include "subscat/units.hpp"

using namespace subscat;

TEST_CASE("rectangular barrier geometry") {
    Barrier bar = make_rectangular(200.0, 215.0, 0.2);
    CHECK(bar.width() == 15.0);
    CHECK(bar.centre() == 207.5);
    CHECK(bar.centre() - bar.a() == bar.b() - bar.centre());
    CHECK(bar.symmetric());
    CHECK(bar.max_asymmetry() == 0.0);
    CHECK(bar(207.0) == 0.2);
    CHECK(bar(199.999) == 0.0);
    CHECK(bar(215.001) == 0.0);

    Barrier unit = make_rectangular(1.0, 3.0, 1.0);
    CHECK(unit.centre() == 2.0);
    CHECK(unit.width() == 2.0);
}

TEST_CASE("wells are valid symmetric barriers") {
    Barrier well = make_rectangular(1.0, 2.0, -0.5);
    CHECK(well.symmetric());
    CHECK(well(1.5) == -0.5);
    CHECK(validate_symmetry(well, 101).symmetric);
}

TEST_CASE("invalid geometry is rejected") {
    CHECK_THROWS_AS(make_rectangular(3.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_rectangular(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_rectangular(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_rectangular(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("symmetry validation of sampled profiles") {
    Barrier bump = make_sampled(1.0, 5.0, [](double x) { return std::exp(-(x - 3.0) * (x - 3.0)); });
    auto rep = validate_symmetry(bump, 1000);
    CHECK(rep.symmetric);
    CHECK(rep.max_asymmetry <= 1e-12);

    Barrier ramp = make_sampled(1.0, 5.0, [](double x) { return 0.1 * (x - 1.0); });
    CHECK_FALSE(validate_symmetry(ramp, 1000).symmetric);
    CHECK_FALSE(ramp.symmetric());
    CHECK(ramp.max_asymmetry() > 0.1);
}

TEST_CASE("sampled barrier vanishes outside support and matches samples") {
    Barrier bump = make_sampled(2.0, 4.0, [](double x) { return 1.0 - (x - 3.0) * (x - 3.0); });
    CHECK(bump(1.999) == 0.0);
    CHECK(bump(4.001) == 0.0);
    CHECK(bump(3.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(bump.kind() == BarrierKind::Sampled);
}

TEST_CASE("piecewise barrier steps and shifted copies") {
    Barrier pw = make_piecewise(1.0, {{0.5, 0.3}, {1.0, 0.7}, {0.5, 0.3}});
    CHECK(pw.b() == doctest::Approx(3.0));
    CHECK(pw.symmetric());
    auto steps = pw.steps();
    REQUIRE(steps.size() == 4);
    CHECK(steps[0].jump == doctest::Approx(0.3));
    CHECK(steps[1].jump == doctest::Approx(0.4));
    CHECK(steps[2].jump == doctest::Approx(-0.4));
    CHECK(steps[3].jump == doctest::Approx(-0.3));

    Barrier up = pw.shifted(0.1);
    CHECK(up(2.0) == doctest::Approx(0.8));
    CHECK(up(0.5) == 0.0);

    Barrier asym = make_piecewise(1.0, {{0.5, 0.3}, {1.0, 0.7}});
    CHECK_FALSE(asym.symmetric());
}

TEST_CASE("effective-mass unit conversions") {
    UnitSystem u = UnitSystem::nm_ev(0.067);
    double k0 = u.wavenumber(0.05);
    CHECK(u.energy(k0) == doctest::Approx(0.05).epsilon(1e-15));
    // m d / (hbar k0) for the reference barrier, converted to ps.
    double tau_free = u.to_ps(u.mass_over_hbar() * 15.0 / k0);
    CHECK(tau_free == doctest::Approx(0.0292764276).epsilon(1e-8));
    CHECK_THROWS(UnitSystem::nm_ev(0.0));
}

TEST_CASE("entire functions through w = 0") {
    using namespace special;
    for (double w : {-30.0, -1.2, -0.99, -1e-6, 0.0, 1e-6, 0.5, 0.99, 1.01, 20.0}) {
        double x = std::sqrt(std::abs(w));
        double s = w > 0 ? std::sinh(x) / x : (w < 0 ? std::sin(x) / x : 1.0);
        double c = w > 0 ? std::cosh(x) : std::cos(x);
        CHECK(sinhc(w) == doctest::Approx(s).epsilon(1e-14));
        CHECK(cosh_sqrt(w) == doctest::Approx(c).epsilon(1e-14));
        if (std::abs(w) > 0.5) {
            CHECK(sinhc_m1(w) == doctest::Approx((s - 1.0) / w).epsilon(1e-12));
            CHECK(cosh_sinhc(w) == doctest::Approx((c - s) / w).epsilon(1e-12));
        }
    }
    CHECK(sinhc_m1(0.0) == doctest::Approx(1.0 / 6.0));
    CHECK(cosh_sinhc(0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(sinhc_scaled(1e6) == doctest::Approx(0.5 / 1000.0).epsilon(1e-12));
    CHECK(cosh_sqrt_scaled(1e6) == doctest::Approx(0.5));
    CHECK(sinhc_scaled(4.0) == doctest::Approx(std::sinh(2.0) / 2.0 * std::exp(-2.0)));
}
