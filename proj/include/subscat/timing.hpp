#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "subscat/stationary.hpp"
#include "subscat/wavepacket.hpp"

namespace subscat {

struct ExactGroupTime {
    double t1 = 0.0;  // first upward crossing of the left marker
    double t2 = 0.0;  // last upward crossing of the right marker
    double tau_exact = 0.0;
    std::size_t crossings_left = 0;
    std::size_t crossings_right = 0;
    ExpectationSeries trace;  // the coarse series used for bracketing
};

// Crossing instants of the norm-normalized centre of mass of `field` through
// x1 and x2, bracketed on `times`, located with a monotone cubic Hermite
// interpolant and then refined on the exact trajectory to 1e-6 (t2 - t1).
// Throws NumericalError when a marker is never crossed.
ExactGroupTime exact_group_time(const PacketField& field, std::span<const double> times, double x1, double x2,
                                int threads = 0);
// Markers at the barrier edges.
ExactGroupTime exact_group_time(const PacketField& field, std::span<const double> times, int threads = 0);

struct AsymptoticGroupTime {
    double lambda_prime_in = 0.0;  // <lambda'> over |A|^2 T
    double J_prime_out = 0.0;      // <J'> over |A|^2 T
    double d_gr = 0.0;             // <J'> - <lambda'>
    double mean_k_tr = 0.0;        // <k> over |A|^2 T
    double tau_as = 0.0;           // m d_gr / (hbar <k>_tr)
    double tau_free = 0.0;         // m d / (hbar k0)
    double x_start_tr = 0.0;       // -<lambda'>
    double mass_over_hbar = 0.0;

    // m (d_gr + L1 + L2) / (hbar <k>_tr): time spent in [a - L1, b + L2].
    double tau_interval(double L1, double L2) const { return mass_over_hbar * (d_gr + L1 + L2) / mean_k_tr; }
};

// Phase derivatives by central differences along the k-grid. Throws
// NumericalError when adjacent phases differ by more than pi/2 after
// unwrapping.
AsymptoticGroupTime asymptotic_group_time(const ScatteringSet& set);

// Per-wavenumber d_gr = J'(k) - lambda'(k) by a central difference of step h.
double group_length(const Barrier& barrier, double k, const UnitSystem& units, double h = 0.0,
                    BasisMethod method = BasisMethod::Automatic);

struct DwellResult {
    double k = 0.0;
    double tau_dwell = 0.0;
    double log_tau_dwell = 0.0;
    double current = 0.0;           // I_tr = T hbar k / m
    double form_transmitted = 0.0;  // int_a^b |psi_tr|^2 / I_tr
    double form_full = 0.0;         // 2 int_{x_c}^b |psi_full|^2 / I_tr
    double both_forms_delta = 0.0;
    std::optional<double> closed_form;  // rectangular barriers
    bool from_closed_form = false;      // T below 1e-280: numeric forms skipped
};

// Throws NumericalError when T < 1e-280 for a non-rectangular barrier.
DwellResult dwell_time(const Barrier& barrier, double k, const UnitSystem& units,
                       BasisMethod method = BasisMethod::Automatic);

struct SweepRow {
    double d = 0.0;
    double T = 0.0;
    double log_T = 0.0;
    double d_gr = 0.0;
    double tau_dwell = 0.0;
    double tau0 = 0.0;
    double tau_end = 0.0;
    double tau_int = 0.0;
};

struct HartmanSweep {
    double k = 0.0;
    double height = 0.0;
    double kappa_b = 0.0;
    double kappa0_sq = 0.0;
    double tau_end_limit = 0.0;  // 2 m k / (hbar kappa_b kappa0^2)
    std::vector<SweepRow> rows;
};

// Rectangular barriers [a, a + d] of the given height at fixed k, evaluated
// with the closed forms.
HartmanSweep hartman_sweep(double height, double k, std::span<const double> widths, const UnitSystem& units,
                           double a = 1.0);

struct HartmanChecks {
    bool tau_end_monotone = false;    // |tau_end - limit| decreases along the sweep
    double final_gap = 0.0;           // max relative gap to the limit over the last two rows
    double dwell_slope = 0.0;         // least-squares slope of log tau_dwell against d
    double dwell_slope_error = 0.0;   // |slope / kappa_b - 1|
    bool tau_int_negative = false;
    double int_to_dwell_ratio = 0.0;  // |tau_int| / tau_dwell at the largest d
};

HartmanChecks check_hartman(const HartmanSweep& sweep);

}  // namespace subscat
