#include "subscat/timing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "subscat/errors.hpp"

namespace subscat {

namespace {

double wrap(double d) { return d - 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi)); }

std::vector<double> unwrap(const std::vector<double>& raw, const char* what) {
    std::vector<double> out(raw.size());
    out[0] = raw[0];
    for (std::size_t j = 1; j < raw.size(); ++j) {
        const double d = wrap(raw[j] - raw[j - 1]);
        if (std::abs(d) > 0.5 * std::numbers::pi) {
            std::ostringstream msg;
            msg << "asymptotic_group_time: " << what << " changes by " << d << " between grid points " << j - 1
                << " and " << j << "; k-grid too coarse";
            throw NumericalError(msg.str());
        }
        out[j] = out[j - 1] + d;
    }
    return out;
}

std::vector<double> grid_derivative(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    return d;
}

// arg A_tr differs from lambda = arg A_ref by a piecewise-constant +-pi/2 and,
// unlike lambda, stays smooth through reflectionless energies.
double in_phase(const ScatteringAmplitudes& amp) { return std::arg(amp.A_tr_in); }

struct Crossing {
    std::size_t index = 0;
    std::size_t count = 0;
    bool found = false;
};

Crossing upward_crossing(const std::vector<double>& x, double marker, bool last) {
    Crossing c;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (x[i] < marker && x[i + 1] >= marker) {
            ++c.count;
            if (!c.found || last) c.index = i;
            c.found = true;
        }
    }
    return c;
}

}  // namespace

ExactGroupTime exact_group_time(const PacketField& field, std::span<const double> times, double x1, double x2,
                                int threads) {
    if (times.size() < 4) throw std::invalid_argument("exact_group_time: need at least 4 sample times");
    if (!std::is_sorted(times.begin(), times.end()))
        throw std::invalid_argument("exact_group_time: sample times must be increasing");
    ExactGroupTime out;
    out.trace = expectation_series(field, times, false, threads);
    const auto& xs = out.trace.x_mean;
    Crossing c1 = upward_crossing(xs, x1, false);
    Crossing c2 = upward_crossing(xs, x2, true);
    if (!c1.found || !c2.found) {
        std::ostringstream msg;
        msg << "exact_group_time: centre of mass never crosses " << (c1.found ? x2 : x1) << " within t in ["
            << times.front() << ", " << times.back() << "]";
        throw NumericalError(msg.str());
    }
    out.crossings_left = c1.count;
    out.crossings_right = c2.count;

    boost::math::interpolators::pchip<std::vector<double>> spline(std::vector<double>(times.begin(), times.end()),
                                                                  std::vector<double>(xs));
    auto coarse_root = [&](const Crossing& c, double marker) {
        double lo = times[c.index], hi = times[c.index + 1];
        boost::uintmax_t iters = 100;
        auto r = boost::math::tools::toms748_solve([&](double t) { return spline(t) - marker; }, lo, hi,
                                                   boost::math::tools::eps_tolerance<double>(40), iters);
        return 0.5 * (r.first + r.second);
    };
    const double e1 = coarse_root(c1, x1);
    const double e2 = coarse_root(c2, x2);
    const double tol = 1e-6 * std::max(std::abs(e2 - e1), 1e-300);

    const Field which = field.which;
    auto refine = [&](const Crossing& c, double marker, double estimate) {
        auto f = [&](double t) {
            const double tt[] = {t};
            return expectation_series({field.set, which}, tt, false, threads).x_mean[0] - marker;
        };
        double lo = times[c.index], hi = times[c.index + 1];
        double flo = xs[c.index] - marker, fhi = xs[c.index + 1] - marker;
        // Tighten the bracket around the interpolated estimate when possible.
        const double delta = std::min(hi - lo, 10.0 * tol);
        if (estimate - delta > lo && estimate + delta < hi) {
            double a = estimate - delta, b = estimate + delta;
            double fa = f(a), fb = f(b);
            if (fa < 0.0 && fb >= 0.0) {
                lo = a, hi = b, flo = fa, fhi = fb;
            }
        }
        boost::uintmax_t iters = 60;
        auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                   [&](double a, double b) { return std::abs(b - a) <= tol; }, iters);
        return 0.5 * (r.first + r.second);
    };
    out.t1 = refine(c1, x1, e1);
    out.t2 = refine(c2, x2, e2);
    out.tau_exact = out.t2 - out.t1;
    return out;
}

ExactGroupTime exact_group_time(const PacketField& field, std::span<const double> times, int threads) {
    return exact_group_time(field, times, field.set->barrier().a(), field.set->barrier().b(), threads);
}

AsymptoticGroupTime asymptotic_group_time(const ScatteringSet& set) {
    const auto& p = set.profile();
    const std::size_t n = set.size();
    if (n < 3) throw std::invalid_argument("asymptotic_group_time: need at least 3 grid points");
    std::vector<double> lam(n), J(n);
    for (std::size_t j = 0; j < n; ++j) {
        lam[j] = in_phase(set.triple(j).amplitudes());
        J[j] = set.triple(j).amplitudes().J;
    }
    const auto dlam = grid_derivative(unwrap(lam, "arg A_tr"), p.dk);
    const auto dJ = grid_derivative(unwrap(J, "arg a_out"), p.dk);

    double wsum = 0.0, lam_sum = 0.0, J_sum = 0.0, k_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = p.weight[j] * std::norm(p.amplitude[j]) * set.triple(j).amplitudes().T;
        wsum += w;
        lam_sum += w * dlam[j];
        J_sum += w * dJ[j];
        k_sum += w * p.k[j];
    }
    AsymptoticGroupTime out;
    out.mass_over_hbar = set.units().mass_over_hbar();
    out.lambda_prime_in = lam_sum / wsum;
    out.J_prime_out = J_sum / wsum;
    out.d_gr = out.J_prime_out - out.lambda_prime_in;
    out.mean_k_tr = k_sum / wsum;
    out.tau_as = out.mass_over_hbar * out.d_gr / out.mean_k_tr;
    out.tau_free = out.mass_over_hbar * set.barrier().width() / p.k0;
    out.x_start_tr = -out.lambda_prime_in;
    return out;
}

double group_length(const Barrier& barrier, double k, const UnitSystem& units, double h, BasisMethod method) {
    if (h <= 0.0) h = 1e-4 * k;
    const StationaryBasis reference = solve_basis(barrier, k, units, method);
    auto phases = [&](double kk) {
        auto amp = amplitudes_from_basis(solve_basis_like(barrier, kk, units, reference), barrier);
        return std::pair{amp.J, in_phase(amp)};
    };
    auto central = [&](double step) {
        auto [jp, lp] = phases(k + step);
        auto [jm, lm] = phases(k - step);
        return (wrap(jp - jm) - wrap(lp - lm)) / (2.0 * step);
    };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

DwellResult dwell_time(const Barrier& barrier, double k, const UnitSystem& units, BasisMethod method) {
    if (!(k > 0.0)) throw std::invalid_argument("dwell_time: wavenumber must be positive");
    DwellResult out;
    out.k = k;
    std::optional<OracleRecord> oracle;
    if (barrier.kind() == BarrierKind::Rectangular) {
        oracle = rectangular_oracle(barrier, k, units);
        out.closed_form = oracle->tau_dwell;
    }
    const double v = units.velocity(k);

    double T = oracle ? oracle->transmission : 0.0;
    if (!oracle || oracle->log_transmission > std::log(1e-280)) {
        StationaryTriple tri = solve_stationary(barrier, k, units, method);
        T = tri.amplitudes().T;
        if (T >= 1e-280) {
            out.current = T * v;
            std::vector<double> breaks{barrier.a(), barrier.centre(), barrier.b()};
            for (const auto& s : barrier.steps())
                if (s.position > barrier.a() && s.position < barrier.b()) breaks.push_back(s.position);
            std::sort(breaks.begin(), breaks.end());
            breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
            using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
            double tr = 0.0, full = 0.0;
            for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
                const double lo = breaks[i], hi = breaks[i + 1];
                tr += GK::integrate([&](double x) { return std::norm(tri(Field::Transmitted, x)); }, lo, hi, 15, 1e-13);
                if (lo >= barrier.centre())
                    full += GK::integrate([&](double x) { return std::norm(tri(Field::Full, x)); }, lo, hi, 15, 1e-13);
            }
            out.form_transmitted = tr / out.current;
            out.form_full = 2.0 * full / out.current;
            out.both_forms_delta = std::abs(out.form_transmitted - out.form_full);
            out.tau_dwell = out.form_transmitted;
            out.log_tau_dwell = std::log(out.tau_dwell);
            return out;
        }
    }
    if (!oracle) {
        std::ostringstream msg;
        msg << "dwell_time: transmission " << T << " below 1e-280 saturates double precision";
        throw NumericalError(msg.str());
    }
    out.from_closed_form = true;
    out.current = oracle->transmission * v;
    out.tau_dwell = oracle->tau_dwell;
    out.log_tau_dwell = oracle->log_tau_dwell;
    out.form_transmitted = out.form_full = out.tau_dwell;
    return out;
}

HartmanSweep hartman_sweep(double height, double k, std::span<const double> widths, const UnitSystem& units,
                           double a) {
    HartmanSweep out;
    out.k = k;
    out.height = height;
    const double beta = units.kinetic();
    const double z = (height - units.energy(k)) / beta;
    if (!(z > 0.0)) throw std::invalid_argument("hartman_sweep: energy must lie below the barrier top");
    out.kappa_b = std::sqrt(z);
    out.kappa0_sq = height / beta;
    out.tau_end_limit = units.mass_over_hbar() * 2.0 * k / (out.kappa_b * out.kappa0_sq);
    for (double d : widths) {
        OracleRecord r = rectangular_oracle(make_rectangular(a, a + d, height), k, units);
        out.rows.push_back({d, r.transmission, r.log_transmission, r.d_gr, r.tau_dwell, r.tau0, r.tau_end, r.tau_int});
    }
    return out;
}

HartmanChecks check_hartman(const HartmanSweep& sweep) {
    HartmanChecks c;
    const auto& rows = sweep.rows;
    const std::size_t n = rows.size();
    if (n < 2) throw std::invalid_argument("check_hartman: need at least two widths");
    std::vector<double> gap(n);
    for (std::size_t i = 0; i < n; ++i) gap[i] = std::abs(rows[i].tau_end - sweep.tau_end_limit) / sweep.tau_end_limit;
    c.tau_end_monotone = true;
    for (std::size_t i = 1; i < n; ++i) c.tau_end_monotone = c.tau_end_monotone && gap[i] <= gap[i - 1];
    c.final_gap = std::max(gap[n - 1], gap[n - 2]);

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& r : rows) {
        const double y = std::log(r.tau_dwell);
        sx += r.d;
        sy += y;
        sxx += r.d * r.d;
        sxy += r.d * y;
    }
    const double dn = static_cast<double>(n);
    c.dwell_slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    c.dwell_slope_error = std::abs(c.dwell_slope / sweep.kappa_b - 1.0);
    c.tau_int_negative = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.tau_int < 0.0; });
    c.int_to_dwell_ratio = std::abs(rows.back().tau_int) / rows.back().tau_dwell;
    return c;
}

}  // namespace subscat
