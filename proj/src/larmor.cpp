#include "subscat/larmor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "subscat/errors.hpp"
#include "subscat/parallel.hpp"
#include "subscat/quadrature.hpp"
#include "subscat/timing.hpp"

namespace subscat {

namespace {

constexpr double kMaxDisagreement = 1e-5;

using AmplitudeVector = std::array<cplx, 8>;

AmplitudeVector pack(const ScatteringAmplitudes& a) {
    return {a.a_out, a.b_out, a.a_full, a.b_full, a.A_tr_in, a.A_ref_in, a.a_tr, a.a_ref};
}

double reference_energy(const Barrier& barrier, double energy) { return std::max(barrier.scale(), energy); }

}  // namespace

PerturbationField::PerturbationField(const Barrier& barrier, double k, const UnitSystem& units, BasisMethod method,
                                     double h)
    : base_(solve_stationary(barrier, k, units, method)) {
    const double scale = reference_energy(barrier, units.energy(k));
    h_ = h > 0.0 ? h : 1e-6 * scale;
    for (double off : {h_, -h_, 0.5 * h_, -0.5 * h_})
        shifted_.push_back(solve_stationary_like(barrier.shifted(off), k, units, base_.basis()));

    const AmplitudeVector f = pack(base_.amplitudes());
    const AmplitudeVector p1 = pack(shifted_[0].amplitudes()), m1 = pack(shifted_[1].amplitudes());
    const AmplitudeVector p2 = pack(shifted_[2].amplitudes()), m2 = pack(shifted_[3].amplitudes());
    // Magnitudes against which cancellation noise is judged, per amplitude.
    const double out_scale = std::abs(f[0]) + std::abs(f[1]);
    const double in_scale = std::abs(f[2]) + std::abs(f[3]);
    const std::array<double, 8> group{out_scale, out_scale, in_scale, in_scale, 1.0, 1.0, in_scale, in_scale};

    AmplitudeVector r{};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const cplx d1 = (p1[i] - m1[i]) / (2.0 * h_);
        const cplx d2 = (p2[i] - m2[i]) / h_;
        r[i] = (4.0 * d2 - d1) / 3.0;
        const double denom = std::max({std::abs(r[i]), group[i] / scale, 1e-300});
        disagreement_ = std::max(disagreement_, std::abs(d1 - d2) / denom);
    }
    if (!(disagreement_ <= kMaxDisagreement)) {
        std::ostringstream msg;
        msg << "perturbation_field: V0 finite differences disagree by " << disagreement_ << " at k = " << k
            << " (step " << h_ << "); try a step near " << 0.25 * h_;
        throw NumericalError(msg.str());
    }
    const double half_hbar = 0.5 * UnitSystem::hbar;
    tilde_ = {half_hbar * r[0], half_hbar * r[1], half_hbar * r[2], half_hbar * r[3],
              half_hbar * r[4], half_hbar * r[5], half_hbar * r[6], half_hbar * r[7]};
}

FieldPoint PerturbationField::eval(Field field, double x, Side side) const {
    std::array<FieldPoint, 4> p;
    for (std::size_t i = 0; i < 4; ++i) p[i] = shifted_[i].eval(field, x, side);
    auto combine = [&](cplx FieldPoint::*member) {
        const cplx d1 = (p[0].*member - p[1].*member) / (2.0 * h_);
        const cplx d2 = (p[2].*member - p[3].*member) / h_;
        return 0.5 * UnitSystem::hbar * (4.0 * d2 - d1) / 3.0;
    };
    return {combine(&FieldPoint::value), combine(&FieldPoint::derivative)};
}

LarmorClocks larmor_clocks(const Barrier& barrier, double k, const UnitSystem& units, BasisMethod method) {
    PerturbationField pf(barrier, k, units, method);
    const ScatteringAmplitudes& a = pf.base().amplitudes();
    const PerturbedAmplitudes& t = pf.amplitudes();
    if (!(a.T >= 1e-280)) {
        std::ostringstream msg;
        msg << "larmor_clocks: T = " << a.T << " at k = " << k << " is below double-precision reach";
        throw NumericalError(msg.str());
    }
    LarmorClocks c;
    c.k = k;
    c.T = a.T;
    c.R = a.R;
    c.fd_disagreement = pf.disagreement();
    c.tau0 = 2.0 * std::imag(std::conj(t.A_tr_in) * a.A_tr_in) / a.T;
    c.tau_end = 2.0 * std::imag(std::conj(t.a_out) * a.a_out) / a.T;
    if (a.R > 1e-300) {
        c.tau0_ref = 2.0 * std::imag(std::conj(t.A_ref_in) * a.A_ref_in) / a.R;
        c.tau_end_ref = 2.0 * std::imag(std::conj(t.b_out) * a.b_out) / a.R;
    } else {
        c.tau0_ref = c.tau_end_ref = std::numeric_limits<double>::quiet_NaN();
    }
    // psi_tr(x_c) = b_full, psi_tr'(x_c + 0) = a_full, psi_tr'(x_c - 0) = a_tr.
    const cplx jump = a.a_full - a.a_tr;
    const cplx jump_tilde = t.a_full - t.a_tr;
    c.tau_int = std::real(a.b_full * std::conj(jump_tilde) - std::conj(t.b_full) * jump) / (k * a.T);
    c.tau_dwell = dwell_time(barrier, k, units, method).tau_dwell;
    c.identity_residual = c.tau_end - c.tau0 - c.tau_dwell - c.tau_int;
    return c;
}

LarmorTimes larmor_times(const ScatteringSet& set, int threads) {
    const std::size_t n = set.size();
    const auto& p = set.profile();
    const BasisMethod method = set.triple(0).basis().method();
    LarmorTimes out;
    out.per_k.resize(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) out.per_k[j] = larmor_clocks(set.barrier(), p.k[j], set.units(), method);
    });
    double s_dw = 0.0, s_int = 0.0, s0 = 0.0, s_end = 0.0, r0 = 0.0, r_end = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& c = out.per_k[j];
        const double w = p.weight[j] * p.varpi(j);
        s_dw += w * c.T * c.tau_dwell;
        s_int += w * c.T * c.tau_int;
        s0 += w * c.T * c.tau0;
        s_end += w * c.T * c.tau_end;
        if (c.R > 1e-300) {
            r0 += w * c.R * c.tau0_ref;
            r_end += w * c.R * c.tau_end_ref;
        }
        out.max_fd_disagreement = std::max(out.max_fd_disagreement, c.fd_disagreement);
    }
    const double T = set.transmission();
    const double R = set.reflection();
    out.tau_L = s_dw / T;
    out.tau_int = s_int / T;
    out.tau0 = s0 / T;
    out.tau_end = s_end / T;
    out.tau0_ref = R > 0.0 ? r0 / R : 0.0;
    out.tau_end_ref = R > 0.0 ? r_end / R : 0.0;
    out.identity_residual = out.tau_end - (out.tau0 + out.tau_L + out.tau_int);
    out.tau_dwell_k0 = dwell_time(set.barrier(), p.k0, set.units(), method).tau_dwell;
    return out;
}

double larmor_time(const ScatteringSet& set, int threads) { return larmor_times(set, threads).tau_L; }

double interference_time(const ScatteringSet& set, int threads) { return larmor_times(set, threads).tau_int; }

ClockReadings clock_readings(const ScatteringSet& set, int threads) {
    LarmorTimes lt = larmor_times(set, threads);
    return {lt.tau0, lt.tau_end};
}

DirectLarmor direct_larmor_time(const ScatteringSet& set, int threads) {
    const Barrier& bar = set.barrier();
    const UnitSystem& u = set.units();
    const double l0 = set.profile().l0;
    const double v0 = u.velocity(set.profile().k0);
    const double panel = l0 / set.max_velocity();
    const double t_c = bar.centre() / v0;
    const double half = (6.0 * l0 + bar.width()) / v0;
    const Field which[] = {Field::Transmitted};

    auto norm_at = [&](double t) {
        Snapshot s = interior_snapshot(set, which, t, false, threads);
        double n = 0.0;
        for (std::size_t i = 0; i < s.grid.nodes.size(); ++i) n += s.grid.nodes[i].w * std::norm(s.fields[0].value[i]);
        return n;
    };
    struct Panel {
        double integral = 0.0;
        double first = 0.0;  // integrand at the leftmost node
        double last = 0.0;
        double peak = 0.0;
    };
    auto evaluate = [&](double lo, double hi) {
        Panel pn;
        for (const auto& q : panel_rule(lo, hi, 1)) {
            const double v = norm_at(q.x);
            pn.integral += q.w * v;
            pn.peak = std::max(pn.peak, v);
        }
        pn.first = norm_at(lo);
        pn.last = norm_at(hi);
        return pn;
    };

    DirectLarmor out;
    const auto n0 = static_cast<std::size_t>(std::max(4.0, std::ceil(2.0 * half / panel)));
    out.t_lo = t_c - 0.5 * panel * static_cast<double>(n0);
    out.t_hi = out.t_lo + panel * static_cast<double>(n0);
    std::vector<Panel> panels;
    for (std::size_t i = 0; i < n0; ++i)
        panels.push_back(evaluate(out.t_lo + panel * static_cast<double>(i), out.t_lo + panel * static_cast<double>(i + 1)));

    constexpr double kTailRatio = 1e-10;
    constexpr std::size_t kMaxPanels = 4000;
    auto peak = [&] {
        double m = 0.0;
        for (const auto& pn : panels) m = std::max(m, pn.peak);
        return m;
    };
    std::size_t grow_left = n0 / 2 + 1, grow_right = n0 / 2 + 1;
    while (true) {
        const double pk = peak();
        const bool left_ok = panels.front().first <= kTailRatio * pk;
        const bool right_ok = panels.back().last <= kTailRatio * pk;
        if (left_ok && right_ok) break;
        if (panels.size() > kMaxPanels)
            throw NumericalError("direct_larmor_time: barrier occupation does not decay inside the time window [" +
                                 std::to_string(u.to_ps(out.t_lo)) + ", " + std::to_string(u.to_ps(out.t_hi)) +
                                 "] ps");
        if (!left_ok) {
            std::vector<Panel> extra;
            for (std::size_t i = grow_left; i >= 1; --i)
                extra.push_back(evaluate(out.t_lo - panel * static_cast<double>(i),
                                         out.t_lo - panel * static_cast<double>(i - 1)));
            out.t_lo -= panel * static_cast<double>(grow_left);
            panels.insert(panels.begin(), extra.begin(), extra.end());
            grow_left *= 2;
        }
        if (!right_ok) {
            for (std::size_t i = 0; i < grow_right; ++i)
                panels.push_back(evaluate(out.t_hi + panel * static_cast<double>(i),
                                          out.t_hi + panel * static_cast<double>(i + 1)));
            out.t_hi += panel * static_cast<double>(grow_right);
            grow_right *= 2;
        }
    }
    double total = 0.0;
    for (const auto& pn : panels) total += pn.integral;
    out.samples = panels.size() * 34;
    // The integrand decays at least as fast as the packet envelope: bound the
    // two tails by one panel of the end value.
    out.truncation = (panels.front().first + panels.back().last) * panel / total;
    if (out.truncation > 1e-4) {
        std::ostringstream msg;
        msg << "direct_larmor_time: window truncation " << out.truncation << " exceeds 1e-4; enlarge the window";
        throw NumericalError(msg.str());
    }
    out.tau_L = total / set.transmission();
    return out;
}

double default_larmor_frequency(const Barrier& barrier, double k0, const UnitSystem& units) {
    const double ref = barrier.scale() > 0.0 ? barrier.scale() : units.energy(k0);
    return 1e-5 * ref / UnitSystem::hbar;
}

SpinorField make_spinor_field(const SpectralProfile& profile, const Barrier& barrier, const UnitSystem& units,
                              double omega, BasisMethod method, int threads) {
    const double ref = barrier.scale() > 0.0 ? barrier.scale() : units.energy(profile.k0);
    const double shift = 0.5 * UnitSystem::hbar * omega;
    if (!(shift > 0.0) || !(shift < 1e-3 * ref)) {
        std::ostringstream msg;
        msg << "spinor field: hbar omega / 2 = " << shift << " must lie in (0, " << 1e-3 * ref
            << "); the second-order spin response would dominate";
        throw std::invalid_argument(msg.str());
    }
    SpinorField s;
    s.omega = omega;
    s.up = make_scattering_set(profile, barrier.shifted(-shift), units, method, threads);
    s.down = make_scattering_set(profile, barrier.shifted(shift), units, method, threads, s.up->interior());
    s.T_up = s.up->transmission();
    s.R_up = s.up->reflection();
    s.T_down = s.down->transmission();
    s.R_down = s.down->reflection();
    s.T_tilde = 0.5 * (s.T_up + s.T_down);
    return s;
}

SpinSeries spinor_simulation(const SpinorField& spinor, std::span<const double> times, int threads) {
    if (times.empty()) throw std::invalid_argument("spinor_simulation: empty time grid");
    const Field which[] = {Field::Transmitted};
    const double half_hbar = 0.5 * UnitSystem::hbar;
    SpinSeries out;
    const double ratio = (spinor.T_up - spinor.T_down) / (spinor.T_up + spinor.T_down);
    out.T_up = spinor.T_up;
    out.T_down = spinor.T_down;
    out.Sz_expected = half_hbar * ratio;
    out.theta_expected = std::acos(ratio);
    double prev_phi = 0.0;
    double offset = 0.0;
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double t = times[n];
        Snapshot up = snapshot(*spinor.up, which, t, false, threads);
        auto down = sample_grid(*spinor.down, which, up.grid, t, false, threads);
        double n_up = 0.0, n_down = 0.0;
        cplx overlap = 0.0;
        for (std::size_t i = 0; i < up.grid.nodes.size(); ++i) {
            const double w = up.grid.nodes[i].w;
            const cplx pu = up.fields[0].value[i];
            const cplx pd = down[0].value[i];
            n_up += w * std::norm(pu);
            n_down += w * std::norm(pd);
            overlap += w * std::conj(pu) * pd;
        }
        const double total = n_up + n_down;
        const double sx = UnitSystem::hbar * overlap.real() / total;
        const double sy = UnitSystem::hbar * overlap.imag() / total;
        const double sz = half_hbar * (n_up - n_down) / total;
        double phi = std::atan2(sy, sx);
        if (n > 0) {
            const double jump = phi + offset - prev_phi;
            if (jump > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
            if (jump < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
        }
        phi += offset;
        prev_phi = phi;
        out.times.push_back(t);
        out.Sx.push_back(sx);
        out.Sy.push_back(sy);
        out.Sz.push_back(sz);
        out.theta.push_back(std::atan2(std::hypot(sx, sy), sz));
        out.phi.push_back(phi);
        out.max_Sz_error = std::max(out.max_Sz_error, std::abs(sz - out.Sz_expected));
        out.max_length_excess = std::max(out.max_length_excess, std::sqrt(sx * sx + sy * sy + sz * sz) - half_hbar);
    }
    const auto [lo, hi] = std::minmax_element(out.theta.begin(), out.theta.end());
    out.theta_spread = *hi - *lo;
    out.phi0 = out.phi.front();
    out.phi_end = out.phi.back();
    out.delta_phi = out.phi_end - out.phi0;
    return out;
}

LarmorRichardson spinor_richardson(const SpectralProfile& profile, const Barrier& barrier, const UnitSystem& units,
                                   double omega, std::span<const double> times, BasisMethod method, int threads) {
    LarmorRichardson r;
    r.omega = omega;
    r.coarse = spinor_simulation(make_spinor_field(profile, barrier, units, omega, method, threads), times, threads);
    r.fine = spinor_simulation(make_spinor_field(profile, barrier, units, 0.5 * omega, method, threads), times, threads);
    r.f_omega = r.coarse.delta_phi / -omega;
    r.f_half = r.fine.delta_phi / (-0.5 * omega);
    r.extrapolated = (4.0 * r.f_half - r.f_omega) / 3.0;
    return r;
}

}  // namespace subscat
