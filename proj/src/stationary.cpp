#include "subscat/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "subscat/errors.hpp"
#include "subscat/special.hpp"

namespace subscat {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 4>;

constexpr double kOdeTolerance = 1e-11;
constexpr int kMaxRejectedSteps = 200;

// Exact propagation of (y, y') across a slab of length len where y'' = z y.
State slab_step(const State& y, double z, double len) {
    const double w = z * len * len;
    const double c = special::cosh_sqrt(w);
    const double s = len * special::sinhc(w);
    return {c * y[0] + s * y[1], z * s * y[0] + c * y[1], c * y[2] + s * y[3], z * s * y[2] + c * y[3]};
}

struct Rhs {
    const Barrier* barrier;
    double centre;
    double energy;
    double kinetic;
    double lo;  // open interval (lo, hi) of s on which V is smooth
    double hi;

    void operator()(const State& y, State& dy, double s) const {
        double sc = std::clamp(s, std::nextafter(lo, hi), std::nextafter(hi, lo));
        double f = ((*barrier)(centre + sc) - energy) / kinetic;
        dy[0] = y[1];
        dy[1] = f * y[0];
        dy[2] = y[3];
        dy[3] = f * y[2];
    }
};

bool finite(const State& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

std::array<double, 4> StationaryBasis::half_line(double s) const {
    // Last knot at or before s.
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                               [](double value, const Knot& knot) { return value < knot.s; });
    const Knot& knot = it == knots_.begin() ? knots_.front() : *(it - 1);
    if (route_ != Route::Ode) return slab_step(knot.y, knot.z, s - knot.s);

    if (s == knot.s) return knot.y;
    // One fixed step from the last accepted knot: no larger than the step the
    // controller accepted there, and a smooth function of s, k and V.
    auto stop = std::lower_bound(stops_.begin(), stops_.end(), s);
    double hi = stop == stops_.end() ? stops_.back() : *stop;
    double lo = stop == stops_.begin() ? 0.0 : *(stop - 1);
    Rhs rhs{&barrier_, barrier_.centre(), energy_, kinetic_, std::min(lo, knot.s), hi};
    State y = knot.y;
    odeint::runge_kutta_dopri5<State> stepper;
    stepper.do_step(rhs, y, knot.s, s - knot.s);
    return y;
}

BasisValues StationaryBasis::at(double x) const {
    const double half = 0.5 * barrier_.width();
    double s = x - barrier_.centre();
    double as = std::min(std::abs(s), half);
    if (std::abs(s) > half * (1.0 + 1e-12))
        throw std::out_of_range("StationaryBasis::at: x outside the barrier region");
    State y = half_line(as);
    if (s >= 0) return {y[0], y[1], y[2], y[3]};
    return {-y[0], y[1], y[2], -y[3]};
}

StationaryBasis solve_basis(const Barrier& barrier, double k, const UnitSystem& units, BasisMethod method) {
    if (!(k > 0.0)) throw std::invalid_argument("solve_basis: wavenumber must be positive");
    if (!barrier.symmetric())
        throw std::invalid_argument("solve_basis: barrier is not symmetric about its centre (max asymmetry " +
                                    std::to_string(barrier.max_asymmetry()) + ")");

    StationaryBasis basis(barrier);
    basis.k_ = k;
    basis.kinetic_ = units.kinetic();
    basis.energy_ = units.energy(k);
    basis.method_ = method;

    const double half = 0.5 * barrier.width();
    const double xc = barrier.centre();
    const State start{0.0, 1.0, 1.0, 0.0};

    if (method == BasisMethod::Automatic && barrier.kind() != BarrierKind::Sampled) {
        basis.route_ = barrier.kind() == BarrierKind::Rectangular ? StationaryBasis::Route::Slab
                                                                   : StationaryBasis::Route::Slabs;
        State y = start;
        double left_edge = barrier.a();
        for (const auto& seg : barrier.segments()) {
            double right_edge = left_edge + seg.width;
            double lo = std::max(left_edge - xc, 0.0);
            double hi = std::min(right_edge - xc, half);
            if (hi > lo) {
                double z = (seg.height - basis.energy_) / basis.kinetic_;
                if (!basis.knots_.empty()) y = slab_step(basis.knots_.back().y, basis.knots_.back().z,
                                                         lo - basis.knots_.back().s);
                basis.knots_.push_back({lo, z, y});
            }
            left_edge = right_edge;
        }
        const auto& last = basis.knots_.back();
        y = slab_step(last.y, last.z, half - last.s);
        if (!finite(y)) throw NumericalError("solve_basis: basis overflow, barrier too opaque for double precision");
        basis.edge_ = {y[0], y[1], y[2], y[3]};
        return basis;
    }

    basis.route_ = StationaryBasis::Route::Ode;
    for (const auto& step : barrier.steps()) {
        double s = step.position - xc;
        if (s > 0.0 && s < half) basis.stops_.push_back(s);
    }
    basis.stops_.push_back(half);
    std::sort(basis.stops_.begin(), basis.stops_.end());

    State y = start;
    double s = 0.0;
    basis.knots_.push_back({0.0, 0.0, y});
    for (double hi : basis.stops_) {
        Rhs rhs{&barrier, xc, basis.energy_, basis.kinetic_, s, hi};
        // Fresh stepper per interval: the FSAL derivative must not leak across a step in V.
        auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(kOdeTolerance, kOdeTolerance);
        double ds = (hi - s) / 16.0;
        int rejected = 0;
        while (s < hi) {
            if (s + ds >= hi) ds = hi - s;
            double target = s + ds;
            if (stepper.try_step(rhs, y, s, ds) == odeint::success) {
                if (target == hi || hi - s < 1e-14 * half) s = hi;
                basis.knots_.push_back({s, 0.0, y});
                rejected = 0;
                if (!finite(y))
                    throw NumericalError("solve_basis: basis overflow, barrier too opaque for double precision");
            } else if (++rejected > kMaxRejectedSteps || ds < 1e-15 * half) {
                throw NumericalError("solve_basis: ODE step size underflow at x = " + std::to_string(xc + s) +
                                     " (tolerance 1e-11 not met)");
            }
        }
    }
    basis.edge_ = {y[0], y[1], y[2], y[3]};
    return basis;
}

double StationaryBasis::amplitude_wronskian() const {
    if (route_ != Route::Ode) return 1.0;
    const double rounding = 2.0 * std::numeric_limits<double>::epsilon() *
                            (std::abs(edge_.du * edge_.v) + std::abs(edge_.dv * edge_.u));
    return rounding < kOdeTolerance ? wronskian() : 1.0;
}

StationaryBasis solve_basis_like(const Barrier& barrier, double k, const UnitSystem& units,
                                 const StationaryBasis& reference) {
    if (reference.route_ != StationaryBasis::Route::Ode) return solve_basis(barrier, k, units, reference.method_);
    if (!(k > 0.0)) throw std::invalid_argument("solve_basis_like: wavenumber must be positive");
    if (barrier.a() != reference.barrier_.a() || barrier.b() != reference.barrier_.b())
        throw std::invalid_argument("solve_basis_like: barrier support differs from the reference");

    StationaryBasis basis(barrier);
    basis.k_ = k;
    basis.kinetic_ = units.kinetic();
    basis.energy_ = units.energy(k);
    basis.method_ = reference.method_;
    basis.route_ = StationaryBasis::Route::Ode;
    basis.stops_ = reference.stops_;

    const double xc = barrier.centre();
    State y{0.0, 1.0, 1.0, 0.0};
    basis.knots_.reserve(reference.knots_.size());
    basis.knots_.push_back({0.0, 0.0, y});
    double lo = 0.0;
    auto stop = basis.stops_.begin();
    odeint::runge_kutta_dopri5<State> stepper;
    for (std::size_t i = 1; i < reference.knots_.size(); ++i) {
        const double s0 = reference.knots_[i - 1].s;
        const double s1 = reference.knots_[i].s;
        if (s0 >= *stop) {
            lo = *stop;
            ++stop;
            stepper.reset();
        }
        Rhs rhs{&barrier, xc, basis.energy_, basis.kinetic_, lo, *stop};
        stepper.do_step(rhs, y, s0, s1 - s0);
        if (!finite(y)) throw NumericalError("solve_basis_like: basis overflow, barrier too opaque for double precision");
        basis.knots_.push_back({s1, 0.0, y});
    }
    basis.edge_ = {y[0], y[1], y[2], y[3]};
    return basis;
}

StationaryTriple solve_stationary_like(const Barrier& barrier, double k, const UnitSystem& units,
                                       const StationaryBasis& reference) {
    StationaryBasis basis = solve_basis_like(barrier, k, units, reference);
    ScatteringAmplitudes amp = amplitudes_from_basis(basis, barrier);
    return StationaryTriple(std::move(amp), std::move(basis));
}

ScatteringAmplitudes amplitudes_from_basis(const StationaryBasis& basis, const Barrier& barrier) {
    ScatteringAmplitudes amp;
    const double k = basis.k();
    const auto& e = basis.at_edge();
    amp.k = k;
    amp.Q = basis.Q();
    amp.P = basis.P();
    amp.wronskian = basis.amplitude_wronskian();
    if (std::abs(amp.Q) < 1e-300 || std::abs(amp.P) < 1e-300)
        throw NumericalError("amplitudes_from_basis: degenerate basis (|Q| or |P| vanishes)");

    const cplx qc = std::conj(amp.Q);
    const cplx pc = std::conj(amp.P);
    const double w = amp.wronskian;
    // (Q/Q* - P/P*)/2 and -(Q/Q* + P/P*)/2 with the numerators expanded, so
    // that the small transmitted amplitude of an opaque barrier is not formed
    // by cancellation of two unimodular numbers.
    amp.a_out = cplx(0.0, -k * w) / (qc * pc);
    amp.b_out = -(e.du * e.dv + k * k * e.u * e.v) / (qc * pc);

    const cplx phase = std::polar(1.0, k * barrier.a());
    amp.a_full = -pc * amp.a_out * phase / w;
    amp.b_full = qc * amp.a_out * phase / w;
    const cplx a_full_alt = (amp.P + pc * amp.b_out) * phase / w;
    const cplx b_full_alt = (amp.Q + qc * amp.b_out) * phase / w;
    const double a_scale = std::abs(amp.P) * (1.0 + std::abs(amp.b_out)) / std::abs(w);
    const double b_scale = std::abs(amp.Q) * (1.0 + std::abs(amp.b_out)) / std::abs(w);
    if (std::abs(amp.a_full - a_full_alt) > 1e-9 * a_scale || std::abs(amp.b_full - b_full_alt) > 1e-9 * b_scale)
        throw NumericalError("amplitudes_from_basis: in-barrier coefficient formulas disagree");

    amp.A_tr_in = std::conj(amp.a_out) * (amp.a_out + amp.b_out);
    amp.A_ref_in = std::conj(amp.b_out) * (amp.b_out + amp.a_out);
    amp.a_tr = amp.P * amp.A_tr_in * phase / w;
    // Equals (P A_ref_in + P* b_out) e^{ika} / W; the difference form avoids
    // cancellation between the two large terms.
    amp.a_ref = amp.a_full - amp.a_tr;
    amp.T = std::norm(amp.a_out);
    amp.R = std::norm(amp.b_out);
    amp.lambda = std::arg(amp.A_ref_in);
    amp.J = std::arg(amp.a_out);
    return amp;
}

StationaryTriple::StationaryTriple(ScatteringAmplitudes amplitudes, StationaryBasis basis)
    : amplitudes_(std::move(amplitudes)), basis_(std::move(basis)) {
    const auto& A = amplitudes_;
    const double k = A.k;
    const Barrier& bar = basis_.barrier();
    const cplx mirror = A.b_out * std::polar(1.0, 2.0 * k * bar.a());
    const cplx out = A.a_out * std::polar(1.0, -k * bar.width());
    coefficients_[0] = {1.0, mirror, A.a_full, A.b_full, A.a_full, A.b_full, out};
    coefficients_[1] = {A.A_tr_in, 0.0, A.a_tr, A.b_full, A.a_full, A.b_full, out};
    coefficients_[2] = {A.A_ref_in, mirror, A.a_ref, 0.0, 0.0, 0.0, 0.0};
}

RegionCoefficients StationaryTriple::coefficients(Field field) const {
    switch (field) {
    case Field::Full: return coefficients_[0];
    case Field::Transmitted: return coefficients_[1];
    case Field::Reflected: return coefficients_[2];
    case Field::Free: break;
    }
    throw std::invalid_argument("StationaryTriple::coefficients: the free wave has no region form");
}

FieldPoint StationaryTriple::eval(Field field, double x, Side side) const {
    const double k = amplitudes_.k;
    const cplx ik(0.0, k);
    if (field == Field::Free) {
        cplx e = std::polar(1.0, k * x);
        return {e, ik * e};
    }
    const Barrier& bar = basis_.barrier();
    const RegionCoefficients& rc = field == Field::Full ? coefficients_[0]
                                   : field == Field::Transmitted ? coefficients_[1]
                                                                 : coefficients_[2];
    if (x < bar.a() || (x == bar.a() && side == Side::Left)) {
        cplx ein = std::polar(1.0, k * x);
        cplx eout = std::conj(ein);
        return {rc.left_in * ein + rc.left_out * eout, ik * (rc.left_in * ein - rc.left_out * eout)};
    }
    if (x > bar.b() || (x == bar.b() && side == Side::Right)) {
        cplx e = std::polar(1.0, k * x);
        return {rc.right * e, ik * rc.right * e};
    }
    const bool left_half = x < bar.centre() || (x == bar.centre() && side == Side::Left);
    const cplx cu = left_half ? rc.u_left : rc.u_right;
    const cplx cv = left_half ? rc.v_left : rc.v_right;
    BasisValues bv = basis_.at(x);
    return {cu * bv.u + cv * bv.v, cu * bv.du + cv * bv.dv};
}

StationaryTriple stationary_triple(const ScatteringAmplitudes& amplitudes, const StationaryBasis& basis,
                                   const Barrier& barrier) {
    if (barrier.a() != basis.barrier().a() || barrier.b() != basis.barrier().b())
        throw std::invalid_argument("stationary_triple: basis was solved for a different barrier");
    return StationaryTriple(amplitudes, basis);
}

StationaryTriple solve_stationary(const Barrier& barrier, double k, const UnitSystem& units, BasisMethod method) {
    StationaryBasis basis = solve_basis(barrier, k, units, method);
    ScatteringAmplitudes amp = amplitudes_from_basis(basis, barrier);
    return StationaryTriple(std::move(amp), std::move(basis));
}

// ---- rectangular closed forms ---------------------------------------------

OracleRecord rectangular_oracle(const Barrier& barrier, double k, const UnitSystem& units) {
    if (barrier.kind() != BarrierKind::Rectangular)
        throw std::invalid_argument("rectangular_oracle: barrier is not rectangular");
    if (!(k > 0.0)) throw std::invalid_argument("rectangular_oracle: wavenumber must be positive");

    using namespace special;
    const double beta = units.kinetic();
    const double moh = units.mass_over_hbar();
    const double v0 = barrier.height();
    const double d = barrier.width();
    const double k2 = k * k;
    const double q0 = v0 / beta;  // kappa_0^2
    const double z = q0 - k2;     // kappa_b^2
    const double w = z * d * d;
    const double q0d2 = q0 * d * d;

    OracleRecord r;
    r.k = k;
    r.energy = units.energy(k);
    r.kappa_sq = z;
    r.kappa0_sq = q0;
    r.near_band_edge = v0 != 0.0 && std::abs(r.energy - v0) < 1e-10 * std::abs(v0);

    constexpr double kRescaleAbove = 900.0;  // (kappa_b d)^2
    if (w <= kRescaleAbove) {
        const double s = sinhc(w);
        const double s1 = sinhc_m1(w);
        const double s1_4 = sinhc_m1(4.0 * w);
        const double g = cosh_sinhc(w);
        const double sq = sinhc(0.25 * w);
        const double dp = 4.0 * k2 + q0 * q0 * d * d * s * s;
        r.transmission = 4.0 * k2 / dp;
        r.log_transmission = std::log(r.transmission);
        r.d_gr = 4.0 * d * (k2 + q0 * z * 0.25 * d * d * sq * sq) * (1.0 + q0d2 * s1) / dp;
        r.tau_dwell = moh * d / (2.0 * k) * (2.0 + q0d2 * s1);
        r.log_tau_dwell = std::log(r.tau_dwell);
        r.tau_end = moh * 2.0 * k * d * (2.0 + 4.0 * q0d2 * s1_4) / dp;
        r.tau0 = moh * 2.0 * k * d * (2.0 * s + q0d2 * g) / dp;
    } else {
        // Every factor multiplied by the appropriate power of e^{-kappa_b d}.
        r.rescaled = true;
        const double x = std::sqrt(w);
        const double sig = std::exp(-x);
        const double sig2 = sig * sig;
        const double sb = sinhc_scaled(w);
        const double cb = cosh_sqrt_scaled(w);
        const double s1b = (sb - sig) / w;
        const double s1_4b = (sinhc_scaled(4.0 * w) - sig2) / (4.0 * w);
        const double sqb = sinhc_scaled(0.25 * w);
        const double gb = (cb - sb) / w;
        const double dpb = 4.0 * k2 * sig2 + q0 * q0 * d * d * sb * sb;
        r.log_transmission = std::log(4.0 * k2) - 2.0 * x - std::log(dpb);
        r.transmission = std::exp(r.log_transmission);
        r.d_gr = 4.0 * d * (k2 * sig + q0 * z * 0.25 * d * d * sqb * sqb) * (sig + q0d2 * s1b) / dpb;
        r.log_tau_dwell = x + std::log(moh * d / (2.0 * k) * (2.0 * sig + q0d2 * s1b));
        r.tau_dwell = std::exp(r.log_tau_dwell);
        r.tau_end = moh * 2.0 * k * d * (2.0 * sig2 + 4.0 * q0d2 * s1_4b) / dpb;
        r.tau0 = moh * 2.0 * k * d * (2.0 * sb * sig + q0d2 * gb * sig) / dpb;
    }
    r.tau_int = r.tau_end - r.tau0 - r.tau_dwell;
    return r;
}

TransferAmplitudes transfer_matrix_oracle(const Barrier& barrier, double k, const UnitSystem& units) {
    if (barrier.kind() == BarrierKind::Sampled)
        throw std::invalid_argument("transfer_matrix_oracle: needs a piecewise-constant barrier");
    if (!(k > 0.0)) throw std::invalid_argument("transfer_matrix_oracle: wavenumber must be positive");
    const double energy = units.energy(k);
    const double beta = units.kinetic();
    const cplx ik(0.0, k);
    // (psi, psi') just right of b for the outgoing wave normalized to 1 at b.
    cplx psi = 1.0;
    cplx dpsi = ik;
    auto segs = barrier.segments();
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        const double z = (it->height - energy) / beta;
        const double len = it->width;
        const double w = z * len * len;
        const double c = special::cosh_sqrt(w);
        const double s = len * special::sinhc(w);
        // Inverse of [[c, s], [z s, c]] (unit determinant).
        cplx p = c * psi - s * dpsi;
        cplx dp = -z * s * psi + c * dpsi;
        psi = p;
        dpsi = dp;
    }
    const cplx incoming = 0.5 * (psi + dpsi / ik);
    const cplx reflected = 0.5 * (psi - dpsi / ik);
    return {1.0 / incoming, reflected / incoming};
}

}  // namespace subscat
