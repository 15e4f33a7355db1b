#pragma once

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "subscat/potential.hpp"
#include "subscat/units.hpp"

namespace subscat {

using cplx = std::complex<double>;

// u, u', v, v' at one point of [a, b].
struct BasisValues {
    double u = 0.0;
    double du = 0.0;
    double v = 0.0;
    double dv = 0.0;
};

enum class BasisMethod {
    Automatic,  // closed form for rectangular, exact slab propagation for piecewise, ODE for sampled
    Integrate,  // adaptive Runge-Kutta for every barrier kind
};

// Real odd (u) and even (v) solutions about the barrier centre at one
// wavenumber, normalized by u'(x_c) = v(x_c) = 1 so the Wronskian
// u'v - v'u equals 1 analytically.
class StationaryBasis {
public:
    double k() const { return k_; }
    double energy() const { return energy_; }
    const Barrier& barrier() const { return barrier_; }
    BasisMethod method() const { return method_; }

    // Any x in [a, b]; the half x < x_c follows from parity.
    BasisValues at(double x) const;
    const BasisValues& at_edge() const { return edge_; }

    // u'v - v'u evaluated at b. Equals 1 up to rounding that grows with the
    // basis magnitude; a diagnostic only.
    double wronskian() const { return edge_.du * edge_.v - edge_.dv * edge_.u; }
    // The Wronskian used by the amplitude formulas: exactly 1 on the slab
    // routes; on the ODE route the edge value, which keeps the amplitudes
    // unitary, unless its rounding error exceeds the integration tolerance.
    double amplitude_wronskian() const;
    cplx Q() const { return {edge_.du, k_ * edge_.u}; }
    cplx P() const { return {edge_.dv, k_ * edge_.v}; }

private:
    friend StationaryBasis solve_basis(const Barrier&, double, const UnitSystem&, BasisMethod);
    friend StationaryBasis solve_basis_like(const Barrier&, double, const UnitSystem&, const StationaryBasis&);

    enum class Route { Slab, Slabs, Ode };

    // Start of a constant-height slab (slab routes) or an accepted ODE step,
    // measured as the distance s from the centre. Slab routes carry their
    // height through `z` = (V - E) / (hbar^2 / 2m).
    struct Knot {
        double s = 0.0;
        double z = 0.0;
        std::array<double, 4> y{};  // u, u', v, v'
    };

    explicit StationaryBasis(Barrier barrier) : barrier_(std::move(barrier)) {}
    std::array<double, 4> half_line(double s) const;

    Barrier barrier_;
    BasisMethod method_ = BasisMethod::Automatic;
    Route route_ = Route::Slab;
    double k_ = 0.0;
    double energy_ = 0.0;
    double kinetic_ = 0.0;
    std::vector<Knot> knots_;
    std::vector<double> stops_;  // ODE interval ends (s values)
    BasisValues edge_;
};

// Throws std::invalid_argument for k <= 0 or an asymmetric barrier and
// NumericalError when the integrator misses its tolerance or the basis
// overflows (barrier too opaque for double precision).
StationaryBasis solve_basis(const Barrier& barrier, double k, const UnitSystem& units,
                            BasisMethod method = BasisMethod::Automatic);

// Same barrier support and method as `reference`; on the ODE route the
// integration reuses the reference step sequence, so that the result is a
// smooth function of k and of the potential (finite differences in either
// then see no step-size noise).
StationaryBasis solve_basis_like(const Barrier& barrier, double k, const UnitSystem& units,
                                 const StationaryBasis& reference);

struct ScatteringAmplitudes {
    double k = 0.0;
    cplx a_out, b_out;
    cplx a_full, b_full;
    cplx A_tr_in, A_ref_in;
    cplx a_tr;
    cplx a_ref;  // coefficient of u in psi_ref on [a, x_c]
    double T = 0.0;
    double R = 0.0;
    double lambda = 0.0;  // arg(A_ref_in)
    double J = 0.0;       // arg(a_out)
    double wronskian = 1.0;
    cplx Q, P;
};

ScatteringAmplitudes amplitudes_from_basis(const StationaryBasis& basis, const Barrier& barrier);

enum class Field { Full, Transmitted, Reflected, Free };
enum class Side { Left, Right };

struct FieldPoint {
    cplx value;
    cplx derivative;
};

// psi = left_in e^{ikx} + left_out e^{-ikx}       for x <= a
//     = u_left u + v_left v                       for a <= x <= x_c
//     = u_right u + v_right v                     for x_c <= x <= b
//     = right e^{ikx}                             for x >= b
struct RegionCoefficients {
    cplx left_in, left_out;
    cplx u_left, v_left;
    cplx u_right, v_right;
    cplx right;
};

class StationaryTriple {
public:
    StationaryTriple(ScatteringAmplitudes amplitudes, StationaryBasis basis);

    const ScatteringAmplitudes& amplitudes() const { return amplitudes_; }
    const StationaryBasis& basis() const { return basis_; }
    const Barrier& barrier() const { return basis_.barrier(); }

    // Region coefficients of the full, transmitted or reflected wave (Free is
    // the bare plane wave and has no barrier-region representation).
    RegionCoefficients coefficients(Field field) const;

    // Value and x-derivative; `side` picks the one-sided derivative at a, x_c, b.
    FieldPoint eval(Field field, double x, Side side = Side::Right) const;
    cplx operator()(Field field, double x) const { return eval(field, x).value; }

private:
    ScatteringAmplitudes amplitudes_;
    StationaryBasis basis_;
    std::array<RegionCoefficients, 3> coefficients_;
};

StationaryTriple stationary_triple(const ScatteringAmplitudes& amplitudes, const StationaryBasis& basis,
                                   const Barrier& barrier);

// Convenience: basis, amplitudes and triple in one call.
StationaryTriple solve_stationary(const Barrier& barrier, double k, const UnitSystem& units,
                                  BasisMethod method = BasisMethod::Automatic);

StationaryTriple solve_stationary_like(const Barrier& barrier, double k, const UnitSystem& units,
                                       const StationaryBasis& reference);

// ---- Independent routes -------------------------------------------------

// Closed forms for a rectangular barrier, written through the entire
// functions of special.hpp so that E = V0 and E > V0 need no special casing,
// and rescaled by exp(-kappa_b d) once kappa_b d exceeds 30.
struct OracleRecord {
    double k = 0.0;
    double energy = 0.0;
    double kappa_sq = 0.0;  // 2m(V0 - E)/hbar^2, negative above the barrier
    double kappa0_sq = 0.0; // 2m V0 / hbar^2
    double transmission = 0.0;
    double log_transmission = 0.0;
    double d_gr = 0.0;
    double tau_dwell = 0.0;
    double log_tau_dwell = 0.0;
    double tau0 = 0.0;
    double tau_end = 0.0;
    double tau_int = 0.0;  // tau_end - tau0 - tau_dwell
    bool near_band_edge = false;  // |E - V0| / |V0| < 1e-10
    bool rescaled = false;
};

OracleRecord rectangular_oracle(const Barrier& barrier, double k, const UnitSystem& units);

struct TransferAmplitudes {
    cplx a_out, b_out;
};

// Back-propagates the outgoing wave through the slabs with 2x2 transfer
// matrices acting on (psi, psi'), returned in the phase convention of
// psi_full (reflected b_out e^{ik(2a-x)}, transmitted a_out e^{ik(x-d)}).
TransferAmplitudes transfer_matrix_oracle(const Barrier& barrier, double k, const UnitSystem& units);

}  // namespace subscat
