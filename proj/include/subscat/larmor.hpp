#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "subscat/stationary.hpp"
#include "subscat/wavepacket.hpp"

namespace subscat {

// (hbar/2) d/dV0 of the stationary amplitudes, V0 being a uniform offset of
// the potential on [a, b].
struct PerturbedAmplitudes {
    cplx a_out, b_out;
    cplx a_full, b_full;
    cplx A_tr_in, A_ref_in;
    cplx a_tr, a_ref;
};

// psi~ = (hbar/2) d psi / dV0 by central differences of step h and h/2 in the
// barrier offset, combined by one Richardson step. On the ODE route the
// shifted solutions reuse the unperturbed step sequence.
class PerturbationField {
public:
    // h <= 0 picks 1e-6 max(|V|, E). Throws NumericalError when the two
    // difference quotients disagree by more than 1e-5 relative.
    PerturbationField(const Barrier& barrier, double k, const UnitSystem& units,
                      BasisMethod method = BasisMethod::Automatic, double h = 0.0);

    double k() const { return base_.amplitudes().k; }
    double step() const { return h_; }
    double disagreement() const { return disagreement_; }
    const StationaryTriple& base() const { return base_; }
    const PerturbedAmplitudes& amplitudes() const { return tilde_; }

    // psi~ and its x-derivative for the full, transmitted or reflected wave.
    FieldPoint eval(Field field, double x, Side side = Side::Right) const;

private:
    StationaryTriple base_;
    std::vector<StationaryTriple> shifted_;  // +h, -h, +h/2, -h/2
    double h_ = 0.0;
    double disagreement_ = 0.0;
    PerturbedAmplitudes tilde_;
};

// Per-wavenumber clock readings in internal time units.
struct LarmorClocks {
    double k = 0.0;
    double T = 0.0;
    double R = 0.0;
    double tau0 = 0.0;       // 2 Im(conj(A~_tr) A_tr) / T
    double tau_end = 0.0;    // 2 Im(conj(a~_out) a_out) / T
    double tau_dwell = 0.0;
    double tau_int = 0.0;    // from the x_c +- 0 derivatives of psi_tr and psi~_tr
    double tau0_ref = 0.0;
    double tau_end_ref = 0.0;
    double identity_residual = 0.0;  // tau_end - tau0 - tau_dwell - tau_int
    double fd_disagreement = 0.0;
};

// Throws NumericalError when T < 1e-280.
LarmorClocks larmor_clocks(const Barrier& barrier, double k, const UnitSystem& units,
                           BasisMethod method = BasisMethod::Automatic);

// Packet averages sum w varpi T tau(k) / T_packet.
struct LarmorTimes {
    double tau_L = 0.0;
    double tau_int = 0.0;
    double tau0 = 0.0;
    double tau_end = 0.0;
    double tau_dwell_k0 = 0.0;
    double tau0_ref = 0.0;
    double tau_end_ref = 0.0;
    double identity_residual = 0.0;  // tau_end - (tau0 + tau_L + tau_int)
    double max_fd_disagreement = 0.0;
    std::vector<LarmorClocks> per_k;
};

LarmorTimes larmor_times(const ScatteringSet& set, int threads = 0);
double larmor_time(const ScatteringSet& set, int threads = 0);
double interference_time(const ScatteringSet& set, int threads = 0);

struct ClockReadings {
    double tau0 = 0.0;
    double tau_end = 0.0;
};
ClockReadings clock_readings(const ScatteringSet& set, int threads = 0);

// (1/T_packet) int dt int_a^b |psi_tr|^2 dx on a time window around the
// barrier passage, widened until the integrand at both ends is below 1e-10
// of its peak. Throws NumericalError when the estimated truncation error
// exceeds 1e-4 relative.
struct DirectLarmor {
    double tau_L = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double truncation = 0.0;  // relative tail estimate
    std::size_t samples = 0;
};

DirectLarmor direct_larmor_time(const ScatteringSet& set, int threads = 0);

// psi^(up) and psi^(down) for barriers shifted by -+ hbar omega / 2; both
// sets share one interior quadrature.
struct SpinorField {
    ScatteringSetPtr up;
    ScatteringSetPtr down;
    double omega = 0.0;
    double T_up = 0.0, R_up = 0.0;
    double T_down = 0.0, R_down = 0.0;
    double T_tilde = 0.0;
};

// Throws std::invalid_argument unless 0 < hbar omega / 2 < 1e-3 max(|V|)
// (the energy of k0 when the barrier vanishes).
SpinorField make_spinor_field(const SpectralProfile& profile, const Barrier& barrier, const UnitSystem& units,
                              double omega, BasisMethod method = BasisMethod::Automatic, int threads = 0);

struct SpinSeries {
    std::vector<double> times;
    std::vector<double> Sx, Sy, Sz;
    std::vector<double> theta, phi;  // phi unwrapped along the series
    double phi0 = 0.0;
    double phi_end = 0.0;
    double delta_phi = 0.0;
    double T_up = 0.0;
    double T_down = 0.0;
    double Sz_expected = 0.0;     // (hbar/2)(T_up - T_down)/(T_up + T_down)
    double theta_expected = 0.0;  // arccos of the same ratio
    double max_Sz_error = 0.0;
    double theta_spread = 0.0;    // max - min of theta
    double max_length_excess = 0.0;  // max(|S| - hbar/2, 0)
};

// Spin of the transmitted subensemble, initially along x.
SpinSeries spinor_simulation(const SpinorField& spinor, std::span<const double> times, int threads = 0);

struct LarmorRichardson {
    double omega = 0.0;
    double f_omega = 0.0;  // delta_phi / (-omega)
    double f_half = 0.0;   // at omega / 2
    double extrapolated = 0.0;
    SpinSeries coarse;
    SpinSeries fine;
};

LarmorRichardson spinor_richardson(const SpectralProfile& profile, const Barrier& barrier, const UnitSystem& units,
                                   double omega, std::span<const double> times,
                                   BasisMethod method = BasisMethod::Automatic, int threads = 0);

// hbar omega = 1e-5 max(|V|) (the k0 energy for a vanishing barrier).
double default_larmor_frequency(const Barrier& barrier, double k0, const UnitSystem& units);

}  // namespace subscat
