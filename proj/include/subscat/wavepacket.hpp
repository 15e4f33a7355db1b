#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "subscat/potential.hpp"
#include "subscat/quadrature.hpp"
#include "subscat/stationary.hpp"
#include "subscat/units.hpp"

namespace subscat {

// Gaussian in-asymptote A(k) = (2 l0^2/pi)^{1/4} exp(-l0^2 (k - k0)^2) on a
// uniform grid with trapezoidal weights.
struct SpectralProfile {
    double k0 = 0.0;
    double l0 = 0.0;
    double halfwidth_sigmas = 8.0;
    double k_first = 0.0;
    double dk = 0.0;
    std::vector<double> k;
    std::vector<double> weight;
    std::vector<cplx> amplitude;

    std::size_t size() const { return k.size(); }
    double gaussian(double kk) const;
    // |A(k)|^2 - |A(-k)|^2
    double varpi(std::size_t j) const;
    double norm() const;    // sum w |A|^2
    double mean_k() const;  // sum w k |A|^2 / norm
    // |A| at the grid edges relative to the peak: the truncation floor.
    double edge_ratio() const;
};

// Throws std::invalid_argument for k0 <= 0, l0 <= 0, n_samples < 64 or a grid
// that reaches k <= 0.
SpectralProfile build_profile(double k0, double l0, std::size_t n_samples = 2048, double halfwidth_sigmas = 8.0);

// Stationary triples for every grid wavenumber plus the basis tabulated on the
// fixed quadrature nodes inside [a, b]. Read-only after construction.
class ScatteringSet {
public:
    // `interior_nodes`, when given, replaces the default quadrature of [a, b]
    // (two sets sampled on one grid need the same nodes).
    ScatteringSet(SpectralProfile profile, Barrier barrier, UnitSystem units,
                  BasisMethod method = BasisMethod::Automatic, int threads = 0,
                  std::span<const QuadratureNode> interior_nodes = {});

    const SpectralProfile& profile() const { return profile_; }
    const Barrier& barrier() const { return barrier_; }
    const UnitSystem& units() const { return units_; }
    std::size_t size() const { return triples_.size(); }
    const StationaryTriple& triple(std::size_t j) const { return triples_[j]; }
    double energy(std::size_t j) const { return energies_[j]; }

    // Packet transmission and reflection, sum w |A|^2 T(k) and sum w |A|^2 R(k).
    double transmission() const { return transmission_; }
    double reflection() const { return reflection_; }

    const std::vector<QuadratureNode>& interior() const { return interior_; }
    const BasisValues& interior_basis(std::size_t node, std::size_t j) const { return table_[node * size() + j]; }
    double outer_panel_width() const { return outer_width_; }
    double min_velocity() const { return v_min_; }
    double max_velocity() const { return v_max_; }

private:
    SpectralProfile profile_;
    Barrier barrier_;
    UnitSystem units_;
    std::vector<StationaryTriple> triples_;
    std::vector<double> energies_;
    std::vector<QuadratureNode> interior_;
    std::vector<BasisValues> table_;
    double transmission_ = 0.0;
    double reflection_ = 0.0;
    double outer_width_ = 0.0;
    double v_min_ = 0.0;
    double v_max_ = 0.0;
};

using ScatteringSetPtr = std::shared_ptr<const ScatteringSet>;

ScatteringSetPtr make_scattering_set(const SpectralProfile& profile, const Barrier& barrier, const UnitSystem& units,
                                     BasisMethod method = BasisMethod::Automatic, int threads = 0,
                                     std::span<const QuadratureNode> interior_nodes = {});

struct PacketField {
    ScatteringSetPtr set;
    Field which = Field::Full;
};

// psi(x, t) = (2 pi)^{-1/2} sum_j w_j A_j psi(x; k_j) exp(-i E_j t), summed in
// grid order. `side` selects the one-sided derivative at a, x_c and b.
FieldPoint evaluate_packet(const PacketField& field, double x, double t, Side side = Side::Right);

struct SpatialGrid {
    std::vector<QuadratureNode> nodes;
    std::size_t interior_begin = 0;  // nodes[interior_begin + i] is interior()[i]
    std::size_t interior_end = 0;
};

// Panels aligned with a, x_c and b covering at least [x_lo, x_hi].
SpatialGrid spatial_grid(const ScatteringSet& set, double x_lo, double x_hi);

struct FieldSamples {
    std::vector<cplx> value;
    std::vector<cplx> derivative;  // empty unless requested
};

struct Snapshot {
    double t = 0.0;
    SpatialGrid grid;
    std::vector<FieldSamples> fields;  // same order as the request
};

// Samples the requested fields on a grid that covers the kinematic hull of
// the packet at time t, widened until the density at both ends is below
// max(1e-12, 10 * edge_ratio^2) of the peak. Throws NumericalError if the
// domain cannot be closed or exceeds half the k-grid period 2 pi / dk.
Snapshot snapshot(const ScatteringSet& set, std::span<const Field> fields, double t, bool derivatives,
                  int threads = 0);

// The requested fields on an explicit grid whose interior block must be the
// set's interior quadrature.
std::vector<FieldSamples> sample_grid(const ScatteringSet& set, std::span<const Field> fields, const SpatialGrid& grid,
                                      double t, bool derivatives, int threads = 0);

// Only the interior nodes of [a, b].
Snapshot interior_snapshot(const ScatteringSet& set, std::span<const Field> fields, double t, bool derivatives,
                           int threads = 0);

struct ExpectationSeries {
    Field field = Field::Full;
    std::vector<double> times;
    std::vector<double> norm;
    std::vector<double> x_mean;  // <x> / norm
    std::vector<double> p_mean;  // <p> / norm, empty unless requested
};

ExpectationSeries expectation_series(const PacketField& field, std::span<const double> times,
                                     bool with_momentum = false, int threads = 0);

struct NormSeries {
    std::vector<double> times;
    std::vector<double> T;           // <psi_tr|psi_tr>(t)
    std::vector<double> R;           // <psi_ref|psi_ref>(t)
    std::vector<double> full_norm;   // <psi_full|psi_full>(t)
    std::vector<double> cross;       // Re <psi_tr|psi_ref>(t)
    double T_spectral = 0.0;         // 1 - R_spectral
    double R_spectral = 0.0;
    double max_deviation = 0.0;      // max_t |T(t) - (1 - R_spectral)|
    double max_R_drift = 0.0;        // max_t |R(t) - R_spectral|
};

NormSeries packet_norm_series(const ScatteringSet& set, std::span<const double> times, int threads = 0);

struct EhrenfestTerms {
    double t = 0.0;
    double lhs = 0.0;       // d<p>/dt, Richardson-extrapolated central difference
    double force = 0.0;     // <-dV/dx>
    double boundary = 0.0;  // momentum flux released at x_c
    double residual = 0.0;  // lhs - force - boundary
};

// Unnormalized balance for the transmitted or reflected field. dt <= 0 picks
// 1e-3 of the free crossing time m d / (hbar k0).
EhrenfestTerms ehrenfest_balance(const ScatteringSet& set, Field field, double t, double dt = 0.0,
                                 int threads = 0);

// <p> = hbar Im int psi* psi' dx, unnormalized.
double packet_momentum(const ScatteringSet& set, Field field, double t, int threads = 0);

}  // namespace subscat
