#include "subscat/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "subscat/errors.hpp"
#include "subscat/parallel.hpp"

namespace subscat {

// ---- profile --------------------------------------------------------------

double SpectralProfile::gaussian(double kk) const {
    const double d = kk - k0;
    return std::pow(2.0 * l0 * l0 / std::numbers::pi, 0.25) * std::exp(-l0 * l0 * d * d);
}

double SpectralProfile::varpi(std::size_t j) const {
    const double mirror = gaussian(-k[j]);
    return std::norm(amplitude[j]) - mirror * mirror;
}

double SpectralProfile::norm() const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += weight[j] * std::norm(amplitude[j]);
    return s;
}

double SpectralProfile::mean_k() const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += weight[j] * k[j] * std::norm(amplitude[j]);
    return s / norm();
}

double SpectralProfile::edge_ratio() const {
    const double peak = gaussian(k0);
    return std::max(std::abs(amplitude.front()), std::abs(amplitude.back())) / peak;
}

SpectralProfile build_profile(double k0, double l0, std::size_t n_samples, double halfwidth_sigmas) {
    if (!(k0 > 0.0)) throw std::invalid_argument("build_profile: k0 must be positive");
    if (!(l0 > 0.0)) throw std::invalid_argument("build_profile: l0 must be positive");
    if (n_samples < 64) throw std::invalid_argument("build_profile: need at least 64 samples");
    if (!(halfwidth_sigmas > 0.0)) throw std::invalid_argument("build_profile: halfwidth must be positive");
    const double half = halfwidth_sigmas / (std::numbers::sqrt2 * l0);
    if (k0 - half <= 0.0) {
        std::ostringstream msg;
        msg << "build_profile: grid reaches k <= 0 (k0 = " << k0 << ", half-width " << half
            << "); completed scattering needs halfwidth_sigmas < " << k0 * std::numbers::sqrt2 * l0;
        throw std::invalid_argument(msg.str());
    }
    SpectralProfile p;
    p.k0 = k0;
    p.l0 = l0;
    p.halfwidth_sigmas = halfwidth_sigmas;
    p.k_first = k0 - half;
    p.dk = 2.0 * half / static_cast<double>(n_samples - 1);
    p.k.resize(n_samples);
    p.weight.assign(n_samples, p.dk);
    p.weight.front() = p.weight.back() = 0.5 * p.dk;
    p.amplitude.resize(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j) {
        // Symmetric about k0 by construction: k_j and k_{n-1-j} mirror exactly.
        double off = p.dk * (static_cast<double>(j) - 0.5 * static_cast<double>(n_samples - 1));
        p.k[j] = k0 + off;
        p.amplitude[j] = p.gaussian(p.k[j]);
    }
    p.k_first = p.k.front();
    return p;
}

// ---- scattering set -------------------------------------------------------

ScatteringSet::ScatteringSet(SpectralProfile profile, Barrier barrier, UnitSystem units, BasisMethod method,
                             int threads, std::span<const QuadratureNode> interior_nodes)
    : profile_(std::move(profile)), barrier_(std::move(barrier)), units_(units) {
    const std::size_t n = profile_.size();
    if (n == 0) throw std::invalid_argument("ScatteringSet: empty profile");
    std::vector<std::optional<StationaryTriple>> tmp(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) tmp[j].emplace(solve_stationary(barrier_, profile_.k[j], units_, method));
    });
    triples_.reserve(n);
    energies_.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        triples_.push_back(std::move(*tmp[j]));
        energies_.push_back(units_.energy(profile_.k[j]));
        const double w = profile_.weight[j] * std::norm(profile_.amplitude[j]);
        transmission_ += w * triples_[j].amplitudes().T;
        reflection_ += w * triples_[j].amplitudes().R;
    }
    v_min_ = units_.velocity(profile_.k.front());
    v_max_ = units_.velocity(profile_.k.back());
    outer_width_ = 3.0 * std::numbers::pi / profile_.k.back();

    // Interior panels: split at x_c and at every step, and keep
    // kappa * panel <= 8 where the field grows exponentially.
    if (!interior_nodes.empty()) {
        for (const auto& q : interior_nodes)
            if (!(q.x > barrier_.a() && q.x < barrier_.b()))
                throw std::invalid_argument("ScatteringSet: supplied interior node outside (a, b)");
        interior_.assign(interior_nodes.begin(), interior_nodes.end());
    } else {
        std::vector<double> breaks{barrier_.a(), barrier_.centre(), barrier_.b()};
        for (const auto& s : barrier_.steps())
            if (s.position > barrier_.a() && s.position < barrier_.b()) breaks.push_back(s.position);
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        const double kappa_max = std::sqrt(std::max(0.0, barrier_.scale() - energies_.front()) / units_.kinetic());
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double len = breaks[i + 1] - breaks[i];
            auto panels = static_cast<std::size_t>(
                std::max({1.0, std::ceil(len / outer_width_), std::ceil(kappa_max * len / 8.0)}));
            auto rule = panel_rule(breaks[i], breaks[i + 1], panels);
            interior_.insert(interior_.end(), rule.begin(), rule.end());
        }
    }
    table_.resize(interior_.size() * n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j)
            for (std::size_t i = 0; i < interior_.size(); ++i) table_[i * n + j] = triples_[j].basis().at(interior_[i].x);
    });
}

ScatteringSetPtr make_scattering_set(const SpectralProfile& profile, const Barrier& barrier, const UnitSystem& units,
                                     BasisMethod method, int threads, std::span<const QuadratureNode> interior_nodes) {
    return std::make_shared<const ScatteringSet>(profile, barrier, units, method, threads, interior_nodes);
}

// ---- evaluation -----------------------------------------------------------

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

cplx spectral_weight(const ScatteringSet& set, std::size_t j, double t) {
    const auto& p = set.profile();
    return p.weight[j] * p.amplitude[j] * std::polar(kInvSqrt2Pi, -set.energy(j) * t);
}

// Time-dependent coefficients of one field, per region and wavenumber.
struct FieldCoefficients {
    bool free = false;
    std::vector<cplx> left_in, left_out, u_left, v_left, u_right, v_right, right;
};

std::vector<FieldCoefficients> time_coefficients(const ScatteringSet& set, std::span<const Field> fields, double t) {
    const std::size_t n = set.size();
    std::vector<cplx> c(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = spectral_weight(set, j, t);
    std::vector<FieldCoefficients> out(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f) {
        auto& fc = out[f];
        if (fields[f] == Field::Free) {
            fc.free = true;
            fc.left_in = c;
            fc.left_out.assign(n, 0.0);
            continue;
        }
        for (auto* v : {&fc.left_in, &fc.left_out, &fc.u_left, &fc.v_left, &fc.u_right, &fc.v_right, &fc.right})
            v->resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const RegionCoefficients rc = set.triple(j).coefficients(fields[f]);
            fc.left_in[j] = c[j] * rc.left_in;
            fc.left_out[j] = c[j] * rc.left_out;
            fc.u_left[j] = c[j] * rc.u_left;
            fc.v_left[j] = c[j] * rc.v_left;
            fc.u_right[j] = c[j] * rc.u_right;
            fc.v_right[j] = c[j] * rc.v_right;
            fc.right[j] = c[j] * rc.right;
        }
    }
    return out;
}

// sum_j (in_j e^{i k_j x} + out_j e^{-i k_j x}) and its x-derivative, with the
// phasors generated by recurrence along the uniform grid.
void plane_sum(const SpectralProfile& p, double x, const std::vector<cplx>& in, const std::vector<cplx>* out,
               cplx& value, cplx* derivative) {
    const std::size_t n = p.size();
    const cplx step = std::polar(1.0, p.dk * x);
    cplx e;
    cplx v = 0.0, d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j % 128 == 0) {
            e = std::polar(1.0, p.k[j] * x);
        } else {
            e *= step;
        }
        cplx fwd = in[j] * e;
        cplx bwd = out ? (*out)[j] * std::conj(e) : cplx(0.0);
        v += fwd + bwd;
        if (derivative) d += p.k[j] * (fwd - bwd);
    }
    value = v;
    if (derivative) *derivative = cplx(0.0, 1.0) * d;
}

enum class Region { Left, LeftHalf, RightHalf, Right };

void sample_nodes(const ScatteringSet& set, const std::vector<FieldCoefficients>& coeffs, const SpatialGrid& grid,
                  bool derivatives, std::vector<FieldSamples>& out, int threads) {
    const std::size_t nn = grid.nodes.size();
    const std::size_t nk = set.size();
    const double a = set.barrier().a();
    const double xc = set.barrier().centre();
    out.assign(coeffs.size(), {});
    for (auto& fs : out) {
        fs.value.assign(nn, 0.0);
        if (derivatives) fs.derivative.assign(nn, 0.0);
    }
    parallel_for(nn, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double x = grid.nodes[i].x;
            const bool inside = i >= grid.interior_begin && i < grid.interior_end;
            const Region region = inside ? (x < xc ? Region::LeftHalf : Region::RightHalf)
                                         : (x < a ? Region::Left : Region::Right);
            for (std::size_t f = 0; f < coeffs.size(); ++f) {
                const auto& fc = coeffs[f];
                cplx v, d;
                cplx* dp = derivatives ? &d : nullptr;
                if (fc.free || region == Region::Left) {
                    plane_sum(set.profile(), x, fc.left_in, fc.free ? nullptr : &fc.left_out, v, dp);
                } else if (region == Region::Right) {
                    plane_sum(set.profile(), x, fc.right, nullptr, v, dp);
                } else {
                    const auto& cu = region == Region::LeftHalf ? fc.u_left : fc.u_right;
                    const auto& cv = region == Region::LeftHalf ? fc.v_left : fc.v_right;
                    const std::size_t node = i - grid.interior_begin;
                    v = d = 0.0;
                    for (std::size_t j = 0; j < nk; ++j) {
                        const BasisValues& b = set.interior_basis(node, j);
                        v += cu[j] * b.u + cv[j] * b.v;
                        if (derivatives) d += cu[j] * b.du + cv[j] * b.dv;
                    }
                }
                out[f].value[i] = v;
                if (derivatives) out[f].derivative[i] = d;
            }
        }
    });
}

FieldPoint evaluate_set(const ScatteringSet& set, Field which, double x, double t, Side side) {
    FieldPoint sum{0.0, 0.0};
    for (std::size_t j = 0; j < set.size(); ++j) {
        const cplx c = spectral_weight(set, j, t);
        FieldPoint p = set.triple(j).eval(which, x, side);
        sum.value += c * p.value;
        sum.derivative += c * p.derivative;
    }
    return sum;
}

}  // namespace

FieldPoint evaluate_packet(const PacketField& field, double x, double t, Side side) {
    return evaluate_set(*field.set, field.which, x, t, side);
}

SpatialGrid spatial_grid(const ScatteringSet& set, double x_lo, double x_hi) {
    SpatialGrid g;
    const double a = set.barrier().a();
    const double b = set.barrier().b();
    const double h = set.outer_panel_width();
    const auto n_left = static_cast<std::size_t>(std::max(0.0, std::ceil((a - x_lo) / h)));
    const auto n_right = static_cast<std::size_t>(std::max(0.0, std::ceil((x_hi - b) / h)));
    g.nodes.reserve(32 * (n_left + n_right) + set.interior().size());
    for (std::size_t p = n_left; p >= 1; --p)
        append_panel(g.nodes, a - static_cast<double>(p) * h, a - static_cast<double>(p - 1) * h);
    g.interior_begin = g.nodes.size();
    g.nodes.insert(g.nodes.end(), set.interior().begin(), set.interior().end());
    g.interior_end = g.nodes.size();
    for (std::size_t p = 0; p < n_right; ++p)
        append_panel(g.nodes, b + static_cast<double>(p) * h, b + static_cast<double>(p + 1) * h);
    return g;
}

std::vector<FieldSamples> sample_grid(const ScatteringSet& set, std::span<const Field> fields, const SpatialGrid& grid,
                                      double t, bool derivatives, int threads) {
    const std::size_t n_in = grid.interior_end - grid.interior_begin;
    if (grid.interior_end < grid.interior_begin || grid.interior_end > grid.nodes.size() ||
        n_in != set.interior().size())
        throw std::invalid_argument("sample_grid: grid interior does not match the set");
    for (std::size_t i = 0; i < n_in; ++i)
        if (grid.nodes[grid.interior_begin + i].x != set.interior()[i].x)
            throw std::invalid_argument("sample_grid: grid interior does not match the set");
    std::vector<FieldSamples> out;
    sample_nodes(set, time_coefficients(set, fields, t), grid, derivatives, out, threads);
    return out;
}

Snapshot interior_snapshot(const ScatteringSet& set, std::span<const Field> fields, double t, bool derivatives,
                           int threads) {
    Snapshot s;
    s.t = t;
    s.grid.nodes = set.interior();
    s.grid.interior_begin = 0;
    s.grid.interior_end = s.grid.nodes.size();
    sample_nodes(set, time_coefficients(set, fields, t), s.grid, derivatives, s.fields, threads);
    return s;
}

Snapshot snapshot(const ScatteringSet& set, std::span<const Field> fields, double t, bool derivatives, int threads) {
    const double a = set.barrier().a();
    const double b = set.barrier().b();
    const double pad = 12.0 * set.profile().l0 + set.outer_panel_width();
    const double v1 = set.min_velocity() * t;
    const double v2 = set.max_velocity() * t;
    double x_lo = std::min({0.0, v1, v2, 2.0 * a - v1, 2.0 * a - v2}) - pad;
    double x_hi = std::max({0.0, v1, v2, b}) + pad;
    const double period = 2.0 * std::numbers::pi / set.profile().dk;
    const double edge = set.profile().edge_ratio();
    const double threshold = std::max(1e-12, 10.0 * edge * edge);
    const auto coeffs = time_coefficients(set, fields, t);

    for (int attempt = 0; attempt < 8; ++attempt) {
        if (x_hi - x_lo > 0.5 * period) {
            std::ostringstream msg;
            msg << "snapshot: domain [" << x_lo << ", " << x_hi << "] at t = " << t
                << " exceeds half the k-grid period " << period << "; increase n_samples";
            throw NumericalError(msg.str());
        }
        Snapshot s;
        s.t = t;
        s.grid = spatial_grid(set, x_lo, x_hi);
        sample_nodes(set, coeffs, s.grid, derivatives, s.fields, threads);
        const std::size_t nn = s.grid.nodes.size();
        auto density = [&](std::size_t i) {
            double d = 0.0;
            for (const auto& fs : s.fields) d += std::norm(fs.value[i]);
            return d;
        };
        double peak = 0.0;
        for (std::size_t i = 0; i < nn; ++i) peak = std::max(peak, density(i));
        double left = 0.0, right = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(32, nn); ++i) {
            left = std::max(left, density(i));
            right = std::max(right, density(nn - 1 - i));
        }
        const bool left_ok = left <= threshold * peak || s.grid.interior_begin == 0;
        const bool right_ok = right <= threshold * peak || s.grid.interior_end == nn;
        if ((left_ok && right_ok) || peak == 0.0) return s;
        const double grow = 0.5 * (x_hi - x_lo);
        if (!left_ok) x_lo -= grow;
        if (!right_ok) x_hi += grow;
    }
    std::ostringstream msg;
    msg << "snapshot: density at the domain ends stays above " << threshold << " of the peak at t = " << t
        << "; suggested domain [" << x_lo << ", " << x_hi << "] or a wider profile grid";
    throw NumericalError(msg.str());
}

ExpectationSeries expectation_series(const PacketField& field, std::span<const double> times, bool with_momentum,
                                     int threads) {
    ExpectationSeries out;
    out.field = field.which;
    const Field which[] = {field.which};
    for (double t : times) {
        Snapshot s = snapshot(*field.set, which, t, with_momentum, threads);
        double nrm = 0.0, xm = 0.0, pm = 0.0;
        const auto& fs = s.fields[0];
        for (std::size_t i = 0; i < s.grid.nodes.size(); ++i) {
            const auto& q = s.grid.nodes[i];
            const double rho = std::norm(fs.value[i]);
            nrm += q.w * rho;
            xm += q.w * q.x * rho;
            if (with_momentum) pm += q.w * std::imag(std::conj(fs.value[i]) * fs.derivative[i]);
        }
        out.times.push_back(t);
        out.norm.push_back(nrm);
        out.x_mean.push_back(xm / nrm);
        if (with_momentum) out.p_mean.push_back(UnitSystem::hbar * pm / nrm);
    }
    return out;
}

NormSeries packet_norm_series(const ScatteringSet& set, std::span<const double> times, int threads) {
    NormSeries out;
    out.R_spectral = set.reflection();
    out.T_spectral = 1.0 - out.R_spectral;
    const Field fields[] = {Field::Full, Field::Transmitted, Field::Reflected};
    for (double t : times) {
        Snapshot s = snapshot(set, fields, t, false, threads);
        double full = 0.0, tr = 0.0, ref = 0.0, cross = 0.0;
        for (std::size_t i = 0; i < s.grid.nodes.size(); ++i) {
            const double w = s.grid.nodes[i].w;
            full += w * std::norm(s.fields[0].value[i]);
            tr += w * std::norm(s.fields[1].value[i]);
            ref += w * std::norm(s.fields[2].value[i]);
            cross += w * std::real(std::conj(s.fields[1].value[i]) * s.fields[2].value[i]);
        }
        out.times.push_back(t);
        out.full_norm.push_back(full);
        out.T.push_back(tr);
        out.R.push_back(ref);
        out.cross.push_back(cross);
        out.max_deviation = std::max(out.max_deviation, std::abs(tr - out.T_spectral));
        out.max_R_drift = std::max(out.max_R_drift, std::abs(ref - out.R_spectral));
    }
    return out;
}

double packet_momentum(const ScatteringSet& set, Field field, double t, int threads) {
    const Field which[] = {field};
    Snapshot s = snapshot(set, which, t, true, threads);
    double p = 0.0;
    for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
        p += s.grid.nodes[i].w * std::imag(std::conj(s.fields[0].value[i]) * s.fields[0].derivative[i]);
    return UnitSystem::hbar * p;
}

EhrenfestTerms ehrenfest_balance(const ScatteringSet& set, Field field, double t, double dt, int threads) {
    if (field != Field::Transmitted && field != Field::Reflected)
        throw std::invalid_argument("ehrenfest_balance: field must be transmitted or reflected");
    const Barrier& bar = set.barrier();
    const UnitSystem& u = set.units();
    if (dt <= 0.0) dt = 1e-3 * u.mass_over_hbar() * bar.width() / set.profile().k0;

    EhrenfestTerms out;
    out.t = t;
    auto central = [&](double h) {
        return (packet_momentum(set, field, t + h, threads) - packet_momentum(set, field, t - h, threads)) / (2.0 * h);
    };
    const double d1 = central(dt);
    const double d2 = central(0.5 * dt);
    out.lhs = (4.0 * d2 - d1) / 3.0;

    double force = 0.0;
    for (const auto& step : bar.steps()) force -= step.jump * std::norm(evaluate_set(set, field, step.position, t, Side::Right).value);
    if (bar.kind() == BarrierKind::Sampled) {
        const Field which[] = {field};
        Snapshot s = interior_snapshot(set, which, t, false, threads);
        for (std::size_t i = 0; i < s.grid.nodes.size(); ++i)
            force -= s.grid.nodes[i].w * bar.smooth_derivative(s.grid.nodes[i].x) * std::norm(s.fields[0].value[i]);
    }
    out.force = force;

    const double beta = u.kinetic();
    const double xc = bar.centre();
    const cplx dl = evaluate_set(set, field, xc, t, Side::Left).derivative;
    if (field == Field::Transmitted) {
        const cplx dr = evaluate_set(set, field, xc, t, Side::Right).derivative;
        out.boundary = beta * (std::norm(dr) - std::norm(dl));
    } else {
        out.boundary = -beta * std::norm(dl);
    }
    out.residual = out.lhs - out.force - out.boundary;
    return out;
}

}  // namespace subscat
