#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace subscat {

// A constant-height slab of a piecewise-constant barrier, listed left to right.
struct Segment {
    double width;
    double height;
};

// Jump V(x+0) - V(x-0) of the potential at `position`.
struct PotentialStep {
    double position;
    double jump;
};

enum class BarrierKind { Rectangular, PiecewiseConstant, Sampled };

struct SymmetryReport {
    bool symmetric = false;
    double max_asymmetry = 0.0;
};

// Symmetric potential V(x) supported on [a, b], a > 0. V vanishes identically
// outside [a, b]. Immutable; copies share the underlying profile.
class Barrier {
public:
    BarrierKind kind() const;
    double a() const;
    double b() const;
    double centre() const;
    double width() const;

    // Height of a rectangular barrier; max |V| for the other kinds.
    double height() const;
    double scale() const;

    double operator()(double x) const;
    // dV/dx away from the steps (zero for piecewise-constant barriers).
    double smooth_derivative(double x) const;
    std::span<const PotentialStep> steps() const;
    // Slabs for rectangular and piecewise-constant barriers; empty for sampled ones.
    std::span<const Segment> segments() const;

    // The same barrier with V(x) + offset on [a, b].
    Barrier shifted(double offset) const;

    bool symmetric() const;
    double max_asymmetry() const;

private:
    struct Data;
    explicit Barrier(std::shared_ptr<const Data> data);
    std::shared_ptr<const Data> data_;

    friend Barrier make_rectangular(double, double, double);
    friend Barrier make_piecewise(double, std::vector<Segment>);
    friend Barrier make_sampled(double, double, std::vector<double>);
    static Barrier finish(std::shared_ptr<Data> data);
};

// Throws std::invalid_argument unless 0 < a < b.
Barrier make_rectangular(double a, double b, double height);
Barrier make_piecewise(double a, std::vector<Segment> segments);
// Uniform samples on [a, b] (first at a, last at b), interpolated with a
// cubic spline whose end slopes are clamped to zero.
Barrier make_sampled(double a, double b, std::vector<double> samples);
Barrier make_sampled(double a, double b, const std::function<double(double)>& profile,
                     std::size_t n_samples = 513);

// max_s |V(x_c + s) - V(x_c - s)| over n_samples points of (0, d/2), compared
// against 1e-12 * max(|V|, 1).
SymmetryReport validate_symmetry(const Barrier& barrier, std::size_t n_samples);

}  // namespace subscat
