#include "subscat/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

namespace subscat {

namespace {

constexpr std::size_t kSymmetryGrid = 1001;

void check_interval(double a, double b) {
    if (!(a > 0.0))
        throw std::invalid_argument("barrier: left edge a must be positive, got " + std::to_string(a));
    if (!(b > a))
        throw std::invalid_argument("barrier: requires a < b");
}

}  // namespace

struct Barrier::Data {
    BarrierKind kind = BarrierKind::Rectangular;
    double a = 0.0;
    double b = 0.0;
    double centre = 0.0;
    double offset = 0.0;
    std::vector<Segment> segments;
    std::vector<double> edges;  // segment left edges, plus b
    std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;
    std::vector<PotentialStep> steps;
    double scale = 0.0;
    SymmetryReport symmetry;

    double value(double x) const {
        if (x < a || x > b) return 0.0;
        switch (kind) {
        case BarrierKind::Rectangular:
            return segments.front().height;
        case BarrierKind::PiecewiseConstant: {
            auto it = std::upper_bound(edges.begin(), edges.end() - 1, x);
            std::size_t idx = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
            return segments[std::min(idx, segments.size() - 1)].height;
        }
        case BarrierKind::Sampled:
            return (*spline)(x) + offset;
        }
        return 0.0;
    }
};

Barrier::Barrier(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

Barrier Barrier::finish(std::shared_ptr<Data> d) {
    d->centre = 0.5 * (d->a + d->b);
    d->steps.clear();
    if (d->kind == BarrierKind::Sampled) {
        double left = (*d->spline)(d->a) + d->offset;
        double right = (*d->spline)(d->b) + d->offset;
        if (left != 0.0) d->steps.push_back({d->a, left});
        if (right != 0.0) d->steps.push_back({d->b, -right});
        double s = 0.0;
        for (std::size_t i = 0; i <= 2000; ++i) {
            double x = d->a + (d->b - d->a) * static_cast<double>(i) / 2000.0;
            s = std::max(s, std::abs(d->value(x)));
        }
        d->scale = s;
    } else {
        d->edges.clear();
        double x = d->a;
        double prev = 0.0;
        double s = 0.0;
        for (const auto& seg : d->segments) {
            d->edges.push_back(x);
            if (seg.height != prev) d->steps.push_back({x, seg.height - prev});
            prev = seg.height;
            x += seg.width;
            s = std::max(s, std::abs(seg.height));
        }
        d->edges.push_back(d->b);
        if (prev != 0.0) d->steps.push_back({d->b, -prev});
        d->scale = s;
    }
    Barrier out{std::shared_ptr<const Data>(d)};
    if (d->kind == BarrierKind::Sampled) {
        d->symmetry = validate_symmetry(out, kSymmetryGrid);
    } else {
        // Point samples can land on a slab edge, so compare the mirrored slab list.
        const auto& segs = d->segments;
        const std::size_t n = segs.size();
        double worst = 0.0;
        bool widths_match = true;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(segs[i].height - segs[n - 1 - i].height));
            widths_match = widths_match && std::abs(segs[i].width - segs[n - 1 - i].width) <= 1e-12 * (d->b - d->a);
        }
        if (!widths_match) worst = std::max(worst, d->scale);
        d->symmetry = {worst <= 1e-12 * std::max(d->scale, 1.0), worst};
    }
    return out;
}

BarrierKind Barrier::kind() const { return data_->kind; }
double Barrier::a() const { return data_->a; }
double Barrier::b() const { return data_->b; }
double Barrier::centre() const { return data_->centre; }
double Barrier::width() const { return data_->b - data_->a; }
double Barrier::scale() const { return data_->scale; }
double Barrier::operator()(double x) const { return data_->value(x); }
std::span<const PotentialStep> Barrier::steps() const { return data_->steps; }
bool Barrier::symmetric() const { return data_->symmetry.symmetric; }
double Barrier::max_asymmetry() const { return data_->symmetry.max_asymmetry; }

double Barrier::height() const {
    if (data_->kind == BarrierKind::Rectangular) return data_->segments.front().height;
    return data_->scale;
}

std::span<const Segment> Barrier::segments() const {
    if (data_->kind == BarrierKind::Sampled) return {};
    return data_->segments;
}

double Barrier::smooth_derivative(double x) const {
    if (data_->kind != BarrierKind::Sampled || x <= data_->a || x >= data_->b) return 0.0;
    return data_->spline->prime(x);
}

Barrier Barrier::shifted(double offset) const {
    auto d = std::make_shared<Data>(*data_);
    if (d->kind == BarrierKind::Sampled) {
        d->offset += offset;
    } else {
        for (auto& seg : d->segments) seg.height += offset;
    }
    return finish(std::move(d));
}

Barrier make_rectangular(double a, double b, double height) {
    check_interval(a, b);
    if (!std::isfinite(height)) throw std::invalid_argument("barrier: height must be finite");
    auto d = std::make_shared<Barrier::Data>();
    d->kind = BarrierKind::Rectangular;
    d->a = a;
    d->b = b;
    d->segments = {{b - a, height}};
    return Barrier::finish(std::move(d));
}

Barrier make_piecewise(double a, std::vector<Segment> segments) {
    if (segments.empty()) throw std::invalid_argument("barrier: piecewise profile needs at least one segment");
    double width = 0.0;
    for (const auto& s : segments) {
        if (!(s.width > 0.0) || !std::isfinite(s.height))
            throw std::invalid_argument("barrier: segment widths must be positive and heights finite");
        width += s.width;
    }
    check_interval(a, a + width);
    auto d = std::make_shared<Barrier::Data>();
    d->kind = BarrierKind::PiecewiseConstant;
    d->a = a;
    d->b = a + width;
    d->segments = std::move(segments);
    return Barrier::finish(std::move(d));
}

Barrier make_sampled(double a, double b, std::vector<double> samples) {
    check_interval(a, b);
    if (samples.size() < 4) throw std::invalid_argument("barrier: sampled profile needs at least 4 samples");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("barrier: sampled profile contains non-finite values");
    auto d = std::make_shared<Barrier::Data>();
    d->kind = BarrierKind::Sampled;
    d->a = a;
    d->b = b;
    double h = (b - a) / static_cast<double>(samples.size() - 1);
    d->spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        samples.begin(), samples.end(), a, h, 0.0, 0.0);
    return Barrier::finish(std::move(d));
}

Barrier make_sampled(double a, double b, const std::function<double(double)>& profile, std::size_t n_samples) {
    check_interval(a, b);
    if (n_samples < 4) throw std::invalid_argument("barrier: sampled profile needs at least 4 samples");
    std::vector<double> samples(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        // Mirror-symmetric abscissae so that an even profile yields exactly even samples.
        double s = (b - a) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        double x = (2 * i < n_samples) ? a + s : b - (b - a) * static_cast<double>(n_samples - 1 - i) /
                                                          static_cast<double>(n_samples - 1);
        samples[i] = profile(x);
    }
    return make_sampled(a, b, std::move(samples));
}

SymmetryReport validate_symmetry(const Barrier& barrier, std::size_t n_samples) {
    if (n_samples < 2) throw std::invalid_argument("validate_symmetry: need at least 2 samples");
    const double xc = barrier.centre();
    const double half = 0.5 * barrier.width();
    double worst = 0.0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double s = half * (static_cast<double>(i) + 0.5) / static_cast<double>(n_samples);
        double right = barrier(xc + s);
        double left = barrier(xc - s);
        worst = std::max(worst, std::abs(right - left));
        vmax = std::max({vmax, std::abs(right), std::abs(left)});
    }
    return {worst <= 1e-12 * std::max(vmax, 1.0), worst};
}

}  // namespace subscat
