#include "subscat/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace subscat {

void append_panel(std::vector<QuadratureNode>& out, double lo, double hi) {
    using Rule = boost::math::quadrature::gauss<double, 32>;
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    // The rule stores the 16 non-negative abscissae; emit nodes left to right.
    for (std::size_t i = xs.size(); i-- > 0;) out.push_back({mid - half * xs[i], half * ws[i]});
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({mid + half * xs[i], half * ws[i]});
}

std::vector<QuadratureNode> panel_rule(double lo, double hi, std::size_t n_panels) {
    std::vector<QuadratureNode> out;
    out.reserve(32 * n_panels);
    for (std::size_t p = 0; p < n_panels; ++p) {
        double l = lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(n_panels);
        double h = p + 1 == n_panels ? hi : lo + (hi - lo) * static_cast<double>(p + 1) / static_cast<double>(n_panels);
        append_panel(out, l, h);
    }
    return out;
}

}  // namespace subscat
