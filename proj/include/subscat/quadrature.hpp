#pragma once

#include <cstddef>
#include <vector>

namespace subscat {

struct QuadratureNode {
    double x;
    double w;
};

// 32-point Gauss-Legendre rule on [lo, hi] appended to `out`.
void append_panel(std::vector<QuadratureNode>& out, double lo, double hi);

// `n_panels` equal panels covering [lo, hi].
std::vector<QuadratureNode> panel_rule(double lo, double hi, std::size_t n_panels);

}  // namespace subscat
