#include "subscat/special.hpp"

#include <cmath>

namespace subscat::special {

namespace {

constexpr double kSeriesRadius = 1.0;
constexpr int kSeriesTerms = 24;

// sum_n w^n / (2n + first)!
double series(double w, int first) {
    double term = 1.0;
    for (int i = 2; i <= first; ++i) term /= i;
    double sum = term;
    for (int n = 1; n < kSeriesTerms; ++n) {
        double m = 2.0 * n + first;
        term *= w / ((m - 1.0) * m);
        sum += term;
    }
    return sum;
}

}  // namespace

double sinhc(double w) {
    if (std::abs(w) < kSeriesRadius) return series(w, 1);
    if (w > 0) {
        double x = std::sqrt(w);
        return std::sinh(x) / x;
    }
    double x = std::sqrt(-w);
    return std::sin(x) / x;
}

double cosh_sqrt(double w) {
    if (w >= 0) return std::cosh(std::sqrt(w));
    return std::cos(std::sqrt(-w));
}

double sinhc_m1(double w) {
    if (std::abs(w) < kSeriesRadius) return series(w, 3);
    return (sinhc(w) - 1.0) / w;
}

double cosh_sinhc(double w) {
    if (std::abs(w) < kSeriesRadius) {
        // sum_n (2n + 2) w^n / (2n + 3)!
        double term = 1.0 / 6.0;  // w^n / (2n+3)!
        double sum = 2.0 * term;
        for (int n = 1; n < kSeriesTerms; ++n) {
            double m = 2.0 * n + 3.0;
            term *= w / ((m - 1.0) * m);
            sum += (2.0 * n + 2.0) * term;
        }
        return sum;
    }
    return (cosh_sqrt(w) - sinhc(w)) / w;
}

double sinhc_scaled(double w) {
    if (w <= 0) return sinhc(w);
    double x = std::sqrt(w);
    return -std::expm1(-2.0 * x) / (2.0 * x);
}

double cosh_sqrt_scaled(double w) {
    if (w <= 0) return cosh_sqrt(w);
    double x = std::sqrt(w);
    return 0.5 * (1.0 + std::exp(-2.0 * x));
}

}  // namespace subscat::special
