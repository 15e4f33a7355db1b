#pragma once

// Entire functions of w = z * s^2 used to write the slab solutions without
// dividing by the decay constant. With X = sqrt(w):
//   sinhc(w)       = sinh(X) / X            (sin(|X|)/|X| for w < 0)
//   cosh_sqrt(w)   = cosh(X)                (cos(|X|) for w < 0)
//   sinhc_m1(w)    = (sinhc(w) - 1) / w
//   cosh_sinhc(w)  = (cosh_sqrt(w) - sinhc(w)) / w
// All are smooth through w = 0, where the power series is used.

namespace subscat::special {

double sinhc(double w);
double cosh_sqrt(double w);
double sinhc_m1(double w);
double cosh_sinhc(double w);

// Same functions multiplied by exp(-sqrt(w)) for w > 0, finite for any w.
double sinhc_scaled(double w);
double cosh_sqrt_scaled(double w);

}  // namespace subscat::special
