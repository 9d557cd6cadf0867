#pragma once

#include <functional>

namespace perfospec {

/// Bessel functions of the first and second kind, orders 0 and 1.
/// Ascending series below the crossover argument, Hankel asymptotic series
/// with optimal truncation above it; long double accumulation throughout.
/// Absolute accuracy is ~5e-13 or better over (0, 1e3].
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);  // requires x > 0
double bessel_y1(double x);  // requires x > 0

/// J2 via the three-term recurrence.
double bessel_j2(double x);

/// k-th positive zero of J0 / J1 / J2 (k >= 1), to ~1e-13 relative.
double bessel_j0_zero(int k);
double bessel_j1_zero(int k);
double bessel_j2_zero(int k);

/// Bisection on a sign change; a and b must bracket a root.
/// Throws RootNotBracketed otherwise. Tolerance is relative to |root|.
double find_root_bisect(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-13);

}  // namespace perfospec
