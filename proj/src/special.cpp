#include "perfospec/special.hpp"

#include <cmath>
#include <limits>

#include "perfospec/errors.hpp"

namespace perfospec {

namespace {

constexpr long double kEulerGamma = 0.57721566490153286060651209008240243L;
constexpr long double kPi = 3.14159265358979323846264338327950288L;

// Crossover between the ascending series and the Hankel asymptotic series.
// Chosen so the asymptotic optimal-truncation error e^{-2x} is below 1e-13
// while series cancellation stays within long double headroom.
constexpr double kSeriesLimit = 15.0;

// J0 ascending series, |x| <= kSeriesLimit.
long double j0_series(long double x) {
  const long double q = x * x / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-24L * std::abs(sum) + 1e-38L) break;
  }
  return sum;
}

long double j1_series(long double x) {
  const long double q = x * x / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-24L * std::abs(sum) + 1e-38L) break;
  }
  return (x / 2.0L) * sum;
}

// Y0 = (2/pi)[(ln(x/2)+gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2]
long double y0_series(long double x) {
  const long double q = x * x / 4.0L;
  long double term = 1.0L;  // q^k/(k!)^2
  long double hk = 0.0L;
  long double sum = 0.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    hk += 1.0L / k;
    const long double add = ((k & 1) ? 1.0L : -1.0L) * hk * term;
    sum += add;
    if (std::abs(add) < 1e-24L * (std::abs(sum) + 1.0L)) break;
  }
  return (2.0L / kPi) * ((std::log(x / 2.0L) + kEulerGamma) * j0_series(x) + sum);
}

// Y1 = (2/pi) ln(x/2) J1 - 2/(pi x)
//      - (1/pi) sum_{k>=0} (-1)^k [psi(k+1)+psi(k+2)] (x/2)^{2k+1} / (k!(k+1)!)
long double y1_series(long double x) {
  const long double q = x * x / 4.0L;
  const long double half = x / 2.0L;
  long double pow_term = half;  // (x/2)^{2k+1} / (k!(k+1)!)
  long double hk = 0.0L;        // H_k
  long double hk1 = 1.0L;       // H_{k+1}
  long double sum = 0.0L;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      pow_term *= -q / (static_cast<long double>(k) * (k + 1));
      hk += 1.0L / k;
      hk1 += 1.0L / (k + 1);
    }
    const long double psi_sum = -2.0L * kEulerGamma + hk + hk1;
    const long double add = pow_term * psi_sum;
    sum += add;
    if (std::abs(add) < 1e-24L * (std::abs(sum) + 1.0L) && k > 2) break;
  }
  return (2.0L / kPi) * std::log(half) * j1_series(x) - 2.0L / (kPi * x) - sum / kPi;
}

// Hankel asymptotic: P, Q series with optimal truncation.
// t_k = prod_{j<=k} (4n^2-(2j-1)^2) / (k! (8x)^k);  P = sum (-1)^m t_{2m},
// Q = sum (-1)^m t_{2m+1}.
void hankel_pq(int n, long double x, long double& p, long double& q) {
  const long double mu = 4.0L * n * n;
  long double t = 1.0L;
  p = 1.0L;
  q = 0.0L;
  long double prev = std::numeric_limits<long double>::max();
  for (int k = 1; k < 60; ++k) {
    const long double num = mu - (2.0L * k - 1.0L) * (2.0L * k - 1.0L);
    t *= num / (k * 8.0L * x);
    if (std::abs(t) >= prev) break;  // divergence onset; stop at smallest term
    prev = std::abs(t);
    const int m = k / 2;
    const long double sgn = (m & 1) ? -1.0L : 1.0L;
    if (k & 1) {
      q += sgn * t;
    } else {
      p += sgn * t;
    }
  }
}

long double bessel_asymptotic(int n, int kind, long double x) {
  long double p, q;
  hankel_pq(n, x, p, q);
  const long double omega = x - (2 * n + 1) * kPi / 4.0L;
  const long double amp = std::sqrt(2.0L / (kPi * x));
  const long double c = std::cos(omega);
  const long double s = std::sin(omega);
  return kind == 0 ? amp * (p * c - q * s) : amp * (p * s + q * c);
}

}  // namespace

double bessel_j0(double x) {
  const long double ax = std::abs(static_cast<long double>(x));
  if (ax <= kSeriesLimit) return static_cast<double>(j0_series(ax));
  return static_cast<double>(bessel_asymptotic(0, 0, ax));
}

double bessel_j1(double x) {
  const long double lx = static_cast<long double>(x);
  const long double ax = std::abs(lx);
  const long double v = ax <= kSeriesLimit ? j1_series(ax) : bessel_asymptotic(1, 0, ax);
  return static_cast<double>(lx < 0 ? -v : v);
}

double bessel_y0(double x) {
  if (!(x > 0)) throw Error("bessel_y0: argument must be positive");
  const long double lx = static_cast<long double>(x);
  if (lx <= kSeriesLimit) return static_cast<double>(y0_series(lx));
  return static_cast<double>(bessel_asymptotic(0, 1, lx));
}

double bessel_y1(double x) {
  if (!(x > 0)) throw Error("bessel_y1: argument must be positive");
  const long double lx = static_cast<long double>(x);
  if (lx <= kSeriesLimit) return static_cast<double>(y1_series(lx));
  return static_cast<double>(bessel_asymptotic(1, 1, lx));
}

double bessel_j2(double x) {
  if (x == 0.0) return 0.0;
  return 2.0 * bessel_j1(x) / x - bessel_j0(x);
}

double find_root_bisect(const std::function<double(double)>& f, double a, double b,
                        double rel_tol) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw RootNotBracketed("find_root_bisect: no sign change");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a <= rel_tol * std::abs(mid)) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (fa > 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

namespace {

// Zero via McMahon first guess, bracket widening, then bisection.
double bessel_zero(const std::function<double(double)>& f, double approx) {
  double lo = approx - 0.4;
  double hi = approx + 0.4;
  double flo = f(lo);
  double fhi = f(hi);
  for (int widen = 0; widen < 8 && (flo > 0) == (fhi > 0); ++widen) {
    lo -= 0.2;
    hi += 0.2;
    flo = f(lo);
    fhi = f(hi);
  }
  return find_root_bisect(f, lo, hi, 1e-14);
}

}  // namespace

double bessel_j0_zero(int k) {
  const double b = (k - 0.25) * M_PI;
  const double approx = b + 1.0 / (8 * b) - 124.0 / (3 * 384 * b * b * b);
  return bessel_zero([](double x) { return bessel_j0(x); }, approx);
}

double bessel_j1_zero(int k) {
  const double b = (k + 0.25) * M_PI;
  const double approx = b - 3.0 / (8 * b);
  return bessel_zero([](double x) { return bessel_j1(x); }, approx);
}

double bessel_j2_zero(int k) {
  const double b = (k + 0.75) * M_PI;
  const double approx = b - 15.0 / (8 * b);
  return bessel_zero([](double x) { return bessel_j2(x); }, approx);
}

}  // namespace perfospec
