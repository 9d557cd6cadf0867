#include "perfospec/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "perfospec/errors.hpp"
#include "perfospec/special.hpp"

namespace perfospec {

namespace {
// relative gap below which a mode is treated as non-simple
constexpr double kSimplicityGap = 1e-6;

void require_simple(const UnperturbedData& data, const char* who) {
  if (!(data.mu > 0.0)) throw Error(std::string(who) + ": mu must be positive");
  if (!(data.gap > kSimplicityGap * data.mu)) {
    throw DegenerateMode(std::string(who) + ": relative eigenvalue gap below 1e-6");
  }
}
}  // namespace

double coefficient(const UnperturbedData& data, double area_E) {
  require_simple(data, "coefficient");
  if (!(area_E > 0.0)) throw Error("coefficient: area_E must be positive");
  const double g2 = data.grad_at_center.norm2();
  const double p = data.phi_at_center;
  return (2.0 * g2 - data.mu * p * p) * area_E;
}

double predict(const UnperturbedData& data, double area_E, double eps) {
  if (eps < 0.0) throw Error("predict: eps must be nonnegative");
  return data.mu - coefficient(data, area_E) * eps * eps;
}

Prediction make_prediction(const UnperturbedData& data, double area_E) {
  return Prediction{data.mu, coefficient(data, area_E)};
}

UnperturbedData rectangle_mode(double a, double b, int m, int n, const Vec2& center) {
  if (a <= 0.0 || b <= 0.0) throw Error("rectangle_mode: sides must be positive");
  if (m < 1 || n < 1) throw Error("rectangle_mode: mode indices start at 1");
  if (center.x <= 0.0 || center.x >= a || center.y <= 0.0 || center.y >= b) {
    throw Error("rectangle_mode: center must be strictly interior");
  }
  auto lattice_mu = [&](int mm, int nn) {
    return std::numbers::pi * std::numbers::pi * (mm * mm / (a * a) + nn * nn / (b * b));
  };
  const double mu = lattice_mu(m, n);

  double gap = std::numeric_limits<double>::max();
  const int span = std::max(m, n) + 12;
  for (int mm = 1; mm <= span; ++mm) {
    for (int nn = 1; nn <= span; ++nn) {
      if (mm == m && nn == n) continue;
      gap = std::min(gap, std::abs(lattice_mu(mm, nn) - mu));
    }
  }
  if (gap <= 1e-9 * mu) {
    throw DegenerateMode("rectangle_mode: another lattice mode matches mu");
  }

  const double norm = 2.0 / std::sqrt(a * b);
  const double sx = std::sin(m * std::numbers::pi * center.x / a);
  const double cx = std::cos(m * std::numbers::pi * center.x / a);
  const double sy = std::sin(n * std::numbers::pi * center.y / b);
  const double cy = std::cos(n * std::numbers::pi * center.y / b);

  UnperturbedData d;
  d.mu = mu;
  d.phi_at_center = norm * sx * sy;
  d.grad_at_center = {norm * (m * std::numbers::pi / a) * cx * sy,
                      norm * (n * std::numbers::pi / b) * sx * cy};
  d.gap = gap;
  d.source = UnperturbedData::Source::Analytic;
  return d;
}

UnperturbedData disk_radial_mode(double R, int k) {
  if (R <= 0.0) throw Error("disk_radial_mode: R must be positive");
  if (k < 1) throw Error("disk_radial_mode: k starts at 1");
  const double j0k = bessel_j0_zero(k);
  const double mu = (j0k / R) * (j0k / R);

  // neighbors: radial j_{0,l} and angular j_{1,l}, j_{2,l} modes
  double gap = std::numeric_limits<double>::max();
  for (int l = 1; l <= k + 2; ++l) {
    for (const double z : {bessel_j0_zero(l), bessel_j1_zero(l), bessel_j2_zero(l)}) {
      const double other = (z / R) * (z / R);
      if (std::abs(other - mu) > 1e-12 * mu) gap = std::min(gap, std::abs(other - mu));
    }
  }

  UnperturbedData d;
  d.mu = mu;
  d.phi_at_center = 1.0 / (std::sqrt(std::numbers::pi) * R * std::abs(bessel_j1(j0k)));
  d.grad_at_center = {0.0, 0.0};  // radial symmetry
  d.gap = gap;
  d.source = UnperturbedData::Source::Analytic;
  return d;
}

double annulus_neumann_inner_eigenvalue(double R, double eps, int k) {
  if (!(eps > 0.0 && eps < R)) throw Error("annulus eigenvalue: need 0 < eps < R");
  if (k < 1) throw Error("annulus eigenvalue: k starts at 1");
  auto f = [&](double kappa) {
    return bessel_j0(kappa * R) * bessel_y1(kappa * eps) -
           bessel_y0(kappa * R) * bessel_j1(kappa * eps);
  };
  // scan for the k-th sign change; roots are ~pi/(R - eps) apart
  const double step = std::numbers::pi / (R - eps) / 40.0;
  double lo = 0.5 * step;
  double flo = f(lo);
  int found = 0;
  for (int it = 0; it < 400000; ++it) {
    const double hi = lo + step;
    const double fhi = f(hi);
    if ((flo > 0) != (fhi > 0)) {
      ++found;
      if (found == k) {
        const double kappa = find_root_bisect(f, lo, hi, 1e-13);
        return kappa * kappa;
      }
    }
    lo = hi;
    flo = fhi;
  }
  throw RootNotBracketed("annulus eigenvalue: root scan exhausted");
}

double reciprocal_expansion(const UnperturbedData& data, double M, double eps) {
  if (eps < 0.0) throw Error("reciprocal_expansion: eps must be nonnegative");
  require_simple(data, "reciprocal_expansion");
  const double mu = data.mu;
  const double lambda1 = data.phi_at_center * data.phi_at_center / (mu * mu);  // |K phi(w)|^2
  const double lambda2 = data.grad_at_center.norm2() / (mu * mu);
  const double em2 = (eps * M) * (eps * M);
  // lambda(eps) = mu^{-1} + g(eps) lambda1 + h(eps) lambda2, lambda3 omitted (enters at eps^4)
  return 1.0 / mu - std::numbers::pi * mu * em2 * lambda1 + 2.0 * std::numbers::pi * em2 * lambda2;
}

}  // namespace perfospec
