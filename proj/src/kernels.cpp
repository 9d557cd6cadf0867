#include "perfospec/kernels.hpp"

#include <cmath>
#include <numbers>

#include "perfospec/errors.hpp"

namespace perfospec {

namespace {
constexpr double kInv2Pi = 1.0 / (2.0 * std::numbers::pi);
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double log_kernel(const Vec2& x, const Vec2& y) {
  const double r = dist(x, y);
  if (r == 0.0) throw CoincidentPoints("log_kernel: x == y");
  return -kInv2Pi * std::log(r);
}

double disk_green(const Vec2& x, const Vec2& y, double R) {
  if (x.norm() > R * (1.0 + 1e-12) || y.norm() > R * (1.0 + 1e-12)) {
    throw OutsideDisk("disk_green: point outside the disk");
  }
  const double r = dist(x, y);
  if (r == 0.0) throw CoincidentPoints("disk_green: x == y");
  // |y| |x - R^2 y / |y|^2| = sqrt(|x|^2 |y|^2 - 2 R^2 x.y + R^4), finite as y -> 0
  const double image = std::sqrt(x.norm2() * y.norm2() - 2.0 * R * R * x.dot(y) + R * R * R * R);
  return -kInv2Pi * (std::log(r) - std::log(image / R));
}

double regular_part(const Vec2& x, const Vec2& y, double R) {
  if (x.norm() > R * (1.0 + 1e-12) || y.norm() > R * (1.0 + 1e-12)) {
    throw OutsideDisk("regular_part: point outside the disk");
  }
  const double image = std::sqrt(x.norm2() * y.norm2() - 2.0 * R * R * x.dot(y) + R * R * R * R);
  return kInv2Pi * std::log(image / R);
}

ExteriorHarmonic solve_exterior_neumann(const FourierBoundaryData& data, double eps,
                                        double rho0, double tau0) {
  ExteriorHarmonic v;
  v.eps = eps;
  v.rho0 = rho0;
  v.tau0 = tau0;
  v.a0 = eps * tau0 * data.s0;
  v.a.resize(data.s.size());
  v.b.resize(data.p.size());
  for (std::size_t k = 0; k < data.s.size(); ++k) {
    v.a[k] = eps * std::exp(-static_cast<double>(k + 1) * rho0) * tau0 * data.s[k];
  }
  for (std::size_t k = 0; k < data.p.size(); ++k) {
    v.b[k] = eps * std::exp(-static_cast<double>(k + 1) * rho0) * tau0 * data.p[k];
  }
  return v;
}

// The stored coefficients carry the e^{-k rho0} factor, so the mode radial
// profile is e^{-k(rho - 2 rho0)} a_k = e^{-k(rho - rho0)} (eps tau0 s_k):
// each term is harmonic in (rho, theta), decays away from the boundary, and
// its normal derivative at rho0 reproduces the prescribed Neumann data.
double evaluate_exterior(const ExteriorHarmonic& v, double rho, double theta) {
  double val = v.a0 * (rho + std::log(v.eps));
  for (std::size_t k = 0; k < v.a.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    val += (-1.0 / kk) * std::exp(-kk * (rho - 2.0 * v.rho0)) * v.a[k] * std::cos(kk * theta);
  }
  for (std::size_t k = 0; k < v.b.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    val += (-1.0 / kk) * std::exp(-kk * (rho - 2.0 * v.rho0)) * v.b[k] * std::sin(kk * theta);
  }
  return val;
}

double exterior_neumann_data(const ExteriorHarmonic& v, double theta) {
  // d(v)/d(rho) at rho0, scaled by 1/(eps tau0)
  double d = v.a0;
  for (std::size_t k = 0; k < v.a.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    d += std::exp(kk * v.rho0) * v.a[k] * std::cos(kk * theta);
  }
  for (std::size_t k = 0; k < v.b.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    d += std::exp(kk * v.rho0) * v.b[k] * std::sin(kk * theta);
  }
  return d / (v.eps * v.tau0);
}

double hole_log_potential(const Vec2& x, double M, double eps) {
  const double a = M * eps;
  const double s = x.norm();
  if (s >= a) {
    return -0.5 * a * a * std::log(s);
  }
  return -0.5 * a * a * std::log(a) + (a * a - s * s) / 4.0;
}

double hole_moment_potential(const Vec2& w, int n, double M, double eps) {
  if (n != 1 && n != 2) throw Error("hole_moment_potential: n must be 1 or 2");
  const double a = M * eps;
  if (w.norm() >= a) throw OutsideValidity("hole_moment_potential: |w| >= M*eps");
  const double wn = n == 1 ? w.x : w.y;
  return wn * (0.5 * a * a * std::log(a) + w.norm2() / 8.0);
}

Vec2 disk_green_center_gradient(const Vec2& x, double R) {
  const double f = kInv2Pi * (1.0 / x.norm2() - 1.0 / (R * R));
  return {x.x * f, x.y * f};
}

std::array<double, 4> disk_green_center_hessian(const Vec2& x, double R) {
  const double r2 = x.norm2();
  const double r4 = r2 * r2;
  const double R4 = R * R * R * R;
  const double diag = 1.0 / r2 - r2 / R4;
  const double quad = 1.0 / r4 - 1.0 / R4;
  // row-major (w1w1, w1w2, w2w1, w2w2)
  return {-kInv2Pi * (diag - 2.0 * x.x * x.x * quad), -kInv2Pi * (-2.0 * x.x * x.y * quad),
          -kInv2Pi * (-2.0 * x.y * x.x * quad), -kInv2Pi * (diag - 2.0 * x.y * x.y * quad)};
}

double corrected_kernel(const Vec2& x, const Vec2& y, double R, double mu, double M,
                        double eps) {
  (void)mu;  // feeds g(eps), which belongs to the companion kernel, not h_eps
  if (dist(x, y) < 1e-6 * R) throw CoincidentPoints("corrected_kernel: x too close to y");
  if (x.norm() < 1e-6 * R || y.norm() < 1e-6 * R) {
    throw CoincidentPoints("corrected_kernel: point too close to the expansion center");
  }
  const double me2 = (M * eps) * (M * eps);
  const double h_eps = kTwoPi * me2;
  const double i_eps = 0.5 * std::numbers::pi * me2 * me2;

  const Vec2 gx = disk_green_center_gradient(x, R);
  const Vec2 gy = disk_green_center_gradient(y, R);
  const auto hx = disk_green_center_hessian(x, R);
  const auto hy = disk_green_center_hessian(y, R);
  double hess_pair = 0.0;
  for (int i = 0; i < 4; ++i) hess_pair += hx[i] * hy[i];

  return disk_green(x, y, R) + h_eps * gx.dot(gy) + i_eps * hess_pair;
}

namespace {

// Adaptive Simpson in 1D with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double m, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         adaptive_simpson(f, m, rm, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double integrate_over_disk(const std::function<double(const Vec2&)>& f, const Vec2& center,
                           double radius, const Vec2& singularity, double abs_tol) {
  const Vec2 d = singularity - center;
  const bool inside = d.norm() < radius * (1.0 - 1e-12);
  if (inside) {
    // polar about the singular point; ray exits the disk at
    // r = -(d.e) + sqrt((d.e)^2 + radius^2 - |d|^2)
    auto ray_extent = [&](double theta) {
      const Vec2 e{std::cos(theta), std::sin(theta)};
      const double de = d.dot(e);
      return -de + std::sqrt(std::max(de * de + radius * radius - d.norm2(), 0.0));
    };
    auto shell = [&](double theta) {
      const Vec2 e{std::cos(theta), std::sin(theta)};
      auto radial = [&](double r) { return r == 0.0 ? 0.0 : f(singularity + r * e) * r; };
      return integrate_1d(radial, 0.0, ray_extent(theta), abs_tol / (4.0 * kTwoPi));
    };
    return integrate_1d(shell, 0.0, kTwoPi, abs_tol / 4.0);
  }
  auto shell = [&](double theta) {
    const Vec2 e{std::cos(theta), std::sin(theta)};
    auto radial = [&](double r) { return r == 0.0 ? 0.0 : f(center + r * e) * r; };
    return integrate_1d(radial, 0.0, radius, abs_tol / (4.0 * kTwoPi));
  };
  return integrate_1d(shell, 0.0, kTwoPi, abs_tol / 4.0);
}

}  // namespace perfospec
