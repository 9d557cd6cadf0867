#pragma once

#include <array>
#include <functional>
#include <vector>

#include "perfospec/vec2.hpp"

namespace perfospec {

/// Neumann data L(theta) = s0 + sum_k s[k-1] cos(k theta) + p[k-1] sin(k theta)
/// on the hole boundary.
struct FourierBoundaryData {
  double s0 = 0.0;
  std::vector<double> s;  // cosine coefficients S_k
  std::vector<double> p;  // sine coefficients P_k
};

/// Exterior harmonic with prescribed Neumann data on the hole boundary:
///   v(rho, theta) = a0 (rho + log eps)
///                 + sum_k (-1/k) e^{-k rho} (a[k-1] cos k theta + b[k-1] sin k theta).
struct ExteriorHarmonic {
  double a0 = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  double eps = 0.0;
  double rho0 = 0.0;
  double tau0 = 0.0;  // tau(rho0) for the circular case
};

/// L(x,y) = -(2 pi)^{-1} log|x-y|.
double log_kernel(const Vec2& x, const Vec2& y);

/// Dirichlet Green function of the disk |x| < R by the image formula.
double disk_green(const Vec2& x, const Vec2& y, double R);

/// Smooth part S(x,y) = K(x,y) + (2 pi)^{-1} log|x-y|, continuous at x = y.
double regular_part(const Vec2& x, const Vec2& y, double R);

/// Coefficient matching for the circular-hole exterior Neumann problem:
/// a0 = eps tau0 s0, a_k = eps e^{-k rho0} tau0 s_k, b_k likewise with p_k.
ExteriorHarmonic solve_exterior_neumann(const FourierBoundaryData& data, double eps,
                                        double rho0, double tau0);

double evaluate_exterior(const ExteriorHarmonic& v, double rho, double theta);

/// Reconstructs the Neumann data (1/(eps tau0)) d(v)/d(rho) at rho = rho0.
double exterior_neumann_data(const ExteriorHarmonic& v, double theta);

/// F(x) = integral of L(x,y) over the disk of radius M*eps about the origin:
///   -(1/2)(M eps)^2 log|x|                               for |x| >= M eps,
///   -(1/2)(M eps)^2 log(M eps) + ((M eps)^2 - |x|^2)/4   for |x| <  M eps.
double hole_log_potential(const Vec2& x, double M, double eps);

/// K_n(w) = integral of L(w,y)(y_n - w_n) over the same disk, |w| < M eps:
///   w_n ( (1/2)(M eps)^2 log(M eps) + |w|^2 / 8 ).
/// Signs fixed by the defining integral (verified against quadrature).
double hole_moment_potential(const Vec2& w, int n, double M, double eps);

/// h_eps(x,y) = K(x,y) + h(eps) <grad_w K(x,0), grad_w K(0,y)>
///            + i(eps) <H_w K(x,0), H_w K(0,y)>
/// with h(eps) = 2 pi (M eps)^2, i(eps) = (pi/2)(M eps)^4 and the Hessian
/// pairing the Frobenius double contraction. mu feeds the companion weight
/// g(eps) = -pi mu (M eps)^2, which does not enter this kernel.
double corrected_kernel(const Vec2& x, const Vec2& y, double R, double mu, double M,
                        double eps);

/// Gradient / Hessian of the disk Green function with respect to its second
/// argument, evaluated at the disk center (closed-form differentiation of the
/// image formula).
Vec2 disk_green_center_gradient(const Vec2& x, double R);
std::array<double, 4> disk_green_center_hessian(const Vec2& x, double R);

/// Adaptive quadrature of f over the disk |y - center| < radius, in polar
/// coordinates about `singularity` when that point lies inside the disk
/// (the r-Jacobian tames logarithmic integrands), about `center` otherwise.
double integrate_over_disk(const std::function<double(const Vec2&)>& f, const Vec2& center,
                           double radius, const Vec2& singularity, double abs_tol = 1e-9);

}  // namespace perfospec
