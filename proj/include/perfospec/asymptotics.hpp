#pragma once

#include <map>

#include "perfospec/vec2.hpp"

namespace perfospec {

struct Mesh2D;

/// Ingredients of the eigenvalue-shift prediction for one simple mode of the
/// hole-free Dirichlet problem: mu, phi(center), grad phi(center) with phi
/// normalized in L2.
struct UnperturbedData {
  double mu = 0.0;
  double phi_at_center = 0.0;
  Vec2 grad_at_center;
  double gap = 0.0;  // distance to the nearest other eigenvalue
  enum class Source { Analytic, Numeric } source = Source::Analytic;
};

/// mu(eps) ~ mu - c eps^2 with c = (2 |grad phi|^2 - mu phi^2) |E|;
/// remainder O(eps^3 |log eps|^2).
struct Prediction {
  double mu = 0.0;
  double coefficient = 0.0;
  double at(double eps) const { return mu - coefficient * eps * eps; }
};

/// c = (2 |grad phi(center)|^2 - mu phi(center)^2) * area_E.
double coefficient(const UnperturbedData& data, double area_E);

double predict(const UnperturbedData& data, double area_E, double eps);

Prediction make_prediction(const UnperturbedData& data, double area_E);

/// Rectangle (0,a)x(0,b), Dirichlet mode (m,n):
/// mu = pi^2 (m^2/a^2 + n^2/b^2), phi = 2/sqrt(ab) sin(m pi x/a) sin(n pi y/b).
/// Throws DegenerateMode when another lattice mode matches mu to 1e-9 relative.
UnperturbedData rectangle_mode(double a, double b, int m, int n, const Vec2& center);

/// Disk of radius R, k-th radial Dirichlet mode: mu = (j_{0,k}/R)^2,
/// phi(0) = 1/(sqrt(pi) R |J1(j_{0,k})|), grad phi(0) = 0. The gap is taken
/// against neighboring radial and angular modes.
UnperturbedData disk_radial_mode(double R, int k);

/// Exact k-th eigenvalue of the concentric annulus eps < r < R with Dirichlet
/// outer / Neumann inner condition: mu = kappa^2 where kappa is the k-th root
/// of J0(kappa R) Y1(kappa eps) - Y0(kappa R) J1(kappa eps) = 0.
double annulus_neumann_inner_eigenvalue(double R, double eps, int k);

/// Extracts (mu_i, phi_i(center), grad phi_i(center)) from a P1 solve on a
/// hole-free mesh; sign fixed so phi(center) >= 0 (or the first nonzero
/// gradient component >= 0 when phi(center) vanishes).
UnperturbedData numeric_unperturbed(const Mesh2D& mesh, int i, const Vec2& center,
                                    double solver_tol = 1e-9);

/// lambda(eps) = mu^{-1} - (pi mu^{-1} phi^2 - 2 pi mu^{-2} |grad phi|^2)(eps M)^2,
/// the reciprocal-eigenvalue expansion whose eps^2 term inverts to the mu(eps)
/// prediction up to O(eps^4).
double reciprocal_expansion(const UnperturbedData& data, double M, double eps);

}  // namespace perfospec
