#pragma once

#include <string>
#include <vector>

#include "perfospec/vec2.hpp"

namespace perfospec {

/// 2pi-periodic function represented as a truncated Fourier series
///   f(theta) = constant + sum_k cos_coeffs[k-1] cos(k theta)
///                       + sum_k sin_coeffs[k-1] sin(k theta).
/// Evaluation and differentiation are exact on this representation.
struct AngularFunction {
  double constant = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double operator()(double theta) const;
  AngularFunction derivative() const;

  static AngularFunction constant_fn(double c) { return AngularFunction{c, {}, {}}; }
};

/// Star-shaped hole boundary in the curvilinear parameterization
///   p(theta) = radial_scale * (beta(theta) cos theta, omega(theta) sin theta).
/// Only the boundary curve is stored; every downstream quantity depends on
/// the shape through |E|, M, M_min, M_max alone.
struct StarShape {
  AngularFunction beta;
  AngularFunction omega;
  double radial_scale = 1.0;
  int samples = 1024;  // quadrature resolution for curve integrals
};

struct HoleInstance {
  StarShape shape;
  double epsilon = 0.0;  // scale, same length unit as the outer domain
  Vec2 center;           // in outer-domain coordinates
};

struct AssumptionReport {
  double periodicity_residual = 0.0;
  bool beta_positive = false;
  bool omega_positive = false;
  bool simple_closed = false;  // winding number about the origin equals 1
  bool star_shaped = false;    // polar angle strictly increasing over one period
  double orthogonality_residual = 0.0;
  double tolerance = 0.0;
  bool passes = false;
};

Vec2 boundary_point(const StarShape& shape, double theta);

/// |E| by the trapezoidal rule on (1/2) (x1 dx2 - x2 dx1); spectrally accurate
/// for this periodic integrand. Throws NonSimpleCurve if the winding number
/// about the origin is not 1.
double area(const StarShape& shape);

/// M = sqrt(|E| / pi).
double effective_radius(const StarShape& shape);

/// (M_min, M_max): extremes of |p(theta)| over the sample grid.
std::pair<double, double> radial_extremes(const StarShape& shape);

AssumptionReport check_assumptions(const StarShape& shape, double tol);

/// n >= 16 points center + eps * p(theta_k), theta_k uniform; closed CCW.
std::vector<Vec2> scaled_boundary(const HoleInstance& hole, int n);

/// Shape file I/O. Schema:
/// {"beta": {"constant": c, "cos": [...], "sin": [...]}, "omega": {...},
///  "radial_scale": r, "samples": n}
StarShape load_shape(const std::string& path);
StarShape parse_shape(const std::string& json_text);
std::string shape_to_json(const StarShape& shape);

}  // namespace perfospec
