#include "perfospec/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "perfospec/errors.hpp"

namespace perfospec {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= kTwoPi;
  while (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

// Winding number of the sampled boundary about the origin.
double winding_number(const StarShape& shape) {
  const int n = shape.samples;
  double total = 0.0;
  Vec2 prev = boundary_point(shape, 0.0);
  for (int k = 1; k <= n; ++k) {
    const Vec2 p = boundary_point(shape, kTwoPi * k / n);
    total += wrap_angle(std::atan2(p.y, p.x) - std::atan2(prev.y, prev.x));
    prev = p;
  }
  return total / kTwoPi;
}
}  // namespace

double AngularFunction::operator()(double theta) const {
  double v = constant;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
    v += cos_coeffs[k] * std::cos((k + 1) * theta);
  }
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
    v += sin_coeffs[k] * std::sin((k + 1) * theta);
  }
  return v;
}

AngularFunction AngularFunction::derivative() const {
  AngularFunction d;
  d.constant = 0.0;
  d.cos_coeffs.resize(sin_coeffs.size());
  d.sin_coeffs.resize(cos_coeffs.size());
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
    d.cos_coeffs[k] = (k + 1) * sin_coeffs[k];
  }
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
    d.sin_coeffs[k] = -static_cast<double>(k + 1) * cos_coeffs[k];
  }
  return d;
}

Vec2 boundary_point(const StarShape& shape, double theta) {
  return {shape.radial_scale * shape.beta(theta) * std::cos(theta),
          shape.radial_scale * shape.omega(theta) * std::sin(theta)};
}

double area(const StarShape& shape) {
  const double w = winding_number(shape);
  if (std::abs(w - 1.0) > 1e-6) {
    throw NonSimpleCurve("area: boundary winding number is " + std::to_string(w));
  }
  const int n = shape.samples;
  const AngularFunction dbeta = shape.beta.derivative();
  const AngularFunction domega = shape.omega.derivative();
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double b = shape.beta(t);
    const double o = shape.omega(t);
    const double x = b * c;
    const double y = o * s;
    const double xd = dbeta(t) * c - b * s;
    const double yd = domega(t) * s + o * c;
    acc += x * yd - y * xd;
  }
  const double scale2 = shape.radial_scale * shape.radial_scale;
  return 0.5 * scale2 * acc * kTwoPi / n;
}

double effective_radius(const StarShape& shape) {
  return std::sqrt(area(shape) / std::numbers::pi);
}

std::pair<double, double> radial_extremes(const StarShape& shape) {
  const int n = shape.samples;
  double lo = std::numeric_limits<double>::max();
  double hi = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = boundary_point(shape, kTwoPi * k / n).norm();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

AssumptionReport check_assumptions(const StarShape& shape, double tol) {
  AssumptionReport rep;
  rep.tolerance = tol;
  const int n = std::max(shape.samples, 256);
  const AngularFunction dbeta = shape.beta.derivative();
  const AngularFunction domega = shape.omega.derivative();

  rep.periodicity_residual = dist(boundary_point(shape, 0.0), boundary_point(shape, kTwoPi));

  rep.beta_positive = true;
  rep.omega_positive = true;
  rep.star_shaped = true;
  double ortho = 0.0;
  double prev_angle = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = kTwoPi * k / n;
    const double b = shape.beta(t);
    const double o = shape.omega(t);
    if (b <= 0.0) rep.beta_positive = false;
    if (o <= 0.0) rep.omega_positive = false;

    const double c = std::cos(t);
    const double s = std::sin(t);
    const double x = b * c;
    const double y = o * s;
    const double xd = dbeta(t) * c - b * s;
    const double yd = domega(t) * s + o * c;
    ortho = std::max(ortho, std::abs(x * xd + y * yd));

    const double ang = std::atan2(y, x);
    if (k > 0 && wrap_angle(ang - prev_angle) <= 1e-10) rep.star_shaped = false;
    prev_angle = ang;
  }
  // residual in boundary-curve units (scale factor alpha(rho0)^2 applied)
  rep.orthogonality_residual = ortho * shape.radial_scale * shape.radial_scale;

  try {
    rep.simple_closed = std::abs(winding_number(shape) - 1.0) <= 1e-6;
  } catch (const Error&) {
    rep.simple_closed = false;
  }

  rep.passes = rep.beta_positive && rep.omega_positive && rep.simple_closed &&
               rep.star_shaped && rep.orthogonality_residual <= tol;
  return rep;
}

std::vector<Vec2> scaled_boundary(const HoleInstance& hole, int n) {
  if (n < 16) throw Error("scaled_boundary: need n >= 16");
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int k = 0; k < n; ++k) {
    pts.push_back(hole.center + hole.epsilon * boundary_point(hole.shape, kTwoPi * k / n));
  }
  return pts;
}

namespace {
AngularFunction angular_from_json(const nlohmann::json& j) {
  AngularFunction f;
  f.constant = j.value("constant", 0.0);
  if (j.contains("cos")) f.cos_coeffs = j.at("cos").get<std::vector<double>>();
  if (j.contains("sin")) f.sin_coeffs = j.at("sin").get<std::vector<double>>();
  return f;
}

nlohmann::json angular_to_json(const AngularFunction& f) {
  return {{"constant", f.constant}, {"cos", f.cos_coeffs}, {"sin", f.sin_coeffs}};
}
}  // namespace

StarShape parse_shape(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  StarShape s;
  s.beta = angular_from_json(j.at("beta"));
  s.omega = angular_from_json(j.at("omega"));
  s.radial_scale = j.value("radial_scale", 1.0);
  s.samples = j.value("samples", 1024);
  if (s.radial_scale <= 0.0) throw Error("shape: radial_scale must be positive");
  if (s.samples < 64) throw Error("shape: samples must be >= 64");
  return s;
}

StarShape load_shape(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open shape file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_shape(buf.str());
}

std::string shape_to_json(const StarShape& shape) {
  nlohmann::json j = {{"beta", angular_to_json(shape.beta)},
                      {"omega", angular_to_json(shape.omega)},
                      {"radial_scale", shape.radial_scale},
                      {"samples", shape.samples}};
  return j.dump(2);
}

}  // namespace perfospec
