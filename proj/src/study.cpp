#include "perfospec/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "perfospec/errors.hpp"
#include "perfospec/fem.hpp"
#include "perfospec/manifest.hpp"
#include "perfospec/parallel.hpp"
#include "perfospec/version.hpp"

namespace perfospec {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double min_domain_dimension(const OuterDomain& outer) {
  if (const auto* r = std::get_if<OuterRect>(&outer)) return std::min(r->a, r->b);
  return 2.0 * std::get<OuterDisk>(outer).R;
}

}  // namespace

int track_mode(const Spectrum& unperturbed, const DiscreteOperator& unperturbed_op,
               const Mesh2D& unperturbed_mesh, const Spectrum& perturbed,
               const DiscreteOperator& perturbed_op, const Mesh2D& perturbed_mesh, int i,
               double* overlap_out) {
  if (i < 1 || i > static_cast<int>(unperturbed.eigenvalues.size())) {
    throw Error("track_mode: mode index out of range");
  }
  const PointLocator locator(unperturbed_mesh);
  const DiscreteField& u = unperturbed.eigenvectors[i - 1];

  // edge-midpoint quadrature points on the perturbed mesh, with the
  // unperturbed eigenfunction evaluated once per point
  const int nt = static_cast<int>(perturbed_mesh.triangles.size());
  const int nj = static_cast<int>(perturbed.eigenvalues.size());
  std::vector<double> dots(nj, 0.0), norms(nj, 0.0);
  double unorm = 0.0;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = perturbed_mesh.triangles[t];
    const double w = triangle_area(perturbed_mesh, t) / 3.0;
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      const Vec2 mid = 0.5 * (perturbed_mesh.vertices[a] + perturbed_mesh.vertices[b]);
      double uval;
      try {
        uval = evaluate(u, unperturbed_op, unperturbed_mesh, locator, mid);
      } catch (const OutsideDomain&) {
        continue;  // quadrature point hidden by the hole on the unperturbed side
      }
      unorm += w * uval * uval;
      for (int j = 0; j < nj; ++j) {
        const DiscreteField& v = perturbed.eigenvectors[j];
        auto nodal = [&](int node) {
          const int f = perturbed_op.node_to_free[node];
          return f >= 0 ? v.coefficients[f] : 0.0;
        };
        const double vval = 0.5 * (nodal(a) + nodal(b));
        dots[j] += w * uval * vval;
        norms[j] += w * vval * vval;
      }
    }
  }

  std::vector<double> overlap(nj, 0.0);
  for (int j = 0; j < nj; ++j) {
    overlap[j] = norms[j] > 0 && unorm > 0 ? std::abs(dots[j]) / std::sqrt(norms[j] * unorm) : 0.0;
  }
  int best = 0;
  for (int j = 1; j < nj; ++j) {
    if (overlap[j] > overlap[best]) best = j;
  }
  double second = 0.0;
  for (int j = 0; j < nj; ++j) {
    if (j != best) second = std::max(second, overlap[j]);
  }
  if (overlap[best] < 0.8) {
    throw AmbiguousMatch("track_mode: best overlap " + std::to_string(overlap[best]) +
                         " below 0.8");
  }
  if (overlap[best] - second < 0.1) {
    throw AmbiguousMatch("track_mode: top two overlaps within 0.1");
  }
  if (overlap_out) *overlap_out = overlap[best];
  return best + 1;
}

std::pair<double, double> richardson(const std::vector<double>& values_by_level, double order) {
  if (values_by_level.size() < 2) throw Error("richardson: need at least two levels");
  const double v1 = values_by_level[values_by_level.size() - 2];
  const double v2 = values_by_level.back();
  const double factor = std::pow(2.0, order) - 1.0;
  const double extrapolated = v2 + (v2 - v1) / factor;
  return {extrapolated, std::abs(v2 - extrapolated)};
}

std::pair<double, double> fit_coefficient(const std::vector<std::pair<double, double>>& points,
                                          double mu0, FitModel model) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw IllConditionedFit("fit_coefficient: need at least 3 points");
  double lo = points[0].first, hi = points[0].first;
  for (const auto& [e, v] : points) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (hi < 2.0 * lo) throw IllConditionedFit("fit_coefficient: eps span below a factor of 2");

  const int p = model == FitModel::PureQuadratic ? 1 : 2;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (int r = 0; r < n; ++r) {
    const double eps = points[r].first;
    X(r, 0) = -eps * eps;
    if (p == 2) {
      const double lg = std::log(1.0 / eps);
      X(r, 1) = eps * eps * eps * lg * lg;
    }
    y(r) = points[r].second - mu0;
    w(r) = 1.0 / (eps * eps * eps * eps);
  }
  const Eigen::MatrixXd Xw = w.asDiagonal() * X;
  const Eigen::MatrixXd normal = X.transpose() * Xw;
  const Eigen::VectorXd rhs = X.transpose() * (w.asDiagonal() * y);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal);
  const double cond = es.eigenvalues()(p - 1) / std::max(es.eigenvalues()(0), 1e-300);
  if (!(cond < 1e12)) throw IllConditionedFit("fit_coefficient: normal matrix condition number");

  const Eigen::VectorXd beta = normal.ldlt().solve(rhs);
  const Eigen::VectorXd resid = y - X * beta;
  double chi2 = 0.0;
  for (int r = 0; r < n; ++r) chi2 += w(r) * resid(r) * resid(r);
  const double sigma2 = n > p ? chi2 / (n - p) : 0.0;
  const Eigen::MatrixXd cov = sigma2 * normal.inverse();
  return {beta(0), std::sqrt(std::max(cov(0, 0), 0.0))};
}

namespace {

struct CellResult {
  double mu_h = 0.0;
  double residual = 0.0;
  double overlap = 0.0;
  int matched = 0;
  std::string error;
};

UnperturbedData analytic_prediction_data(const ExperimentConfig& cfg) {
  if (cfg.rect_mode) {
    const auto* r = std::get_if<OuterRect>(&cfg.outer);
    if (!r) throw Error("run_study: rect_mode given for a non-rectangular domain");
    return rectangle_mode(r->a, r->b, cfg.rect_mode->first, cfg.rect_mode->second,
                          cfg.hole_center);
  }
  const auto* d = std::get_if<OuterDisk>(&cfg.outer);
  if (!d) throw Error("run_study: disk_radial_k given for a non-disk domain");
  return disk_radial_mode(d->R, *cfg.disk_radial_k);
}

}  // namespace

StudyReport run_study(const ExperimentConfig& cfg) {
  // config validation
  if (cfg.eps_list.size() < 1) throw Error("run_study: empty eps list");
  std::vector<double> eps = cfg.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (eps[i] == eps[i - 1]) throw Error("run_study: eps values must be pairwise distinct");
  }
  const double max_eps = 0.25 * min_domain_dimension(cfg.outer);
  for (const double e : eps) {
    if (!(e > 0.0) || e > max_eps) {
      throw Error("run_study: eps " + std::to_string(e) + " outside (0, 0.25*min dimension]");
    }
  }
  if (cfg.levels.size() < 2) throw Error("run_study: need at least two mesh levels");
  for (std::size_t l = 1; l < cfg.levels.size(); ++l) {
    if (std::abs(cfg.levels[l].h_far - 0.5 * cfg.levels[l - 1].h_far) > 1e-12 ||
        std::abs(cfg.levels[l].h_near - 0.5 * cfg.levels[l - 1].h_near) > 1e-12) {
      throw Error("run_study: mesh levels must halve exactly (Richardson ratio 2)");
    }
  }
  const int n_eps = static_cast<int>(eps.size());
  const int n_lvl = static_cast<int>(cfg.levels.size());
  const int i = cfg.mode_index;
  const int k_solve = i + 3;
  const ExecPolicy inner = cfg.jobs > 1 ? ExecPolicy::Serial : ExecPolicy::Parallel;

  // unperturbed chain, same discretization family
  std::vector<Mesh2D> umesh(n_lvl);
  std::vector<DiscreteOperator> uop(n_lvl);
  std::vector<Spectrum> uspec(n_lvl);
  umesh[0] = generate(cfg.outer, std::nullopt, cfg.levels[0].h_far, cfg.levels[0].h_near,
                      cfg.grading);
  for (int l = 1; l < n_lvl; ++l) umesh[l] = refine_uniform(umesh[l - 1]);
  for (int l = 0; l < n_lvl; ++l) {
    uop[l] = assemble(umesh[l], 1, inner);
    uspec[l] = smallest_eigenpairs(uop[l], k_solve, cfg.solver_tol, 400, inner);
  }
  std::vector<double> mu0_by_level(n_lvl);
  for (int l = 0; l < n_lvl; ++l) mu0_by_level[l] = uspec[l].eigenvalues[i - 1];
  const auto [mu0_extrap, mu0_est] = richardson(mu0_by_level, 2.0);

  // prediction
  const double area_E = area(cfg.hole_shape);
  UnperturbedData pred_data;
  if (cfg.rect_mode || cfg.disk_radial_k) {
    pred_data = analytic_prediction_data(cfg);
  } else {
    const Vec2 c = cfg.hole_center;
    pred_data = numeric_unperturbed(umesh.back(), i, c, cfg.solver_tol);
  }
  const double c_pred = coefficient(pred_data, area_E);

  // grid cells
  std::vector<CellResult> cells(static_cast<std::size_t>(n_eps) * n_lvl);
  parallel_for_dynamic(
      n_eps,
      [&](std::int64_t ie) {
        Mesh2D base;
        for (int l = 0; l < n_lvl; ++l) {
          CellResult& cell = cells[ie * n_lvl + l];
          try {
            if (l == 0) {
              HoleInstance hole{cfg.hole_shape, eps[ie], cfg.hole_center};
              base = generate(cfg.outer, hole, cfg.levels[0].h_far, cfg.levels[0].h_near,
                              cfg.grading);
            } else {
              base = refine_uniform(base);
            }
            const DiscreteOperator pop = assemble(base, 1, inner);
            const Spectrum pspec = smallest_eigenpairs(pop, k_solve, cfg.solver_tol, 400, inner);
            double ov = 0.0;
            const int j = track_mode(uspec[l], uop[l], umesh[l], pspec, pop, base, i, &ov);
            cell.mu_h = pspec.eigenvalues[j - 1];
            cell.residual = pspec.residuals[j - 1];
            cell.overlap = ov;
            cell.matched = j;
          } catch (const Error& err) {
            cell.error = std::string("eps=") + fmt17(eps[ie]) + " level=" + std::to_string(l) +
                         ": " + err.what();
          }
        }
      },
      cfg.jobs);
  for (const auto& cell : cells) {
    if (!cell.error.empty()) throw Error("run_study: " + cell.error);
  }

  StudyReport rep;
  rep.version = kVersion;
  rep.eps = eps;
  rep.mu0 = mu0_extrap;
  rep.c_pred = c_pred;
  for (int ie = 0; ie < n_eps; ++ie) {
    std::vector<double> by_level(n_lvl);
    for (int l = 0; l < n_lvl; ++l) {
      const CellResult& cell = cells[ie * n_lvl + l];
      by_level[l] = cell.mu_h;
      rep.rows.push_back({eps[ie], l, cell.mu_h, cell.residual, cell.overlap, cell.matched});
    }
    const auto [ex, est] = richardson(by_level, 2.0);
    rep.mu_extrapolated.push_back(ex);
    rep.error_estimate.push_back(est);
    // discretization-error gate: est must stay below 10% of the predicted shift
    rep.used_in_fit.push_back(est <= 0.1 * std::abs(c_pred) * eps[ie] * eps[ie]);
  }

  std::vector<std::pair<double, double>> pts;
  for (int ie = 0; ie < n_eps; ++ie) {
    if (rep.used_in_fit[ie]) pts.push_back({eps[ie], rep.mu_extrapolated[ie]});
  }
  rep.mu0_used = mu0_extrap;
  bool fit_ok = false;
  if (pts.size() >= 3) {
    try {
      const auto [c_hat, se] = fit_coefficient(pts, rep.mu0_used, cfg.fit_model);
      rep.c_hat = c_hat;
      rep.c_stderr = se;
      fit_ok = true;
    } catch (const IllConditionedFit& e) {
      rep.note = e.what();
    }
  } else {
    rep.note = "fewer than 3 rows passed the discretization-error gate";
  }

  bool residuals_ok = true;
  for (const auto& row : rep.rows) residuals_ok = residuals_ok && row.residual <= cfg.solver_tol;
  if (fit_ok && c_pred != 0.0) {
    rep.relative_discrepancy = std::abs(rep.c_hat - c_pred) / std::abs(c_pred);
    rep.pass = residuals_ok && rep.relative_discrepancy <= cfg.coeff_tol;
  } else {
    rep.pass = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// config / report serialization

ExperimentConfig parse_config(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  ExperimentConfig cfg;
  const auto& outer = j.at("outer");
  const std::string type = outer.at("type").get<std::string>();
  if (type == "rect") {
    cfg.outer = OuterRect{outer.at("a").get<double>(), outer.at("b").get<double>()};
  } else if (type == "disk") {
    OuterDisk d;
    d.R = outer.at("R").get<double>();
    if (outer.contains("center")) {
      d.center = {outer.at("center").at(0).get<double>(), outer.at("center").at(1).get<double>()};
    }
    cfg.outer = d;
  } else {
    throw Error("config: outer.type must be rect or disk");
  }
  if (j.at("hole").contains("shape_file")) {
    cfg.hole_shape = load_shape(j.at("hole").at("shape_file").get<std::string>());
  } else {
    cfg.hole_shape = parse_shape(j.at("hole").at("shape").dump());
  }
  cfg.hole_center = {j.at("hole").at("center").at(0).get<double>(),
                     j.at("hole").at("center").at(1).get<double>()};
  cfg.eps_list = j.at("eps").get<std::vector<double>>();
  for (const auto& lv : j.at("levels")) {
    cfg.levels.push_back({lv.at("h_far").get<double>(), lv.at("h_near").get<double>()});
  }
  cfg.grading = j.value("grading", 0.3);
  cfg.mode_index = j.value("mode_index", 1);
  cfg.solver_tol = j.value("solver_tol", 1e-9);
  cfg.coeff_tol = j.value("coeff_tol", 0.10);
  cfg.jobs = j.value("jobs", 1);
  const std::string model = j.value("fit_model", "pure_quadratic");
  if (model == "pure_quadratic") {
    cfg.fit_model = FitModel::PureQuadratic;
  } else if (model == "quadratic_plus_log") {
    cfg.fit_model = FitModel::QuadraticPlusLog;
  } else {
    throw Error("config: unknown fit_model " + model);
  }
  if (j.contains("rect_mode")) {
    cfg.rect_mode = {j.at("rect_mode").at(0).get<int>(), j.at("rect_mode").at(1).get<int>()};
  }
  if (j.contains("disk_radial_k")) cfg.disk_radial_k = j.at("disk_radial_k").get<int>();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string report_to_json(const StudyReport& rep) {
  nlohmann::json j;
  j["version"] = rep.version;
  j["config_hash"] = rep.config_hash;
  j["mu0"] = rep.mu0;
  j["c_hat"] = rep.c_hat;
  j["c_stderr"] = rep.c_stderr;
  j["c_pred"] = rep.c_pred;
  j["relative_discrepancy"] = rep.relative_discrepancy;
  j["verdict"] = rep.pass ? "pass" : "fail";
  if (!rep.note.empty()) j["note"] = rep.note;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    j["rows"].push_back({{"eps", r.eps},
                         {"level", r.level},
                         {"mu_h", r.mu_h},
                         {"residual", r.residual},
                         {"overlap", r.overlap},
                         {"matched_index", r.matched_index}});
  }
  j["per_eps"] = nlohmann::json::array();
  for (std::size_t ie = 0; ie < rep.eps.size(); ++ie) {
    j["per_eps"].push_back({{"eps", rep.eps[ie]},
                            {"mu_extrapolated", rep.mu_extrapolated[ie]},
                            {"error_estimate", rep.error_estimate[ie]},
                            {"used_in_fit", static_cast<bool>(rep.used_in_fit[ie])}});
  }
  return j.dump(2);
}

std::string report_to_csv(const StudyReport& rep) {
  std::ostringstream os;
  os << "eps,level,mu_h,residual,overlap,matched_index,mu_extrapolated,error_estimate,"
        "used_in_fit\n";
  for (const auto& r : rep.rows) {
    std::size_t ie = 0;
    for (; ie < rep.eps.size(); ++ie) {
      if (rep.eps[ie] == r.eps) break;
    }
    os << fmt17(r.eps) << "," << r.level << "," << fmt17(r.mu_h) << "," << fmt17(r.residual)
       << "," << fmt17(r.overlap) << "," << r.matched_index << ","
       << fmt17(rep.mu_extrapolated[ie]) << "," << fmt17(rep.error_estimate[ie]) << ","
       << (rep.used_in_fit[ie] ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string convergence_svg(const StudyReport& rep) {
  // log-log |mu(eps) - mu0| vs eps, with the slope-2 prediction line
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t ie = 0; ie < rep.eps.size(); ++ie) {
    const double shift = std::abs(rep.mu_extrapolated[ie] - rep.mu0);
    if (shift > 0) pts.push_back({std::log10(rep.eps[ie]), std::log10(shift)});
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n";
  if (pts.size() >= 2) {
    double xlo = pts[0].first, xhi = pts[0].first, ylo = pts[0].second, yhi = pts[0].second;
    for (const auto& [x, y] : pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
    // include the prediction line end points
    for (const double x : {xlo, xhi}) {
      const double y = std::log10(std::abs(rep.c_pred)) + 2.0 * x;
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
    xlo -= 0.1;
    xhi += 0.1;
    ylo -= 0.2;
    yhi += 0.2;
    auto sx = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb); };
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#888\"/>\n",
                  sx(xlo), sy(std::log10(std::abs(rep.c_pred)) + 2.0 * xlo), sx(xhi),
                  sy(std::log10(std::abs(rep.c_pred)) + 2.0 * xhi));
    os << buf;
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"#c00\"/>\n",
                    sx(x), sy(y));
      os << buf;
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\">log10 eps</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2
       << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">"
       << "log10 |mu(eps) - mu0|</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace perfospec
