#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perfospec/asymptotics.hpp"
#include "perfospec/eigensolver.hpp"
#include "perfospec/mesh.hpp"

namespace perfospec {

enum class FitModel { PureQuadratic, QuadraticPlusLog };

struct MeshLevel {
  double h_far = 0.0;
  double h_near = 0.0;
};

/// One epsilon/mesh sweep: which domain, which hole, which mode to track,
/// and how the fitted coefficient is judged against the prediction.
struct ExperimentConfig {
  OuterDomain outer;
  StarShape hole_shape;
  Vec2 hole_center;
  std::vector<double> eps_list;   // descending, pairwise distinct
  std::vector<MeshLevel> levels;  // each level exactly half the previous
  double grading = 0.3;
  int mode_index = 1;  // 1-based eigenvalue index of the unperturbed problem
  double solver_tol = 1e-9;
  FitModel fit_model = FitModel::PureQuadratic;
  double coeff_tol = 0.10;
  int jobs = 1;

  // analytic prediction source; when absent the prediction is extracted
  // numerically from the finest hole-free solve
  std::optional<std::pair<int, int>> rect_mode;  // (m, n)
  std::optional<int> disk_radial_k;
};

struct StudyRow {
  double eps = 0.0;
  int level = 0;
  double mu_h = 0.0;
  double residual = 0.0;
  double overlap = 0.0;
  int matched_index = 0;  // 1-based index the tracker selected
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::vector<double> eps;
  std::vector<double> mu_extrapolated;  // per eps
  std::vector<double> error_estimate;   // per eps
  std::vector<bool> used_in_fit;        // per eps
  double mu0 = 0.0;             // unperturbed eigenvalue, same-family extrapolation
  double mu0_used = 0.0;        // the value the fit subtracted
  double c_hat = 0.0;
  double c_stderr = 0.0;
  double c_pred = 0.0;
  double relative_discrepancy = 0.0;
  bool pass = false;
  std::string note;
  std::string config_hash;
  std::string version;
};

/// Index (1-based) of the perturbed mode matching unperturbed mode i by
/// normalized eigenfunction overlap, integrated with the edge-midpoint rule
/// on the perturbed mesh. Throws AmbiguousMatch when the best overlap is
/// below 0.8 or the top two are within 0.1.
int track_mode(const Spectrum& unperturbed, const DiscreteOperator& unperturbed_op,
               const Mesh2D& unperturbed_mesh, const Spectrum& perturbed,
               const DiscreteOperator& perturbed_op, const Mesh2D& perturbed_mesh, int i,
               double* overlap_out = nullptr);

/// v* = v2 + (v2 - v1) / (2^order - 1) over the last two levels.
std::pair<double, double> richardson(const std::vector<double>& values_by_level, double order);

/// Weighted least squares of mu(eps) - mu0 on -c eps^2 (optionally
/// + d eps^3 log^2(1/eps)), weights 1/eps^4. Returns (c_hat, stderr).
std::pair<double, double> fit_coefficient(const std::vector<std::pair<double, double>>& points,
                                          double mu0, FitModel model);

StudyReport run_study(const ExperimentConfig& config);

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

std::string report_to_json(const StudyReport& report);
std::string report_to_csv(const StudyReport& report);
std::string convergence_svg(const StudyReport& report);

}  // namespace perfospec
