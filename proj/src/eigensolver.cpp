#include "perfospec/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "perfospec/errors.hpp"

namespace perfospec {

namespace {

Eigen::SparseMatrix<double> to_eigen(const CsrMatrix& m) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m.nonzeros()));
  for (std::int32_t r = 0; r < m.rows(); ++r) {
    for (std::int64_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      trips.emplace_back(r, m.col_idx()[k], m.values()[k]);
    }
  }
  Eigen::SparseMatrix<double> out(m.rows(), m.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

void tridiagonal_eigen(std::vector<double> d, std::vector<double> e,
                       std::vector<double>& values, std::vector<std::vector<double>>& vectors) {
  const int n = static_cast<int>(d.size());
  e.resize(n, 0.0);  // e[i] couples i and i+1; e[n-1] unused
  // shift to the classic tqli layout: e[1..n-1]
  std::vector<double> ee(n, 0.0);
  for (int i = n - 1; i >= 1; --i) ee[i] = e[i - 1];

  std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) z[i][i] = 1.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(ee[m + 1]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NoConvergence("tridiagonal_eigen: QL iteration stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * ee[l + 1]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + ee[l + 1] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * ee[i + 1];
          const double b = c * ee[i + 1];
          r = std::hypot(f, g);
          ee[i + 2] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            ee[m + 1] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z[k][i + 1];
            z[k][i + 1] = s * z[k][i] + c * f;
            z[k][i] = c * z[k][i] - s * f;
          }
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        ee[l + 1] = g;
        ee[m + 1] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  values.resize(n);
  vectors.assign(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    values[i] = d[order[i]];
    for (int k = 0; k < n; ++k) vectors[i][k] = z[k][order[i]];
  }
}

double residual_norm(const DiscreteOperator& op, double lambda, const DiscreteField& v) {
  if (v.coefficients.size() != op.free_map.size()) {
    throw Error("residual: field does not match the operator");
  }
  const std::vector<double> av = spmv(op.stiffness, v.coefficients, ExecPolicy::Serial);
  const std::vector<double> bv = spmv(op.mass, v.coefficients, ExecPolicy::Serial);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double r = av[i] - lambda * bv[i];
    num += r * r;
    den += bv[i] * bv[i];
  }
  return std::sqrt(num) / std::sqrt(den);
}

Spectrum smallest_eigenpairs(const DiscreteOperator& op, int k, double tol, int max_iter,
                             ExecPolicy policy) {
  const int n = op.stiffness.rows();
  if (k < 1) throw Error("smallest_eigenpairs: k must be >= 1");
  if (k > n) throw Error("smallest_eigenpairs: k exceeds the dof count");
  if (!(tol > 0.0) || tol > 1e-4) throw Error("smallest_eigenpairs: tol must be in (0, 1e-4]");

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  llt.compute(to_eigen(op.stiffness));
  if (llt.info() != Eigen::Success) {
    throw FactorizationFailure("smallest_eigenpairs: stiffness is not SPD");
  }

  auto b_mul = [&](const std::vector<double>& x) { return spmv(op.mass, x, policy); };
  auto solve_a = [&](const std::vector<double>& rhs) {
    Eigen::Map<const Eigen::VectorXd> r(rhs.data(), n);
    Eigen::VectorXd x = llt.solve(r);
    return std::vector<double>(x.data(), x.data() + n);
  };

  std::vector<std::vector<double>> q;   // B-orthonormal Lanczos basis
  std::vector<std::vector<double>> bq;  // B * q
  std::vector<double> alpha, beta;      // beta[j] couples q[j], q[j+1]

  int restart_seq = 0;
  auto fresh_direction = [&]() {
    std::vector<double> v(n);
    if (restart_seq == 0) {
      std::fill(v.begin(), v.end(), 1.0);
    } else {
      for (int i = 0; i < n; ++i) v[i] = std::cos((restart_seq * 0.7548776662 + 1.0) * (i + 1));
    }
    ++restart_seq;
    return v;
  };

  auto b_orthogonalize = [&](std::vector<double>& w) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double c = dot(w, bq[i]);
        for (int r = 0; r < n; ++r) w[r] -= c * q[i][r];
      }
    }
  };

  auto push_vector = [&](std::vector<double> w) -> bool {
    std::vector<double> bw = b_mul(w);
    const double nrm = std::sqrt(dot(w, bw));
    if (!(nrm > 1e-13)) return false;
    for (int r = 0; r < n; ++r) {
      w[r] /= nrm;
      bw[r] /= nrm;
    }
    q.push_back(std::move(w));
    bq.push_back(std::move(bw));
    return true;
  };

  {
    std::vector<double> v0 = fresh_direction();
    if (!push_vector(std::move(v0))) throw Error("smallest_eigenpairs: empty mass matrix");
  }

  Spectrum best;
  const int m_budget = std::min(n, max_iter);
  // block boundaries at which the Ritz extraction runs
  int next_check = std::min(n, std::max(2 * k + 10, 20));

  while (true) {
    // extend the basis to next_check columns
    while (static_cast<int>(alpha.size()) < next_check) {
      const int j = static_cast<int>(alpha.size());
      std::vector<double> w = solve_a(bq[j]);
      const double a = dot(w, bq[j]);
      alpha.push_back(a);
      for (int r = 0; r < n; ++r) w[r] -= a * q[j][r];
      if (j > 0) {
        for (int r = 0; r < n; ++r) w[r] -= beta[j - 1] * q[j - 1][r];
      }
      b_orthogonalize(w);
      std::vector<double> bw = b_mul(w);
      const double b = std::sqrt(std::max(dot(w, bw), 0.0));
      if (static_cast<int>(alpha.size()) >= n) break;
      if (b > 1e-12 * std::abs(a)) {
        beta.push_back(b);
        for (int r = 0; r < n; ++r) {
          w[r] /= b;
          bw[r] /= b;
        }
        q.push_back(std::move(w));
        bq.push_back(std::move(bw));
      } else {
        // invariant subspace: restart in a fresh deterministic direction
        std::vector<double> v = fresh_direction();
        b_orthogonalize(v);
        if (!push_vector(std::move(v))) break;
        beta.push_back(0.0);
      }
    }

    const int m = static_cast<int>(alpha.size());
    std::vector<double> theta;
    std::vector<std::vector<double>> s;
    tridiagonal_eigen(alpha, beta, theta, s);

    // largest theta of the shift-inverted operator <-> smallest lambda
    Spectrum spec;
    for (int idx = m - 1; idx >= 0 && static_cast<int>(spec.eigenvalues.size()) < k; --idx) {
      if (!(theta[idx] > 0.0)) continue;
      DiscreteField f;
      f.operator_id = op.id;
      f.coefficients.assign(n, 0.0);
      for (int j = 0; j < m; ++j) {
        const double c = s[idx][j];
        for (int r = 0; r < n; ++r) f.coefficients[r] += c * q[j][r];
      }
      // B-normalize and fix the sign on the largest-magnitude entry
      std::vector<double> bf = b_mul(f.coefficients);
      const double nrm = std::sqrt(dot(f.coefficients, bf));
      int imax = 0;
      for (int r = 0; r < n; ++r) {
        if (std::abs(f.coefficients[r]) > std::abs(f.coefficients[imax])) imax = r;
      }
      const double sgn = f.coefficients[imax] >= 0 ? 1.0 : -1.0;
      for (int r = 0; r < n; ++r) f.coefficients[r] *= sgn / nrm;
      const double lambda = 1.0 / theta[idx];
      spec.eigenvalues.push_back(lambda);
      spec.residuals.push_back(residual_norm(op, lambda, f));
      spec.eigenvectors.push_back(std::move(f));
    }

    const bool all_converged =
        static_cast<int>(spec.eigenvalues.size()) == k &&
        std::all_of(spec.residuals.begin(), spec.residuals.end(),
                    [&](double r) { return r <= tol; });
    best = std::move(spec);
    if (all_converged) break;
    if (m >= m_budget) {
      throw NoConvergence("smallest_eigenpairs: basis budget exhausted at " +
                          std::to_string(m) + " columns");
    }
    next_check = std::min(m_budget, m + std::max(10, k));
  }
  return best;
}

}  // namespace perfospec
