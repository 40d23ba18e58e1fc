#include "labo/eval/wrench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace labo {

WrenchCone WrenchCone::build(const std::vector<Contact>& contacts, const Vec3& com, double mu) {
  WrenchCone cone;
  cone.columns.reserve(contacts.size() * kConeEdges);
  for (const auto& c : contacts) {
    const Vec3 n = normalized(c.normal);
    // Deterministic tangent basis.
    const Vec3 helper = std::fabs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 t1 = normalized(cross(n, helper));
    const Vec3 t2 = cross(n, t1);
    const Vec3 arm = c.point - com;
    for (int e = 0; e < kConeEdges; ++e) {
      const double phi = 2.0 * 3.14159265358979323846 * e / kConeEdges;
      const Vec3 f = n + mu * (std::cos(phi) * t1 + std::sin(phi) * t2);
      const Vec3 tau = cross(arm, f);
      cone.columns.push_back({f.x, f.y, f.z, tau.x, tau.y, tau.z});
    }
  }
  return cone;
}

ConeProjection project_onto_cone(const WrenchCone& cone, const std::array<double, 6>& target) {
  const int n = static_cast<int>(cone.columns.size());
  ConeProjection out;
  out.multipliers.assign(n, 0.0);

  Eigen::Map<const Eigen::Matrix<double, 6, 1>> w(target.data());
  if (n == 0) {
    out.force_residual = {target[0], target[1], target[2]};
    out.torque_residual = {target[3], target[4], target[5]};
    out.residual_norm = w.norm();
    return out;
  }

  Eigen::MatrixXd A(6, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < 6; ++i) A(i, j) = cone.columns[j][i];
  }

  // Lawson-Hanson NNLS. The passive set stays small (rank <= 6); the
  // least-squares subproblem is solved with a rank-revealing QR so linearly
  // dependent entering columns are handled.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<int> passive;
  std::vector<char> in_passive(n, 0);
  std::vector<char> banned(n, 0);  // rank-deficient entries that made no progress
  Eigen::VectorXd resid = w;
  const double scale = std::max(1.0, w.norm());
  const double grad_tol = 1e-10 * scale * std::max(1.0, A.norm());
  const int max_outer = 3 * n + 30;

  for (int outer = 0; outer < max_outer; ++outer) {
    // Most-violating inactive column.
    Eigen::VectorXd grad = A.transpose() * resid;
    int best = -1;
    double best_g = grad_tol;
    for (int j = 0; j < n; ++j) {
      if (!in_passive[j] && !banned[j] && grad[j] > best_g) {
        best_g = grad[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive.push_back(best);
    in_passive[best] = 1;

    for (int inner = 0; inner < max_outer; ++inner) {
      const int p = static_cast<int>(passive.size());
      Eigen::MatrixXd Ap(6, p);
      for (int k = 0; k < p; ++k) Ap.col(k) = A.col(passive[k]);
      Eigen::VectorXd s = Ap.colPivHouseholderQr().solve(w);

      bool all_pos = true;
      for (int k = 0; k < p; ++k) {
        if (s[k] <= 1e-12) {
          all_pos = false;
          break;
        }
      }
      if (all_pos) {
        for (int k = 0; k < p; ++k) x[passive[k]] = s[k];
        break;
      }
      // Step toward s until the first passive coordinate hits zero.
      double alpha = 1.0;
      for (int k = 0; k < p; ++k) {
        if (s[k] <= 1e-12) {
          const double xk = x[passive[k]];
          const double denom = xk - s[k];
          if (denom > 0.0) alpha = std::min(alpha, xk / denom);
        }
      }
      for (int k = 0; k < p; ++k) {
        x[passive[k]] += alpha * (s[k] - x[passive[k]]);
      }
      // Drop zeroed columns.
      std::vector<int> keep;
      for (int k = 0; k < p; ++k) {
        if (x[passive[k]] > 1e-12) {
          keep.push_back(passive[k]);
        } else {
          x[passive[k]] = 0.0;
          in_passive[passive[k]] = 0;
        }
      }
      passive = std::move(keep);
      if (passive.empty()) break;
    }

    const double old_norm = resid.norm();
    resid = w - A * x;
    if (resid.norm() <= 1e-12 * scale) break;
    if (resid.norm() < old_norm - 1e-14 * scale) {
      std::fill(banned.begin(), banned.end(), 0);
    } else if (!in_passive[best]) {
      // Entered and was dropped immediately (dependent column); skip it
      // until the residual changes.
      banned[best] = 1;
    } else {
      break;  // numerically stalled at the optimum
    }
  }

  const Eigen::VectorXd r = w - A * x;
  out.residual_norm = r.norm();
  out.force_residual = {r[0], r[1], r[2]};
  out.torque_residual = {r[3], r[4], r[5]};
  for (int j = 0; j < n; ++j) out.multipliers[j] = x[j];
  return out;
}

namespace {

// Recursive subset enumeration: tries every size-k combination of columns.
bool try_subsets(const Eigen::MatrixXd& A, const Eigen::VectorXd& w, std::vector<int>& pick,
                 int start, int k, double tol) {
  const int n = static_cast<int>(A.cols());
  if (static_cast<int>(pick.size()) == k) {
    Eigen::MatrixXd As(6, k);
    for (int i = 0; i < k; ++i) As.col(i) = A.col(pick[i]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
    if (qr.rank() < k) return false;  // dependent subset; a smaller size covers it
    const Eigen::VectorXd lambda = qr.solve(w);
    if ((As * lambda - w).norm() > tol) return false;
    for (int i = 0; i < k; ++i) {
      if (lambda[i] < -1e-9) return false;
    }
    return true;
  }
  for (int j = start; j <= n - (k - static_cast<int>(pick.size())); ++j) {
    pick.push_back(j);
    if (try_subsets(A, w, pick, j + 1, k, tol)) return true;
    pick.pop_back();
  }
  return false;
}

}  // namespace

bool cone_contains_enumerated(const WrenchCone& cone, const std::array<double, 6>& target,
                              double tol) {
  const int n = static_cast<int>(cone.columns.size());
  Eigen::Map<const Eigen::Matrix<double, 6, 1>> w(target.data());
  const double scale = std::max(1.0, w.norm());
  if (w.norm() <= tol * scale) return true;
  if (n == 0) return false;

  Eigen::MatrixXd A(6, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < 6; ++i) A(i, j) = cone.columns[j][i];
  }
  // By Caratheodory for cones, membership implies a representation over a
  // linearly independent subset of at most 6 columns.
  for (int k = 1; k <= std::min(6, n); ++k) {
    std::vector<int> pick;
    if (try_subsets(A, w, pick, 0, k, tol * scale)) return true;
  }
  return false;
}

}  // namespace labo
