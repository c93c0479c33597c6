#include "ccm/nash.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ccm/lp.hpp"

namespace ccm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Barrier objective  -sum log w  -  tau * sum log(n - G^T w).
double barrier(const MatrixXd& G, const VectorXd& w, double tau, double nn) {
  if ((w.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  const VectorXd s = VectorXd::Constant(G.cols(), nn) - G.transpose() * w;
  if ((s.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  return -w.array().log().sum() - tau * s.array().log().sum();
}

// Approximate optimal payoff from the dual  min -sum log w  s.t.  G^T w <= n.
VectorXd coarse_payoff(const MatrixXd& G, std::size_t& iterations) {
  const double nn = static_cast<double>(G.rows());
  const double gg = static_cast<double>(G.cols());
  VectorXd w = VectorXd::Constant(G.rows(), 0.5);
  constexpr std::size_t kMaxNewton = 4000;
  for (double tau = 1.0; gg * tau >= 1e-11; tau *= 0.1) {
    for (int inner = 0; inner < 100; ++inner) {
      if (++iterations > kMaxNewton) throw NumericalError("log-sum maximization: barrier method did not converge");
      const VectorXd inv_s = (VectorXd::Constant(G.cols(), nn) - G.transpose() * w).cwiseInverse();
      const VectorXd grad = -w.cwiseInverse() + tau * G * inv_s;
      MatrixXd H = tau * G * inv_s.cwiseProduct(inv_s).asDiagonal() * G.transpose();
      H.diagonal() += w.cwiseProduct(w).cwiseInverse();
      const VectorXd step = H.ldlt().solve(-grad);
      if (!step.allFinite()) break;
      const double decrement = -grad.dot(step);
      if (!(decrement > 1e-13)) break;
      const double f0 = barrier(G, w, tau, nn);
      double a = 1.0;
      while (a > 1e-12 && !(barrier(G, w + a * step, tau, nn) <= f0 - 0.25 * a * decrement)) a *= 0.5;
      if (a <= 1e-12) break;
      w += a * step;
    }
  }
  return w.cwiseInverse();
}

// Basic weights reaching the ray through `x`:  max t  s.t.  t x <= G lambda,  sum lambda <= 1.
VectorXd basic_weights(const MatrixXd& G, const VectorXd& x) {
  const std::size_t n = G.rows();
  const std::size_t g = G.cols();
  lp::LinearProgram prog{Vec(g + 1, 0.0), Matrix(n + 1, g + 1), Vec(n + 1, 0.0)};
  prog.objective[g] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < g; ++j) prog.constraints(i, j) = -G(i, j);
    prog.constraints(i, g) = x[i];
  }
  for (std::size_t j = 0; j < g; ++j) prog.constraints(n, j) = 1.0;
  prog.rhs[n] = 1.0;
  const lp::Solution s = lp::solve(prog);
  if (s.status != lp::Status::optimal) throw NumericalError("log-sum maximization: weight recovery LP " + lp::to_string(s.status));
  VectorXd lam(g);
  for (std::size_t j = 0; j < g; ++j) lam[j] = s.primal[j];
  if (!(lam.sum() > 0.0)) throw NumericalError("log-sum maximization: weight recovery LP returned zero weights");
  return lam / lam.sum();
}

double log_sum(const MatrixXd& G, const VectorXd& lam) {
  const VectorXd x = G * lam;
  if ((x.array() <= 0.0).any()) return -std::numeric_limits<double>::infinity();
  return x.array().log().sum();
}

// Active-set Newton on  max sum log(G lambda)  over the simplex, warm-started
// at a sparse lambda. Columns enter when they violate the first-order
// condition and leave when their weight reaches zero.
void polish(const MatrixXd& G, VectorXd& lam) {
  const double nn = static_cast<double>(G.rows());
  const std::size_t g = G.cols();
  for (int round = 0; round < 100; ++round) {
    std::vector<Eigen::Index> active;
    for (std::size_t j = 0; j < g; ++j)
      if (lam[j] > 0.0) active.push_back(static_cast<Eigen::Index>(j));

    for (int it = 0; it < 100; ++it) {
      const Eigen::Index m = static_cast<Eigen::Index>(active.size());
      const VectorXd x = G * lam;
      const VectorXd inv_x = x.cwiseInverse();
      MatrixXd K = MatrixXd::Zero(m + 1, m + 1);
      VectorXd rhs = VectorXd::Zero(m + 1);
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto ca = G.col(active[a]);
        rhs[a] = ca.dot(inv_x);
        for (Eigen::Index b = 0; b < m; ++b)
          K(a, b) = (ca.cwiseProduct(inv_x)).dot(G.col(active[b]).cwiseProduct(inv_x));
        K(a, m) = K(m, a) = 1.0;
      }
      const VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
      VectorXd d = VectorXd::Zero(g);
      for (Eigen::Index a = 0; a < m; ++a) d[active[a]] = sol[a];
      if (!d.allFinite()) throw NumericalError("log-sum maximization: singular polish system");
      if (d.lpNorm<Eigen::Infinity>() < 1e-15) break;

      double step = 1.0;
      for (Eigen::Index j : active)
        if (d[j] < 0.0) step = std::min(step, -lam[j] / d[j]);
      const double f0 = log_sum(G, lam);
      while (step > 1e-14 && log_sum(G, lam + step * d) < f0 - 1e-15 * std::abs(f0)) step *= 0.5;
      lam += step * d;
      std::vector<Eigen::Index> keep;
      for (Eigen::Index j : active) {
        if (lam[j] <= 1e-14) lam[j] = 0.0;
        else keep.push_back(j);
      }
      lam /= lam.sum();
      if (keep.size() != active.size()) {
        active = std::move(keep);
        continue;
      }
      if (step <= 1e-14) break;
    }

    const VectorXd inv_x = (G * lam).cwiseInverse();
    Eigen::Index entering = -1;
    double worst = nn + 1e-12;
    for (std::size_t j = 0; j < g; ++j) {
      if (lam[j] > 0.0) continue;
      const double ratio = G.col(static_cast<Eigen::Index>(j)).dot(inv_x);
      if (ratio > worst) {
        worst = ratio;
        entering = static_cast<Eigen::Index>(j);
      }
    }
    if (entering < 0) return;
    // Enter with a small weight so the next Newton round can grow it.
    lam *= 1.0 - 1e-6;
    lam[entering] = 1e-6;
  }
  throw NumericalError("log-sum maximization: active-set polish did not settle");
}

}  // namespace

LogSumMaximum maximize_log_sum(const Matrix& gains) {
  const std::size_t n = gains.rows();
  const std::size_t g = gains.cols();
  if (n == 0 || g == 0) throw InvalidInput("log-sum maximization: empty gain matrix");

  MatrixXd G(n, g);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = 0.0;
    for (std::size_t j = 0; j < g; ++j) {
      const double v = gains(i, j);
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("log-sum maximization: gains must be finite and nonnegative");
      mx = std::max(mx, v);
    }
    if (!(mx > 0.0)) throw InvalidInput("log-sum maximization: agent " + std::to_string(i) + " has no positive gain");
    for (std::size_t j = 0; j < g; ++j) G(i, j) = gains(i, j) / mx;
  }

  LogSumMaximum out;
  const VectorXd xc = coarse_payoff(G, out.iterations);
  VectorXd lam = basic_weights(G, xc);
  polish(G, lam);

  out.weights.assign(g, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < g; ++j) {
    if (lam[j] > tol::kSupport) {
      out.weights[j] = lam[j];
      total += lam[j];
    }
  }
  for (double& v : out.weights) v /= total;

  const double nn = static_cast<double>(n);
  out.payoff.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < g; ++j) out.payoff[i] += gains(i, j) * out.weights[j];
  for (std::size_t j = 0; j < g; ++j) {
    double ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) ratio += gains(i, j) / out.payoff[i];
    const double gap = ratio - nn;
    out.condition_residual = std::max(out.condition_residual, out.weights[j] > 0.0 ? std::abs(gap) : gap);
  }
  return out;
}

}  // namespace ccm
