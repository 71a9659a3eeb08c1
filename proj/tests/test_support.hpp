#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "vichoice/linalg.hpp"
#include "vichoice/model.hpp"
#include "vichoice/rng.hpp"

namespace vichoice::testing {

inline Rng test_rng(std::uint64_t tag) { return make_stream(0x7e57, tag, 0); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  return scale * standard_normal(rng, rows, cols);
}

inline VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
  return scale * standard_normal(rng, n);
}

// A A' / k + shift I
inline MatrixXd random_spd(Rng& rng, int k, double shift = 0.5) {
  const MatrixXd a = standard_normal(rng, k, k);
  return a * a.transpose() / k + shift * MatrixXd::Identity(k, k);
}

inline MatrixXd random_lower(Rng& rng, int k, double scale = 0.3) {
  MatrixXd l = MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    l(j, j) = uniform(rng, 0.2, 1.0) * scale * 2.0;
    for (int i = j + 1; i < k; ++i) l(i, j) = scale * standard_normal(rng, 1)(0);
  }
  return l;
}

inline AgentData random_agent(Rng& rng, int events, int J, int K, double x_scale = 1.0) {
  AgentData a;
  for (int t = 0; t < events; ++t) {
    a.events.push_back({random_matrix(rng, J, K, x_scale), uniform_int(rng, 0, J - 1)});
  }
  return a;
}

// Max-norm relative error, guarded against tiny references.
inline double rel_err(const VectorXd& a, const VectorXd& b) {
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Central differences.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-5) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-5) {
  const Eigen::Index n = x.size();
  MatrixXd jac(f(x).size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    jac.col(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return jac;
}

// Second central difference along each coordinate.
inline VectorXd fd_hessian_diag(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                                double h = 1e-4) {
  VectorXd d(x.size());
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    d(i) = (f(xp) - 2 * f0 + f(xm)) / (h * h);
  }
  return d;
}

// log|det B| for square B.
inline double log_abs_det(const MatrixXd& b) {
  return std::log(std::abs(b.fullPivLu().determinant()));
}

}  // namespace vichoice::testing
