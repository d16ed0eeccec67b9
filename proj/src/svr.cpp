#include "mer/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mer/folds.hpp"
#include "mer/metrics.hpp"
#include "mer/rng.hpp"

namespace mer {

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& z, double gamma) {
  if (x.size() != z.size()) throw std::invalid_argument("rbf_kernel: length mismatch");
  if (gamma <= 0.0) throw std::invalid_argument("rbf_kernel: gamma must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double resolve_gamma(const SvrParams& params, const Matrix& X) {
  if (params.gamma > 0.0) return params.gamma;
  double mean = 0.0;
  for (double v : X.data) mean += v;
  mean /= static_cast<double>(X.data.size());
  double var = 0.0;
  for (double v : X.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(X.data.size());
  if (var <= 0.0) var = 1.0;
  return 1.0 / (static_cast<double>(X.cols) * var);
}

namespace {

double kernel_value(Kernel kernel, double gamma, const double* a, const double* b,
                    std::size_t d) {
  if (kernel == Kernel::Linear) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double dl = a[i] - b[i];
    d2 += dl * dl;
  }
  return std::exp(-gamma * d2);
}

Matrix gram_matrix(const Matrix& X, Kernel kernel, double gamma) {
  Matrix K(X.rows, X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel_value(kernel, gamma, X.row_ptr(i), X.row_ptr(j), X.cols);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

constexpr double kEta = 1e-12;

}  // namespace

SvrModel train_svr(const Matrix& X, const std::vector<double>& y, const SvrParams& params,
                   std::uint64_t /*seed*/) {
  const std::size_t n = X.rows;
  if (n < 2 || y.size() != n) throw std::invalid_argument("train_svr: need N >= 2 matching rows");
  if (params.C <= 0.0 || params.epsilon < 0.0) throw std::invalid_argument("train_svr: bad params");
  for (double v : X.data)
    if (!std::isfinite(v)) throw std::invalid_argument("train_svr: non-finite input");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("train_svr: non-finite target");

  SvrParams resolved = params;
  resolved.gamma = resolve_gamma(params, X);
  const double C = resolved.C, eps = resolved.epsilon;
  const Matrix K = gram_matrix(X, resolved.kernel, resolved.gamma);

  // Dual variables a[p], p < n: alpha (sign +1), p >= n: alpha* (sign -1).
  // Minimize 1/2 sum a_p a_q s_p s_q K + sum c_p a_p  s.t.  sum s_p a_p = 0,
  // 0 <= a_p <= C, with c_p = eps -+ y.
  const std::size_t m2 = 2 * n;
  std::vector<double> a(m2, 0.0), grad(m2);
  auto sign_of = [n](std::size_t p) { return p < n ? 1.0 : -1.0; };
  for (std::size_t p = 0; p < m2; ++p)
    grad[p] = (p < n) ? eps - y[p] : eps + y[p - n];

  const std::size_t passes = resolved.max_passes ? resolved.max_passes : 10 * n;
  const std::size_t max_iter = passes * n;
  double violation = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Maximal violating pair.
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    std::size_t i = m2, j = m2;
    for (std::size_t p = 0; p < m2; ++p) {
      const double s = sign_of(p);
      const double v = -s * grad[p];
      const bool can_up = (s > 0) ? a[p] < C : a[p] > 0;
      const bool can_low = (s > 0) ? a[p] > 0 : a[p] < C;
      if (can_up && v > up) {
        up = v;
        i = p;
      }
      if (can_low && v < low) {
        low = v;
        j = p;
      }
    }
    violation = up - low;
    if (i == m2 || j == m2 || violation < resolved.tol) {
      converged = violation < resolved.tol;
      break;
    }

    const double si = sign_of(i), sj = sign_of(j);
    const std::size_t ri = i % n, rj = j % n;
    // The step moves beta_ri by +lambda and beta_rj by -lambda whichever side
    // of the pair each variable sits on, so the curvature is sign-free.
    double eta = K(ri, ri) + K(rj, rj) - 2.0 * K(ri, rj);
    if (eta < kEta) eta = kEta;
    double lambda = violation / eta;
    // Box limits: a_i moves by +si*lambda, a_j by -sj*lambda.
    lambda = std::min(lambda, si > 0 ? C - a[i] : a[i]);
    lambda = std::min(lambda, sj > 0 ? a[j] : C - a[j]);
    if (lambda <= 0.0) break;

    const double da_i = si * lambda, da_j = -sj * lambda;
    a[i] += da_i;
    a[j] += da_j;
    for (std::size_t p = 0; p < m2; ++p) {
      const std::size_t rp = p % n;
      grad[p] += sign_of(p) * (si * K(rp, ri) * da_i + sj * K(rp, rj) * da_j);
    }
  }

  // Enforce alpha * alpha_star = 0 exactly; shrinking both by the overlap
  // preserves the equality constraint and beta and never increases the
  // objective.
  for (std::size_t s = 0; s < n; ++s) {
    const double overlap = std::min(a[s], a[s + n]);
    if (overlap > 0.0) {
      a[s] -= overlap;
      a[s + n] -= overlap;
    }
  }

  // Bias from free dual variables; fall back to the violation midpoint.
  double bias_sum = 0.0;
  std::size_t bias_count = 0;
  for (std::size_t p = 0; p < m2; ++p) {
    if (a[p] > 0.0 && a[p] < C) {
      bias_sum += -sign_of(p) * grad[p];
      ++bias_count;
    }
  }
  double bias;
  if (bias_count > 0) {
    bias = bias_sum / static_cast<double>(bias_count);
  } else {
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < m2; ++p) {
      const double s = sign_of(p);
      const double v = -s * grad[p];
      if ((s > 0) ? a[p] < C : a[p] > 0) up = std::max(up, v);
      if ((s > 0) ? a[p] > 0 : a[p] < C) low = std::min(low, v);
    }
    bias = 0.5 * (up + low);
  }

  SvrModel model;
  model.params = resolved;
  model.bias = bias;
  model.converged = converged;
  model.kkt_residual_at_exit = violation;
  model.n_train = n;
  std::vector<std::size_t> support;
  for (std::size_t s = 0; s < n; ++s) {
    const double beta = a[s] - a[s + n];
    if (beta != 0.0) {
      support.push_back(s);
      model.dual_coeffs.push_back(beta);
    }
  }
  model.support_vectors = X.take_rows(support);
  model.support_indices = support;
  return model;
}

std::vector<double> predict_svr(const SvrModel& model, const Matrix& X) {
  if (model.support_vectors.rows > 0 && X.cols != model.support_vectors.cols)
    throw std::invalid_argument("predict_svr: dimension mismatch");
  std::vector<double> out(X.rows, model.bias);
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t s = 0; s < model.support_vectors.rows; ++s) {
      out[i] += model.dual_coeffs[s] *
                kernel_value(model.params.kernel, model.params.gamma,
                             model.support_vectors.row_ptr(s), X.row_ptr(i), X.cols);
    }
  }
  return out;
}

double dual_objective(const SvrModel& model, const Matrix& /*X*/, const std::vector<double>& y) {
  const auto& sv = model.support_vectors;
  double quad = 0.0, lin = 0.0;
  for (std::size_t s = 0; s < sv.rows; ++s) {
    for (std::size_t t = 0; t < sv.rows; ++t) {
      quad += model.dual_coeffs[s] * model.dual_coeffs[t] *
              kernel_value(model.params.kernel, model.params.gamma, sv.row_ptr(s),
                           sv.row_ptr(t), sv.cols);
    }
    lin += model.params.epsilon * std::abs(model.dual_coeffs[s]) -
           y.at(model.support_indices[s]) * model.dual_coeffs[s];
  }
  return 0.5 * quad + lin;
}

double kkt_residual(const SvrModel& model, const Matrix& X, const std::vector<double>& y) {
  if (X.rows != y.size()) throw std::invalid_argument("kkt_residual: length mismatch");
  const double C = model.params.C, eps = model.params.epsilon;
  std::vector<double> beta(X.rows, 0.0);
  for (std::size_t s = 0; s < model.support_indices.size(); ++s)
    beta[model.support_indices[s]] = model.dual_coeffs[s];
  const auto f = predict_svr(model, X);
  double worst = 0.0;
  for (std::size_t s = 0; s < X.rows; ++s) {
    const double r = y[s] - f[s];  // residual above the regression function
    const double b = beta[s];
    double v;
    if (b >= C) {
      v = std::max(0.0, eps - r);  // at upper bound: residual must exceed +eps
    } else if (b <= -C) {
      v = std::max(0.0, eps + r);
    } else if (b > 0.0) {
      v = std::abs(r - eps);
    } else if (b < 0.0) {
      v = std::abs(r + eps);
    } else {
      v = std::max(0.0, std::abs(r) - eps);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

std::vector<double> svr_linear_weights(const SvrModel& model) {
  if (model.params.kernel != Kernel::Linear)
    throw std::invalid_argument("svr_linear_weights: linear kernel required");
  std::vector<double> w(model.support_vectors.cols, 0.0);
  for (std::size_t s = 0; s < model.support_vectors.rows; ++s)
    for (std::size_t j = 0; j < w.size(); ++j)
      w[j] += model.dual_coeffs[s] * model.support_vectors(s, j);
  for (auto& v : w) v = std::abs(v);
  return w;
}

std::vector<double> svr_feature_importance(const SvrParams& params, const Matrix& X,
                                           const std::vector<double>& y, std::size_t folds,
                                           std::uint64_t seed) {
  const std::size_t d = X.cols;
  if (d == 0) throw std::invalid_argument("svr_feature_importance: D >= 1 required");

  if (params.kernel == Kernel::Linear) {
    return svr_linear_weights(train_svr(X, y, params, seed));
  }

  folds = std::min(folds, X.rows);
  if (folds < 2) folds = 2;
  const auto plan = kfold_partition(X.rows, folds, derive_seed(seed, 0x70657266));
  std::vector<double> importance(d, 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    const auto train_idx = plan.train_indices(f);
    const auto test_idx = plan.test_indices(f);
    const auto model = train_svr(X.take_rows(train_idx), take(y, train_idx), params, seed);
    Matrix X_test = X.take_rows(test_idx);
    const auto y_test = take(y, test_idx);
    const double baseline = r2_score(y_test, predict_svr(model, X_test));
    for (std::size_t j = 0; j < d; ++j) {
      Rng rng(derive_seed(seed, f, j));
      auto perm = shuffled_indices(X_test.rows, rng);
      Matrix X_perm = X_test;
      for (std::size_t i = 0; i < X_test.rows; ++i) X_perm(i, j) = X_test(perm[i], j);
      importance[j] += baseline - r2_score(y_test, predict_svr(model, X_perm));
    }
  }
  for (auto& v : importance) v /= static_cast<double>(folds);
  return importance;
}

}  // namespace mer
