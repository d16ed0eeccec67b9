#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mer/matrix.hpp"

namespace mer {

enum class Kernel { Rbf, Linear };

struct SvrParams {
  double C = 1.0;
  double epsilon = 0.2;
  Kernel kernel = Kernel::Rbf;
  double gamma = 0.0;  // <= 0 means "auto": 1 / (D * Var(X))
  double tol = 1e-3;
  std::size_t max_passes = 0;  // 0 means 10 * N sweeps
};

struct SvrModel {
  Matrix support_vectors;              // S x D
  std::vector<std::size_t> support_indices;  // rows of the training matrix
  std::vector<double> dual_coeffs;     // beta_s = alpha_s - alpha*_s, |beta| <= C
  double bias = 0.0;
  SvrParams params;                  // with gamma resolved
  bool converged = true;
  double kkt_residual_at_exit = 0.0;
  std::size_t n_train = 0;
};

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& z, double gamma);

// Resolve gamma "auto" to 1 / (D * Var(X)), where Var is the variance of all
// entries of X.
double resolve_gamma(const SvrParams& params, const Matrix& X);

// Trains the epsilon-SVR dual by pairwise coordinate optimization over the
// maximal-KKT-violating pair. Deterministic; `seed` is accepted for interface
// uniformity but the solver itself draws no randomness.
SvrModel train_svr(const Matrix& X, const std::vector<double>& y, const SvrParams& params,
                   std::uint64_t seed = 0);

std::vector<double> predict_svr(const SvrModel& model, const Matrix& X);

// Dual objective of the trained model, 1/2 b'Kb + eps*sum|b| - y'b, used by
// the grid-search cross-checks.
double dual_objective(const SvrModel& model, const Matrix& X, const std::vector<double>& y);

// Maximum violation of the dual KKT conditions in beta form, measured on the
// training data.
double kkt_residual(const SvrModel& model, const Matrix& X, const std::vector<double>& y);

// Permutation importance: mean decrease in held-out R^2 when a feature column
// is shuffled, averaged over `folds` CV folds. The linear kernel takes the
// |w_j| fast path instead.
std::vector<double> svr_feature_importance(const SvrParams& params, const Matrix& X,
                                           const std::vector<double>& y, std::size_t folds,
                                           std::uint64_t seed);

// |w_j| = |sum_s beta_s x_{s,j}| for a linear-kernel model.
std::vector<double> svr_linear_weights(const SvrModel& model);

}  // namespace mer
