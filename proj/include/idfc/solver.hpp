#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "idfc/error.hpp"
#include "idfc/transform.hpp"

namespace idfc {

// Penalized least squares:
//
//   sum_d (y_d - x_d' b)^2 + alpha * lambda * sum_i pf_i |b_i|
//                          + (1 - alpha)/2 * lambda * sum_i pf_i b_i^2
//
// The residual sum of squares is unnormalized (no 1/n or 1/2 factor); lambda
// grids are defined on that scale. Coordinate updates therefore use the
// soft threshold at alpha*lambda*pf/2 and the ridge shift (1-alpha)*lambda*pf/2.

struct LambdaGrid {
  std::vector<double> values;  // strictly positive, strictly decreasing

  void validate() const {
    if (values.empty()) throw Error("lambda grid is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0)) throw Error("lambda grid values must be positive");
      if (i > 0 && !(values[i] < values[i - 1]))
        throw Error("lambda grid must be strictly decreasing");
    }
  }

  // 2^i over an equidistant grid of `count` exponents from lo to hi.
  static LambdaGrid exponential_base2(double lo = -10.0, double hi = 4.0, int count = 100) {
    LambdaGrid g;
    g.values.reserve(static_cast<std::size_t>(count));
    for (int k = count - 1; k >= 0; --k) {
      const double e = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
      g.values.push_back(std::pow(2.0, e));
    }
    g.validate();
    return g;
  }

  // 10^{-(19-i)/6}, i = 1..10 (descending).
  static LambdaGrid autoregressive_base10() {
    LambdaGrid g;
    for (int i = 10; i >= 1; --i) g.values.push_back(std::pow(10.0, -(19.0 - i) / 6.0));
    g.validate();
    return g;
  }
};

struct PenaltyConfig {
  double alpha = 1.0;                      // 1 = lasso, 0.5 = even elastic net
  std::vector<double> penalty_factor;      // empty = all ones; 0 = unpenalized
  std::optional<int> fixed_offset_index;   // coefficient pinned to 1 (pipeline)
};

struct SolverOptions {
  double tol = 1e-9;          // max absolute coefficient change per sweep
  int max_sweeps = 0;         // 0 = max(1000, 10*p)
  bool check_objective = true;  // verify per-sweep monotonicity
};

struct SparseCoef {
  int index;
  double value;
};

struct PathPoint {
  double lambda = 0.0;
  std::vector<SparseCoef> coefs;  // engine-space indices
  double rss = 0.0;
  int sweeps = 0;
  bool converged = true;
};

// n ln(rss/n) + df ln(n); rss floored to dodge log(0) on exact fits.
inline double bic(double rss, std::int64_t n, int df) {
  if (n <= 0) throw Error("bic: n must be positive");
  if (rss < 0) throw Error("bic: negative rss");
  const double r = std::max(rss, 1e-12);
  return static_cast<double>(n) * std::log(r / static_cast<double>(n)) +
         static_cast<double>(df) * std::log(static_cast<double>(n));
}

// Smallest BIC wins; ties resolve toward the larger lambda (sparser model).
// The grid is descending, so the first minimal index is the tie-break.
inline int select_lambda(const std::vector<double>& bic_values) {
  if (bic_values.empty()) throw Error("select_lambda: empty BIC vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(bic_values.size()); ++i)
    if (bic_values[static_cast<std::size_t>(i)] < bic_values[static_cast<std::size_t>(best)])
      best = i;
  return best;
}

namespace detail {

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

struct PathState {
  Eigen::VectorXd beta;
  Eigen::VectorXd residual;
  std::vector<std::string> warnings;
};

}  // namespace detail

// Coordinate-descent path over a descending lambda grid with warm starts and
// active-set cycling. X and y are used exactly as given: no standardization,
// no intercept. Columns with zero norm keep zero coefficients.
inline std::vector<PathPoint> cd_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const LambdaGrid& grid, const PenaltyConfig& cfg,
                                      const SolverOptions& opts = {},
                                      std::vector<std::string>* warnings = nullptr) {
  grid.validate();
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw Error("alpha must lie in [0, 1]");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw Error("cd_path: dimension mismatch");
  std::vector<double> pf(static_cast<std::size_t>(p), 1.0);
  if (!cfg.penalty_factor.empty()) {
    if (static_cast<Eigen::Index>(cfg.penalty_factor.size()) != p)
      throw Error("penalty_factor size mismatch");
    pf = cfg.penalty_factor;
  }

  Eigen::VectorXd col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = x.col(j).squaredNorm();

  const int max_sweeps =
      opts.max_sweeps > 0 ? opts.max_sweeps : std::max<int>(1000, 10 * static_cast<int>(p));

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = y;
  std::vector<Eigen::Index> active;

  auto update_coord = [&](Eigen::Index j, double lambda) -> double {
    if (col_sq[j] <= 0.0) return 0.0;
    const double old = beta[j];
    const double z = x.col(j).dot(r) + col_sq[j] * old;
    const double l1 = cfg.alpha * lambda * pf[static_cast<std::size_t>(j)] * 0.5;
    const double l2 = (1.0 - cfg.alpha) * lambda * pf[static_cast<std::size_t>(j)] * 0.5;
    const double next = detail::soft_threshold(z, l1) / (col_sq[j] + l2);
    if (next != old) {
      r.noalias() -= x.col(j) * (next - old);
      beta[j] = next;
    }
    return std::abs(next - old);
  };

  auto objective = [&](double lambda) {
    double pen = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double f = pf[static_cast<std::size_t>(j)];
      pen += cfg.alpha * lambda * f * std::abs(beta[j]) +
             0.5 * (1.0 - cfg.alpha) * lambda * f * beta[j] * beta[j];
    }
    return r.squaredNorm() + pen;
  };

  std::vector<PathPoint> path;
  path.reserve(grid.values.size());

  for (double lambda : grid.values) {
    int sweeps = 0;
    bool converged = false;
    double prev_obj = opts.check_objective ? objective(lambda) : 0.0;

    while (sweeps < max_sweeps && !converged) {
      // Full sweep over every coordinate.
      double max_delta = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) max_delta = std::max(max_delta, update_coord(j, lambda));
      ++sweeps;

      if (opts.check_objective) {
        const double obj = objective(lambda);
        if (obj > prev_obj * (1.0 + 1e-10) + 1e-8 && warnings)
          warnings->push_back("objective increased during sweep at lambda=" +
                              std::to_string(lambda));
        prev_obj = obj;
      }

      if (max_delta <= opts.tol) {
        converged = true;
        break;
      }

      // Cycle the active set until stable, then re-verify with a full sweep.
      active.clear();
      for (Eigen::Index j = 0; j < p; ++j)
        if (beta[j] != 0.0) active.push_back(j);
      while (sweeps < max_sweeps) {
        double d = 0.0;
        for (Eigen::Index j : active) d = std::max(d, update_coord(j, lambda));
        ++sweeps;
        if (d <= opts.tol) break;
      }
      if (opts.check_objective) prev_obj = objective(lambda);
    }

    if (!converged && sweeps >= max_sweeps && warnings)
      warnings->push_back("no convergence within " + std::to_string(max_sweeps) +
                          " sweeps at lambda=" + std::to_string(lambda));

    PathPoint pt;
    pt.lambda = lambda;
    pt.rss = r.squaredNorm();
    pt.sweeps = sweeps;
    pt.converged = converged;
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta[j] != 0.0) pt.coefs.push_back({static_cast<int>(j), beta[j]});
    path.push_back(std::move(pt));
  }
  return path;
}

// Largest stationarity violation of the documented objective at (x, y, beta).
// For unpenalized coordinates the gradient itself must vanish.
inline double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta, double lambda, double alpha,
                            const std::vector<double>& penalty_factor = {}) {
  const Eigen::Index p = x.cols();
  Eigen::VectorXd r = y - x * beta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (x.col(j).squaredNorm() <= 0.0) continue;
    const double pf = penalty_factor.empty() ? 1.0 : penalty_factor[static_cast<std::size_t>(j)];
    const double g = 2.0 * x.col(j).dot(r);
    double viol;
    if (beta[j] != 0.0) {
      const double sign = beta[j] > 0 ? 1.0 : -1.0;
      viol = std::abs(g - (1.0 - alpha) * lambda * pf * beta[j] - alpha * lambda * pf * sign);
    } else {
      viol = std::max(0.0, std::abs(g) - alpha * lambda * pf);
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// OLS

struct OlsResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  bool rank_deficient = false;  // minimum-norm solution returned
};

inline OlsResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw Error("fit_ols: dimension mismatch");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  OlsResult out;
  out.beta = cod.solve(y);
  out.residuals = y - x * out.beta;
  out.rank_deficient = cod.rank() < std::min(x.rows(), x.cols());
  return out;
}

// ---------------------------------------------------------------------------
// Full estimation pipeline on transformed-scale inputs

// Coefficient path plus BIC selection, with coefficients reported both on the
// standardized scale (variable importance) and the pre-standardization scale
// (prediction). A fixed-offset column is subtracted from the target before
// the fit and reported with coefficient exactly 1.
struct FitResult {
  std::vector<double> lambdas;
  std::vector<PathPoint> path;               // standardized scale, original indices
  std::vector<double> bic_values;
  int selected_index = -1;
  double selected_lambda = 0.0;

  Eigen::VectorXd beta_std;          // per original column; pinned column -> its sd
  Eigen::VectorXd beta_transformed;  // per original column; pinned column -> 1
  double intercept_std = 0.0;
  double intercept_transformed = 0.0;

  std::vector<int> dropped_columns;  // zero-variance inputs
  std::optional<int> pinned_column;
  std::vector<int> sweeps_per_lambda;
  std::vector<std::string> warnings;
  Eigen::VectorXd residuals;  // transformed scale, at the selected lambda
  int nonzero_count = 0;      // df of the selected point (pinned column included)
  std::string method = "cd";  // "cd" or "ols"
  // Nonzero-coefficient count, with unpenalized and pinned columns always
  // counted; recorded so runs are comparable.
  std::string df_rule = "nonzero+unpenalized+pinned";

  double predict_transformed(const Eigen::VectorXd& row) const {
    return intercept_transformed + beta_transformed.dot(row);
  }
};

namespace detail {

// df counts nonzero coefficients; unpenalized columns always count.
inline int path_df(const PathPoint& pt, const std::vector<double>& pf) {
  std::vector<bool> nz(pf.size(), false);
  for (const auto& c : pt.coefs) nz[static_cast<std::size_t>(c.index)] = true;
  int df = 0;
  for (std::size_t j = 0; j < pf.size(); ++j)
    if (nz[j] || pf[j] == 0.0) ++df;
  return df;
}

}  // namespace detail

// X and y live on the transformed scale. Standardization, centering, the
// fixed-offset column and the rescaling of coefficients are handled here.
inline FitResult fit_path(const Eigen::MatrixXd& x_transformed, const Eigen::VectorXd& y_transformed,
                          const LambdaGrid& grid, const PenaltyConfig& cfg,
                          const SolverOptions& opts = {}) {
  const Eigen::Index n = x_transformed.rows();
  const Eigen::Index p = x_transformed.cols();
  if (y_transformed.size() != n) throw Error("fit_path: dimension mismatch");
  if (cfg.fixed_offset_index &&
      (*cfg.fixed_offset_index < 0 || *cfg.fixed_offset_index >= static_cast<int>(p)))
    throw Error("fit_path: fixed_offset_index out of range");

  FitResult res;
  res.pinned_column = cfg.fixed_offset_index;

  // Working copy: subtract the pinned column from the target, drop it from
  // the penalized design.
  Eigen::VectorXd y_work = y_transformed;
  std::vector<int> work_to_orig;
  work_to_orig.reserve(static_cast<std::size_t>(p));
  Eigen::MatrixXd x_work(n, cfg.fixed_offset_index ? p - 1 : p);
  {
    Eigen::Index w = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (cfg.fixed_offset_index && static_cast<int>(j) == *cfg.fixed_offset_index) {
        y_work -= x_transformed.col(j);
        continue;
      }
      x_work.col(w++) = x_transformed.col(j);
      work_to_orig.push_back(static_cast<int>(j));
    }
  }

  Standardized std_x = standardize(x_work);
  for (int dropped : std_x.dropped_cols)
    res.dropped_columns.push_back(work_to_orig[static_cast<std::size_t>(dropped)]);

  const double y_mean = y_work.mean();
  Eigen::VectorXd y_centered = y_work.array() - y_mean;

  std::vector<double> pf(std_x.kept_cols.size(), 1.0);
  if (!cfg.penalty_factor.empty()) {
    if (static_cast<Eigen::Index>(cfg.penalty_factor.size()) != p)
      throw Error("fit_path: penalty_factor size mismatch");
    for (std::size_t k = 0; k < std_x.kept_cols.size(); ++k) {
      const int orig = work_to_orig[static_cast<std::size_t>(std_x.kept_cols[k])];
      pf[k] = cfg.penalty_factor[static_cast<std::size_t>(orig)];
    }
  }

  PenaltyConfig engine_cfg;
  engine_cfg.alpha = cfg.alpha;
  engine_cfg.penalty_factor = pf;

  res.lambdas = grid.values;
  auto engine_path = cd_path(std_x.x, y_centered, grid, engine_cfg, opts, &res.warnings);

  res.bic_values.reserve(engine_path.size());
  res.sweeps_per_lambda.reserve(engine_path.size());
  const int pin_df = cfg.fixed_offset_index ? 1 : 0;
  for (const auto& pt : engine_path) {
    res.bic_values.push_back(bic(pt.rss, n, detail::path_df(pt, pf) + pin_df));
    res.sweeps_per_lambda.push_back(pt.sweeps);
  }
  res.selected_index = select_lambda(res.bic_values);
  res.selected_lambda = grid.values[static_cast<std::size_t>(res.selected_index)];

  // Path points remapped to original column indices.
  res.path.reserve(engine_path.size());
  for (const auto& pt : engine_path) {
    PathPoint mapped = pt;
    for (auto& c : mapped.coefs) {
      const int work = std_x.kept_cols[static_cast<std::size_t>(c.index)];
      c.index = work_to_orig[static_cast<std::size_t>(work)];
    }
    res.path.push_back(std::move(mapped));
  }

  // Selected coefficients on both scales.
  const auto& sel = engine_path[static_cast<std::size_t>(res.selected_index)];
  res.beta_std = Eigen::VectorXd::Zero(p);
  res.beta_transformed = Eigen::VectorXd::Zero(p);
  double intercept_shift = 0.0;
  for (const auto& c : sel.coefs) {
    const std::size_t k = static_cast<std::size_t>(c.index);
    const int orig = work_to_orig[static_cast<std::size_t>(std_x.kept_cols[k])];
    res.beta_std[orig] = c.value;
    res.beta_transformed[orig] = c.value / std_x.sd[k];
    intercept_shift += c.value * std_x.mean[k] / std_x.sd[k];
  }
  res.intercept_std = y_mean;
  res.intercept_transformed = y_mean - intercept_shift;
  res.nonzero_count = detail::path_df(sel, pf) + pin_df;

  if (cfg.fixed_offset_index) {
    const Eigen::Index pin = *cfg.fixed_offset_index;
    res.beta_transformed[pin] = 1.0;
    // Standardized-scale equivalent of a unit transformed-scale coefficient.
    const double mean = x_transformed.col(pin).mean();
    const double sd = std::sqrt((x_transformed.col(pin).array() - mean).square().sum() /
                                static_cast<double>(n));
    res.beta_std[pin] = sd;
  }

  res.residuals = y_transformed - x_transformed * res.beta_transformed -
                  Eigen::VectorXd::Constant(n, res.intercept_transformed);
  return res;
}

// OLS expressed in the same pipeline terms (single path point, lambda 0).
inline FitResult fit_ols_pipeline(const Eigen::MatrixXd& x_transformed,
                                  const Eigen::VectorXd& y_transformed) {
  const Eigen::Index n = x_transformed.rows();
  const Eigen::Index p = x_transformed.cols();
  FitResult res;
  res.method = "ols";
  Standardized std_x = standardize(x_transformed);
  res.dropped_columns = std_x.dropped_cols;
  const double y_mean = y_transformed.mean();
  Eigen::VectorXd y_centered = y_transformed.array() - y_mean;
  OlsResult ols = fit_ols(std_x.x, y_centered);
  if (ols.rank_deficient) res.warnings.push_back("rank-deficient design, minimum-norm solution");

  res.lambdas = {0.0};
  PathPoint pt;
  pt.lambda = 0.0;
  pt.rss = ols.residuals.squaredNorm();
  for (Eigen::Index k = 0; k < ols.beta.size(); ++k)
    if (ols.beta[k] != 0.0) pt.coefs.push_back({std_x.kept_cols[static_cast<std::size_t>(k)],
                                                ols.beta[k]});
  res.path.push_back(pt);
  int df = 0;
  for (Eigen::Index k = 0; k < ols.beta.size(); ++k)
    if (ols.beta[k] != 0.0) ++df;
  res.bic_values = {bic(pt.rss, n, df)};
  res.selected_index = 0;
  res.selected_lambda = 0.0;
  res.sweeps_per_lambda = {1};
  res.nonzero_count = df;

  res.beta_std = Eigen::VectorXd::Zero(p);
  res.beta_transformed = Eigen::VectorXd::Zero(p);
  double intercept_shift = 0.0;
  for (Eigen::Index k = 0; k < ols.beta.size(); ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    const int orig = std_x.kept_cols[kk];
    res.beta_std[orig] = ols.beta[k];
    res.beta_transformed[orig] = ols.beta[k] / std_x.sd[kk];
    intercept_shift += ols.beta[k] * std_x.mean[kk] / std_x.sd[kk];
  }
  res.intercept_std = y_mean;
  res.intercept_transformed = y_mean - intercept_shift;
  res.residuals = y_transformed - x_transformed * res.beta_transformed -
                  Eigen::VectorXd::Constant(n, res.intercept_transformed);
  return res;
}

}  // namespace idfc
