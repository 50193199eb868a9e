#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "idfc/error.hpp"

namespace idfc {

// 75% quantile of the standard normal; MAD/z75 is consistent for the
// standard deviation under normality.
constexpr double kZ75 = 0.674489750196082;

enum class ScaleMode {
  Target,     // MAD about the median over the full sample
  Regressor,  // MAD computed excluding observations equal to the median
};

struct RobustScaleParams {
  double median = 0.0;
  double mad_adj = 0.0;  // MAD / z75

  bool degenerate() const { return !(mad_adj > 0.0); }
};

inline double sample_median(std::span<const double> xs) {
  if (xs.empty()) throw Error("median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double med = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  return med;
}

// Robust location/scale of a calibration sample. A constant target series is
// an error (nothing to normalize); a constant regressor column comes back
// degenerate and is dropped by the caller.
inline RobustScaleParams fit_robust_scale(std::span<const double> series, ScaleMode mode) {
  if (series.size() < 2) throw Error("fit_robust_scale: need at least 2 observations");
  const double med = sample_median(series);
  std::vector<double> dev;
  dev.reserve(series.size());
  for (double x : series) {
    if (mode == ScaleMode::Regressor && x == med) continue;
    dev.push_back(std::abs(x - med));
  }
  double mad = 0.0;
  if (!dev.empty()) mad = sample_median(dev);
  RobustScaleParams params{med, mad / kZ75};
  if (mode == ScaleMode::Target && params.degenerate())
    throw Error("fit_robust_scale: degenerate (constant) target series");
  return params;
}

// asinh of the median-normalized price.
inline double forward_transform(double value, const RobustScaleParams& p) {
  return std::asinh((value - p.median) / p.mad_adj);
}

// sinh of the point forecast, rescaled. Ignores the forecast distribution.
inline double inverse_naive(double y_hat, const RobustScaleParams& p) {
  return std::sinh(y_hat) * p.mad_adj + p.median;
}

// In-sample residuals of the transformed-scale fit; drive the expectation
// form of the backward transform.
struct ResidualStore {
  std::vector<double> residuals;
};

// Mean of sinh over the residual-shifted forecast, rescaled.
inline double inverse_expected(double y_hat, const ResidualStore& store,
                               const RobustScaleParams& p) {
  if (store.residuals.empty()) throw Error("inverse_expected: empty residual store");
  double acc = 0.0;
  for (double e : store.residuals) acc += std::sinh(y_hat + e);
  return acc / static_cast<double>(store.residuals.size()) * p.mad_adj + p.median;
}

// ---------------------------------------------------------------------------
// Standardization for the penalized solvers (population standard deviation).

struct Standardized {
  Eigen::MatrixXd x;              // kept columns only, each mean 0 / sd 1
  std::vector<double> mean;       // per kept column
  std::vector<double> sd;         // per kept column
  std::vector<int> kept_cols;     // indices into the original matrix
  std::vector<int> dropped_cols;  // zero-variance columns
};

inline Standardized standardize(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw Error("standardize: need at least 2 rows");
  const auto n = x.rows();
  Standardized out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd <= 1e-12 * (1.0 + std::abs(mean))) {
      out.dropped_cols.push_back(static_cast<int>(j));
      continue;
    }
    kept.push_back(j);
    out.mean.push_back(mean);
    out.sd.push_back(sd);
    out.kept_cols.push_back(static_cast<int>(j));
  }
  out.x.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k)
    out.x.col(static_cast<Eigen::Index>(k)) = (x.col(kept[k]).array() - out.mean[k]) / out.sd[k];
  return out;
}

// Exact inverse of standardize() on the kept columns (tests and rescaling).
inline Eigen::MatrixXd de_standardize(const Standardized& s) {
  Eigen::MatrixXd x(s.x.rows(), s.x.cols());
  for (Eigen::Index j = 0; j < s.x.cols(); ++j)
    x.col(j) = s.x.col(j).array() * s.sd[static_cast<std::size_t>(j)] +
               s.mean[static_cast<std::size_t>(j)];
  return x;
}

}  // namespace idfc
