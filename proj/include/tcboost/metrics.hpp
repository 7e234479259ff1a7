#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tcboost/dataset.hpp"
#include "tcboost/engine.hpp"

namespace tcboost::metrics {

/// Fraction of examples whose predicted label (ties -> +1) equals y.
double accuracy(const engine::EnsembleModel& model, const data::BinaryDataset& data);
double accuracy(std::span<const int> predicted, std::span<const int> y);
/// Accuracy of sign(scores) with 0 -> +1.
double accuracy_of_scores(std::span<const double> scores, std::span<const int> y);

/// max(1e-6 * max_j w_j, 1e-9)
double nonzero_threshold(std::span<const double> w);
/// Number of weights strictly above `nonzero_threshold(w)`.
std::size_t sparsity(std::span<const double> w);
std::size_t sparsity(const engine::EnsembleModel& model);

/// rho_i = y_i sum_j wbar_j h_j(x_i), wbar = w / sum(w).
std::vector<double> margins(const engine::EnsembleModel& model, const data::BinaryDataset& data);

struct CdfPoint {
  double margin = 0.0;
  double cum_frac = 0.0;
};

/// One point per distinct margin: (value, #{rho <= value} / M).
std::vector<CdfPoint> margin_cdf(std::span<const double> margins);

inline constexpr const char* kCdfHeader = "margin,cum_frac";
void write_cdf_csv(const std::vector<CdfPoint>& cdf, std::ostream& out);
void write_cdf_csv(const std::vector<CdfPoint>& cdf, const std::string& path);

}  // namespace tcboost::metrics
