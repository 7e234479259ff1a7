#include "tcboost/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "tcboost/error.hpp"

namespace tcboost::metrics {

double accuracy(std::span<const int> predicted, std::span<const int> y) {
  if (predicted.size() != y.size()) throw ValidationError("accuracy: length mismatch");
  if (y.empty()) throw ValidationError("accuracy: empty data");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += predicted[i] == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

double accuracy_of_scores(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size()) throw ValidationError("accuracy: length mismatch");
  if (y.empty()) throw ValidationError("accuracy: empty data");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += (scores[i] >= 0.0 ? 1 : -1) == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

double accuracy(const engine::EnsembleModel& model, const data::BinaryDataset& data) {
  if (data.size() == 0) throw ValidationError("accuracy: empty data");
  const auto pred = engine::predict(model, data);
  return accuracy(pred, data.y());
}

double nonzero_threshold(std::span<const double> w) {
  double top = 0.0;
  for (double v : w) top = std::max(top, v);
  return std::max(1e-6 * top, 1e-9);
}

std::size_t sparsity(std::span<const double> w) {
  const double tol = nonzero_threshold(w);
  return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [&](double v) { return v > tol; }));
}

std::size_t sparsity(const engine::EnsembleModel& model) { return sparsity(model.weights); }

std::vector<double> margins(const engine::EnsembleModel& model, const data::BinaryDataset& data) {
  double total = 0.0;
  for (double w : model.weights) total += w;
  if (!(total > 0.0)) throw ValidationError("margins: weights sum to zero");
  auto f = engine::decision_values(model, data);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = data.label(i) * f[i] / total;
  return f;
}

std::vector<CdfPoint> margin_cdf(std::span<const double> margins) {
  if (margins.empty()) throw ValidationError("margin_cdf: no margins");
  std::vector<double> sorted(margins.begin(), margins.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  std::vector<CdfPoint> out;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
    out.push_back({sorted[k], static_cast<double>(k + 1) / m});
  }
  return out;
}

void write_cdf_csv(const std::vector<CdfPoint>& cdf, std::ostream& out) {
  out.precision(17);
  out << kCdfHeader << '\n';
  for (const auto& p : cdf) out << p.margin << ',' << p.cum_frac << '\n';
}

void write_cdf_csv(const std::vector<CdfPoint>& cdf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_cdf_csv(cdf, out);
}

}  // namespace tcboost::metrics
