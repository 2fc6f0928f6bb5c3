#include "msdpp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <spdlog/spdlog.h>

namespace msdpp {

double vendi_score(const Matrix& similarity, double q) {
  if (similarity.rows() == 0 || similarity.rows() != similarity.cols())
    throw ValidationError("vendi_score: expected a non-empty square matrix");
  if (!(q > 0.0)) throw ValidationError("vendi_score: order q must be positive");
  const double n = static_cast<double>(similarity.rows());
  const Matrix scaled = similarity / n;
  Vector lambda = sym_eig(scaled).eigenvalues;
  // Eigenvalues at round-off level are zero; small q would otherwise inflate them.
  const double tol = n * std::numeric_limits<double>::epsilon() * lambda.cwiseAbs().maxCoeff();
  lambda = (lambda.array() > tol).select(lambda, 0.0);
  if (q == 1.0) {
    double entropy = 0.0;
    for (double l : lambda)
      if (l > 0.0) entropy -= l * std::log(l);
    return std::exp(entropy);
  }
  double sum = 0.0;
  for (double l : lambda)
    if (l > 0.0) sum += std::pow(l, q);
  return std::pow(sum, 1.0 / (1.0 - q));
}

double harmonic_mean(double x, double y) {
  if (x + y == 0.0) return 0.0;
  return 2.0 * x * y / (x + y);
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 2) return harmonic_mean(values[0], values[1]);
  double inv = 0.0;
  for (double v : values) {
    if (v <= 0.0) return 0.0;
    inv += 1.0 / v;
  }
  return static_cast<double>(values.size()) / inv;
}

DiversityReport diversity_metric(std::span<const std::size_t> ranked,
                                 const SimilarityBundle& bundle,
                                 std::span<const AttributeSpec> specs, std::size_t k,
                                 double q) {
  if (k == 0) throw ValidationError("diversity_metric: k must be positive");
  if (ranked.size() < k)
    throw ValidationError("diversity_metric: ranking has " + std::to_string(ranked.size()) +
                          " items, fewer than k=" + std::to_string(k));
  const auto top = ranked.first(k);
  DiversityReport report;
  std::vector<double> normalized;
  for (const auto& spec : specs) {
    AttributeDiversity d;
    d.name = spec.name;
    d.vendi = vendi_score(principal_submatrix(bundle.source(spec.name).similarity, top), q);
    const double ratio = d.vendi / static_cast<double>(k);
    d.normalized = spec.direction == Direction::increase ? ratio : 1.0 - ratio;
    normalized.push_back(d.normalized);
    report.attributes.push_back(std::move(d));
  }
  report.dm = harmonic_mean(normalized);
  return report;
}

double average_precision(std::span<const std::string> ranking,
                         const std::set<std::string>& relevant) {
  if (relevant.empty() || ranking.empty()) return 0.0;
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (relevant.count(ranking[i])) {
      hits += 1.0;
      sum += hits / static_cast<double>(i + 1);
    }
  }
  const auto denom = std::min(relevant.size(), ranking.size());
  return sum / static_cast<double>(denom);
}

double mean_average_precision(const std::vector<std::vector<std::string>>& rankings,
                              const std::vector<std::set<std::string>>& relevant) {
  if (rankings.size() != relevant.size())
    throw ValidationError("mean_average_precision: rankings and relevance sets differ in count");
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    if (relevant[q].empty()) {
      spdlog::warn("query #{} has no relevant items; excluded from MAP", q);
      continue;
    }
    sum += average_precision(rankings[q], relevant[q]);
    ++used;
  }
  return used ? sum / static_cast<double>(used) : 0.0;
}

double ncs_at_k(std::span<const std::string> ranking,
                const std::map<std::string, double>& semantic_scores, std::size_t k) {
  if (k == 0) throw ValidationError("ncs_at_k: k must be positive");
  std::vector<double> all;
  all.reserve(semantic_scores.size());
  for (const auto& [id, s] : semantic_scores) {
    if (!(s >= 0.0)) throw ValidationError("ncs_at_k: negative semantic score for '" + id + "'");
    all.push_back(s);
  }
  const auto cut = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut), all.end(),
                    std::greater<>());
  double ideal = 0.0;
  for (std::size_t i = 0; i < cut; ++i) ideal += all[i];
  if (ideal == 0.0) return 0.0;
  double got = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    auto it = semantic_scores.find(ranking[i]);
    if (it != semantic_scores.end()) got += it->second;
  }
  return got / ideal;
}

double prs(std::span<const double> div_values, std::span<const double> weights,
           PrsVariant variant) {
  if (div_values.size() != weights.size())
    throw ValidationError("prs: div_values and weights differ in length");
  if (div_values.size() < 2) throw ValidationError("prs: need at least two sweep points");
  bool strict = false;
  for (std::size_t j = 1; j < weights.size(); ++j) {
    if (weights[j] < weights[j - 1]) throw ValidationError("prs: weights must be non-decreasing");
    if (weights[j] > weights[j - 1]) strict = true;
  }
  if (!strict) throw ValidationError("prs: weights never increase");

  const auto [lo, hi] = std::minmax_element(div_values.begin(), div_values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return 0.0;
  double total = 0.0;
  double prev = (div_values[0] - *lo) / range;
  for (std::size_t j = 1; j < div_values.size(); ++j) {
    const double cur = (div_values[j] - *lo) / range;
    const double dw = weights[j] - weights[j - 1];
    if (dw > 0.0) total += (cur - prev) / dw;
    prev = cur;
  }
  if (variant == PrsVariant::mean_slope) total /= static_cast<double>(div_values.size() - 1);
  return total;
}

std::string to_string(RetrievalKind kind) {
  return kind == RetrievalKind::map ? "map" : "ncs_at_k";
}

RetrievalKind parse_retrieval_kind(const std::string& text) {
  if (text == "map") return RetrievalKind::map;
  if (text == "ncs_at_k" || text == "ncs") return RetrievalKind::ncs_at_k;
  throw ValidationError("unknown retrieval metric '" + text + "' (expected map or ncs_at_k)");
}

}  // namespace msdpp
