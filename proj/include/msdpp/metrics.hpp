#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "msdpp/attributes.hpp"

namespace msdpp {

inline constexpr double kVendiOrder = 0.1;

/// Vendi score of order q: exp of the order-q Renyi entropy of the
/// eigenvalues of K/n. Ranges over [1, n] for unit-diagonal PSD K.
double vendi_score(const Matrix& similarity, double q = kVendiOrder);

double harmonic_mean(double x, double y);
/// n / sum(1/x_i); 0 if any value is 0.
double harmonic_mean(std::span<const double> values);

struct AttributeDiversity {
  std::string name;
  double vendi = 0.0;       ///< raw VS_q of the top-k submatrix
  double normalized = 0.0;  ///< VS/k (increase) or 1 - VS/k (decrease)
};

struct DiversityReport {
  std::vector<AttributeDiversity> attributes;
  double dm = 0.0;
};

/// Per-attribute normalized Vendi score of the first k entries of `ranked`
/// (indices into the bundle) and their harmonic mean.
DiversityReport diversity_metric(std::span<const std::size_t> ranked,
                                 const SimilarityBundle& bundle,
                                 std::span<const AttributeSpec> specs, std::size_t k,
                                 double q = kVendiOrder);

/// AP over the whole ranking; the denominator is min(|relevant|, |ranking|).
double average_precision(std::span<const std::string> ranking,
                         const std::set<std::string>& relevant);

/// Mean AP over queries; queries without relevant items are skipped.
double mean_average_precision(const std::vector<std::vector<std::string>>& rankings,
                              const std::vector<std::set<std::string>>& relevant);

/// Sum of semantic scores in the top k over the best achievable sum.
double ncs_at_k(std::span<const std::string> ranking,
                const std::map<std::string, double>& semantic_scores, std::size_t k = 10);

enum class PrsVariant {
  literal,     ///< sum of normalized slopes
  mean_slope,  ///< literal / (T - 1); not part of the reference definition
};

/// Preference Reflection Score over a weight sweep. div_values are min-max
/// normalized; steps with equal consecutive weights contribute 0.
double prs(std::span<const double> div_values, std::span<const double> weights,
           PrsVariant variant = PrsVariant::literal);

enum class RetrievalKind { map, ncs_at_k };

std::string to_string(RetrievalKind kind);
RetrievalKind parse_retrieval_kind(const std::string& text);

struct EvalReport {
  RetrievalKind retrieval_kind = RetrievalKind::map;
  double retrieval = 0.0;
  DiversityReport diversity;
  double hm = 0.0;
  std::optional<double> prs;
};

}  // namespace msdpp
