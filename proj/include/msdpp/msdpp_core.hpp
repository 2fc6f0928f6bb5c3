#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msdpp/attributes.hpp"

namespace msdpp {

/// Tangent Normalization mode.
///   off  - plain weighted sum of matrix logarithms
///   tv   - each attribute tangent rescaled to the relevance tangent norm b
///   tv_m - additionally rescale the weighted sum to norm b
enum class TnMode { off, tv, tv_m };

std::string to_string(TnMode mode);
TnMode parse_tn_mode(const std::string& text);

struct RerankConfig {
  double theta = 0.9;
  std::size_t k = 20;
  std::size_t top_n = 200;
  TnMode tn_mode = TnMode::off;
  std::vector<AttributeSpec> specs;
  /// Workers used to score candidates within one greedy step.
  unsigned threads = 1;

  /// Throws ValidationError on theta/k/top_n/weights violations.
  void validate() const;
};

struct UnifiedTangent {
  SymMatrix<double> matrix;
  /// Norm of the relevance tangent, |logm diag(exp(alpha r))|_F = alpha |r|_2.
  double b = 0.0;
  /// Per attribute (config order): b/|logm S_i|_F, 0 for dropped terms, 1 without TN.
  std::vector<double> scales;
  /// Rescale applied to the summed tangent (tv_m only), 1 otherwise.
  double sum_scale = 1.0;
  /// False when TN was requested but b == 0 forced the plain sum.
  bool tn_applied = false;
};

/// Weighted tangent-space sum of the attributes' log-similarity submatrices.
UnifiedTangent unified_tangent(const SimilarityBundle& bundle,
                               std::span<const std::size_t> subset,
                               const RerankConfig& config);

/// log f_ms(subset) = 2 alpha sum(r) + trace(unified tangent).
double f_ms_log(const SimilarityBundle& bundle, std::span<const std::size_t> subset,
                const RerankConfig& config);

/// Cholesky-only evaluation, valid for tn_mode == off:
/// 2 alpha sum(r) + sum_i s_i w_i log det S_i[subset].
double f_ms_log_fast(const SimilarityBundle& bundle, std::span<const std::size_t> subset,
                     const RerankConfig& config);

struct StepDiagnostics {
  std::string id;
  std::size_t index = 0;
  double objective = 0.0;  ///< log f_ms of the list after this step
  double gain = 0.0;       ///< objective minus previous objective
  std::vector<double> attribute_log_det;  ///< per attribute, log det S_i[Y_g]
  std::vector<double> tn_scales;          ///< empty when TN is off
};

struct RankedList {
  std::vector<std::string> ids;
  std::vector<std::size_t> indices;  ///< positions in bundle.candidate_ids
  std::vector<StepDiagnostics> steps;
};

/// Candidate order used to break exact ties: higher relevance first, then
/// ascending id. Returns true when a should be preferred over b.
bool prefer_candidate(const SimilarityBundle& bundle, std::size_t a, std::size_t b);

/// Greedy MAP selection of config.k items maximizing log f_ms.
RankedList greedy_rerank(const SimilarityBundle& bundle, const RerankConfig& config);

}  // namespace msdpp
