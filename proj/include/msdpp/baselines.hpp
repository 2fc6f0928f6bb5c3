#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msdpp/msdpp_core.hpp"

namespace msdpp {

enum class BaselineMethod { mmr, kdpp, clustering };

/// increase: every attribute is diversified. mixed: at least one attribute
/// is to become less diverse.
enum class BaselineMode { increase, mixed };

std::string to_string(BaselineMethod method);
BaselineMethod parse_baseline_method(const std::string& text);
std::string to_string(BaselineMode mode);
BaselineMode parse_baseline_mode(const std::string& text);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kdpp;
  /// lambda for MMR, theta for k-DPP; unused by clustering.
  double lambda_or_theta = 0.5;
  std::size_t num_clusters = 40;
  std::size_t k = 20;
  std::vector<AttributeSpec> specs;
  /// Derived from the attribute directions when unset.
  std::optional<BaselineMode> mode;

  BaselineMode effective_mode() const;
  void validate() const;
};

/// Top-k by relevance with the shared tie-break.
RankedList relevance_rerank(const SimilarityBundle& bundle, std::size_t k);

/// Maximal marginal relevance: (1 - lambda) r_j - lambda max_y sim(j, y),
/// where sim = sum_i s_i w_i sim_i.
RankedList mmr_rerank(const SimilarityBundle& bundle, const BaselineConfig& config);

/// Kernel sum_i s_i w_i S_i (SPD-repaired when indefinite) used by k-DPP.
Matrix kdpp_kernel(const SimilarityBundle& bundle, const std::vector<AttributeSpec>& specs);

/// Greedy argmax of log det(R_Y S_Y R_Y), R = diag(exp(alpha r)).
RankedList kdpp_rerank(const SimilarityBundle& bundle, const BaselineConfig& config);

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Matrix centroids;
  int iterations = 0;
};

/// Lloyd's k-means with farthest-point seeding starting from `first_seed`.
/// Stops after max_iterations or when no centroid moves more than tol.
KMeansResult kmeans(const Matrix& points, std::size_t clusters, std::size_t first_seed,
                    int max_iterations = 50, double tol = 1e-8);

/// Candidate features: attribute embeddings scaled by s_i w_i, concatenated.
Matrix concatenated_features(const SimilarityBundle& bundle,
                             const std::vector<AttributeSpec>& specs);

RankedList clustering_rerank(const SimilarityBundle& bundle, const BaselineConfig& config);

RankedList run_baseline(const SimilarityBundle& bundle, const BaselineConfig& config);

}  // namespace msdpp
