#include "msdpp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msdpp {

namespace {

std::vector<std::size_t> relevance_order(const SimilarityBundle& bundle) {
  std::vector<std::size_t> order(bundle.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return prefer_candidate(bundle, a, b);
  });
  return order;
}

void check_k(const SimilarityBundle& bundle, std::size_t k) {
  if (k == 0) throw ValidationError("k must be positive");
  if (k > bundle.size())
    throw ValidationError("k (" + std::to_string(k) + ") exceeds the " +
                          std::to_string(bundle.size()) + " available candidates");
}

void push(RankedList& out, const SimilarityBundle& bundle, std::size_t index, double objective) {
  out.indices.push_back(index);
  out.ids.push_back(bundle.candidate_ids[index]);
  StepDiagnostics d;
  d.id = bundle.candidate_ids[index];
  d.index = index;
  d.objective = objective;
  d.gain = out.steps.empty() ? objective : objective - out.steps.back().objective;
  out.steps.push_back(std::move(d));
}

// Greedy argmax over untaken candidates with the shared tie-break.
template <typename Score>
std::size_t argmax_untaken(const SimilarityBundle& bundle, const std::vector<bool>& taken,
                           Score&& score, double& best_value) {
  std::size_t best = bundle.size();
  best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < bundle.size(); ++j) {
    if (taken[j]) continue;
    double v = score(j);
    if (std::isnan(v)) v = -std::numeric_limits<double>::infinity();
    if (best == bundle.size() || v > best_value ||
        (v == best_value && prefer_candidate(bundle, j, best))) {
      best = j;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

std::string to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::mmr: return "mmr";
    case BaselineMethod::kdpp: return "kdpp";
    case BaselineMethod::clustering: return "clustering";
  }
  return "kdpp";
}

BaselineMethod parse_baseline_method(const std::string& text) {
  if (text == "mmr") return BaselineMethod::mmr;
  if (text == "kdpp") return BaselineMethod::kdpp;
  if (text == "clustering") return BaselineMethod::clustering;
  throw ValidationError("unknown baseline method '" + text + "'");
}

std::string to_string(BaselineMode mode) {
  return mode == BaselineMode::increase ? "increase" : "mixed";
}

BaselineMode parse_baseline_mode(const std::string& text) {
  if (text == "increase") return BaselineMode::increase;
  if (text == "mixed") return BaselineMode::mixed;
  throw ValidationError("unknown baseline mode '" + text + "' (expected increase or mixed)");
}

BaselineMode BaselineConfig::effective_mode() const {
  if (mode) return *mode;
  for (const auto& s : specs)
    if (s.direction == Direction::decrease) return BaselineMode::mixed;
  return BaselineMode::increase;
}

void BaselineConfig::validate() const {
  if (k == 0) throw ValidationError("k must be positive");
  normalize_weights(specs);
  switch (method) {
    case BaselineMethod::mmr:
      if (!(lambda_or_theta >= 0.0 && lambda_or_theta <= 1.0))
        throw ValidationError("MMR lambda must lie in [0, 1]");
      break;
    case BaselineMethod::kdpp: relevance_alpha(lambda_or_theta); break;
    case BaselineMethod::clustering:
      if (num_clusters == 0) throw ValidationError("num_clusters must be positive");
      break;
  }
}

RankedList relevance_rerank(const SimilarityBundle& bundle, std::size_t k) {
  check_k(bundle, k);
  const auto order = relevance_order(bundle);
  RankedList out;
  for (std::size_t i = 0; i < k; ++i)
    push(out, bundle, order[i], bundle.relevance(static_cast<Eigen::Index>(order[i])));
  return out;
}

RankedList mmr_rerank(const SimilarityBundle& bundle, const BaselineConfig& config) {
  config.validate();
  check_k(bundle, config.k);
  const auto specs = normalize_weights(config.specs);
  const double lambda = config.lambda_or_theta;
  const auto n = static_cast<Eigen::Index>(bundle.size());

  Matrix sim = Matrix::Zero(n, n);
  for (const auto& spec : specs)
    sim += (sign(spec.direction) * spec.weight) * bundle.source(spec.name).similarity;

  std::vector<bool> taken(bundle.size(), false);
  RankedList out;
  for (std::size_t step = 0; step < config.k; ++step) {
    double value = 0.0;
    const auto best = argmax_untaken(bundle, taken, [&](std::size_t j) {
      const double r = bundle.relevance(static_cast<Eigen::Index>(j));
      if (out.indices.empty()) return (1.0 - lambda) * r;
      double max_sim = -std::numeric_limits<double>::infinity();
      for (auto y : out.indices)
        max_sim = std::max(max_sim, sim(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y)));
      return (1.0 - lambda) * r - lambda * max_sim;
    }, value);
    taken[best] = true;
    push(out, bundle, best, value);
  }
  return out;
}

Matrix kdpp_kernel(const SimilarityBundle& bundle, const std::vector<AttributeSpec>& specs) {
  const auto normalized = normalize_weights(specs);
  const auto n = static_cast<Eigen::Index>(bundle.size());
  Matrix kernel = Matrix::Zero(n, n);
  for (const auto& spec : normalized)
    kernel += (sign(spec.direction) * spec.weight) * bundle.source(spec.name).kernel;
  Eigen::LLT<Matrix> llt(kernel);
  if (llt.info() == Eigen::Success) return kernel;
  return ensure_spd(kernel);
}

RankedList kdpp_rerank(const SimilarityBundle& bundle, const BaselineConfig& config) {
  config.validate();
  check_k(bundle, config.k);
  const double alpha = relevance_alpha(config.lambda_or_theta);
  const Matrix similarity = kdpp_kernel(bundle, config.specs);
  const Vector quality = (alpha * bundle.relevance).array().exp();
  const Matrix kernel = quality.asDiagonal() * similarity * quality.asDiagonal();

  std::vector<bool> taken(bundle.size(), false);
  RankedList out;
  std::vector<std::size_t> trial;
  for (std::size_t step = 0; step < config.k; ++step) {
    trial = out.indices;
    trial.push_back(0);
    double value = 0.0;
    const auto best = argmax_untaken(bundle, taken, [&](std::size_t j) {
      trial.back() = j;
      return log_det(principal_submatrix(kernel, trial));
    }, value);
    taken[best] = true;
    push(out, bundle, best, value);
  }
  return out;
}

KMeansResult kmeans(const Matrix& points, std::size_t clusters, std::size_t first_seed,
                    int max_iterations, double tol) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (clusters == 0 || clusters > n)
    throw ValidationError("kmeans: need 1 <= clusters <= points (" + std::to_string(clusters) +
                          " clusters, " + std::to_string(n) + " points)");
  if (first_seed >= n) throw ValidationError("kmeans: seed index out of range");

  const auto kc = static_cast<Eigen::Index>(clusters);
  KMeansResult res;
  res.centroids.resize(kc, points.cols());
  res.centroids.row(0) = points.row(static_cast<Eigen::Index>(first_seed));
  Vector nearest = (points.rowwise() - res.centroids.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < kc; ++c) {
    Eigen::Index far = 0;
    nearest.maxCoeff(&far);
    res.centroids.row(c) = points.row(far);
    nearest = nearest.cwiseMin((points.rowwise() - res.centroids.row(c)).rowwise().squaredNorm());
  }

  res.assignment.assign(n, 0);
  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (res.centroids.rowwise() - points.row(static_cast<Eigen::Index>(i)))
          .rowwise().squaredNorm().minCoeff(&best);
      res.assignment[i] = static_cast<std::size_t>(best);
    }
    Matrix updated = res.centroids;
    std::vector<std::size_t> counts(clusters, 0);
    Matrix sums = Matrix::Zero(kc, points.cols());
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(res.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[res.assignment[i]];
    }
    for (Eigen::Index c = 0; c < kc; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        updated.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    const double movement = (updated - res.centroids).rowwise().norm().maxCoeff();
    res.centroids = std::move(updated);
    if (movement < tol) break;
  }
  res.iterations = std::min(res.iterations, max_iterations);
  return res;
}

Matrix concatenated_features(const SimilarityBundle& bundle,
                             const std::vector<AttributeSpec>& specs) {
  const auto normalized = normalize_weights(specs);
  Eigen::Index cols = 0;
  for (const auto& spec : normalized) cols += bundle.source(spec.name).embeddings.cols();
  Matrix features(static_cast<Eigen::Index>(bundle.size()), cols);
  Eigen::Index offset = 0;
  for (const auto& spec : normalized) {
    const auto& e = bundle.source(spec.name).embeddings;
    features.middleCols(offset, e.cols()) = (sign(spec.direction) * spec.weight) * e;
    offset += e.cols();
  }
  return features;
}

RankedList clustering_rerank(const SimilarityBundle& bundle, const BaselineConfig& config) {
  config.validate();
  check_k(bundle, config.k);
  const auto order = relevance_order(bundle);
  const auto km = kmeans(concatenated_features(bundle, config.specs), config.num_clusters,
                         order.front());

  // Members listed in relevance order; clusters ranked by mean relevance.
  std::vector<std::vector<std::size_t>> members(config.num_clusters);
  for (auto i : order) members[km.assignment[i]].push_back(i);
  std::vector<std::size_t> ranked;
  std::vector<double> mean(config.num_clusters, 0.0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    for (auto i : members[c]) mean[c] += bundle.relevance(static_cast<Eigen::Index>(i));
    mean[c] /= static_cast<double>(members[c].size());
    ranked.push_back(c);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });

  RankedList out;
  auto take = [&](std::size_t i) {
    push(out, bundle, i, bundle.relevance(static_cast<Eigen::Index>(i)));
  };
  if (config.effective_mode() == BaselineMode::increase) {
    for (std::size_t depth = 0; out.indices.size() < config.k; ++depth)
      for (auto c : ranked)
        if (depth < members[c].size() && out.indices.size() < config.k) take(members[c][depth]);
  } else {
    for (auto c : ranked)
      for (auto i : members[c])
        if (out.indices.size() < config.k) take(i);
  }
  return out;
}

RankedList run_baseline(const SimilarityBundle& bundle, const BaselineConfig& config) {
  switch (config.method) {
    case BaselineMethod::mmr: return mmr_rerank(bundle, config);
    case BaselineMethod::kdpp: return kdpp_rerank(bundle, config);
    case BaselineMethod::clustering: return clustering_rerank(bundle, config);
  }
  throw ValidationError("unknown baseline method");
}

}  // namespace msdpp
