#include "msdpp/msdpp_core.hpp"

#include <cmath>
#include <future>
#include <limits>

namespace msdpp {

namespace {

constexpr double kDegenerateNorm = 1e-12;

struct Term {
  const Matrix* kernel;
  double coeff;  // s_i * w_i
};

std::vector<Term> resolve_terms(const SimilarityBundle& bundle, const RerankConfig& config) {
  const auto specs = normalize_weights(config.specs);
  std::vector<Term> terms;
  terms.reserve(specs.size());
  for (const auto& spec : specs)
    terms.push_back({&bundle.source(spec.name).kernel, sign(spec.direction) * spec.weight});
  return terms;
}

void check_subset(const SimilarityBundle& bundle, std::span<const std::size_t> subset) {
  if (subset.empty()) throw ValidationError("subset must not be empty");
  for (auto i : subset)
    if (i >= bundle.size())
      throw ValidationError("subset index " + std::to_string(i) + " out of range");
}

double relevance_term(const SimilarityBundle& bundle, std::span<const std::size_t> subset,
                      double alpha) {
  double sum = 0.0;
  for (auto i : subset) sum += bundle.relevance(static_cast<Eigen::Index>(i));
  return 2.0 * alpha * sum;
}

double relevance_tangent_norm(const SimilarityBundle& bundle,
                              std::span<const std::size_t> subset, double alpha) {
  double sq = 0.0;
  for (auto i : subset) {
    const double v = alpha * bundle.relevance(static_cast<Eigen::Index>(i));
    sq += v * v;
  }
  return std::sqrt(sq);
}

UnifiedTangent tangent_for_terms(const SimilarityBundle& bundle, std::span<const Term> terms,
                                 std::span<const std::size_t> subset,
                                 const RerankConfig& config) {
  const double alpha = relevance_alpha(config.theta);
  const auto n = static_cast<Eigen::Index>(subset.size());
  UnifiedTangent out;
  out.matrix = Matrix::Zero(n, n);
  out.b = relevance_tangent_norm(bundle, subset, alpha);
  out.tn_applied = config.tn_mode != TnMode::off && out.b > 0.0;

  for (const auto& term : terms) {
    const Matrix log_sim = matrix_log(principal_submatrix(*term.kernel, subset));
    double scale = 1.0;
    if (out.tn_applied) {
      const double norm = frobenius_norm(log_sim);
      scale = norm > kDegenerateNorm ? out.b / norm : 0.0;
    }
    out.scales.push_back(scale);
    out.matrix.noalias() += (term.coeff * scale) * log_sim;
  }

  if (out.tn_applied && config.tn_mode == TnMode::tv_m) {
    const double norm = frobenius_norm(out.matrix);
    if (norm > kDegenerateNorm) {
      out.sum_scale = out.b / norm;
      out.matrix *= out.sum_scale;
    }
  }
  return out;
}

double fast_for_terms(const SimilarityBundle& bundle, std::span<const Term> terms,
                      std::span<const std::size_t> subset, double alpha) {
  double value = relevance_term(bundle, subset, alpha);
  if (subset.size() == 1) return value;  // unit diagonal: log det of a 1x1 is 0
  for (const auto& term : terms) {
    if (term.coeff == 0.0) continue;
    value += term.coeff * log_det(principal_submatrix(*term.kernel, subset));
  }
  return value;
}

}  // namespace

std::string to_string(TnMode mode) {
  switch (mode) {
    case TnMode::off: return "off";
    case TnMode::tv: return "tv";
    case TnMode::tv_m: return "tv_m";
  }
  return "off";
}

TnMode parse_tn_mode(const std::string& text) {
  if (text == "off") return TnMode::off;
  if (text == "tv") return TnMode::tv;
  if (text == "tv_m") return TnMode::tv_m;
  throw ValidationError("unknown tn_mode '" + text + "' (expected off, tv or tv_m)");
}

void RerankConfig::validate() const {
  relevance_alpha(theta);
  if (k == 0) throw ValidationError("k must be positive");
  if (top_n == 0) throw ValidationError("top_n must be positive");
  if (k > top_n)
    throw ValidationError("k (" + std::to_string(k) + ") exceeds top_n (" +
                          std::to_string(top_n) + ")");
  normalize_weights(specs);
}

UnifiedTangent unified_tangent(const SimilarityBundle& bundle,
                               std::span<const std::size_t> subset,
                               const RerankConfig& config) {
  check_subset(bundle, subset);
  const auto terms = resolve_terms(bundle, config);
  return tangent_for_terms(bundle, terms, subset, config);
}

double f_ms_log(const SimilarityBundle& bundle, std::span<const std::size_t> subset,
                const RerankConfig& config) {
  const double alpha = relevance_alpha(config.theta);
  return relevance_term(bundle, subset, alpha) +
         unified_tangent(bundle, subset, config).matrix.trace();
}

double f_ms_log_fast(const SimilarityBundle& bundle, std::span<const std::size_t> subset,
                     const RerankConfig& config) {
  if (config.tn_mode != TnMode::off)
    throw ContractError("f_ms_log_fast is only valid with tn_mode=off");
  check_subset(bundle, subset);
  const auto terms = resolve_terms(bundle, config);
  return fast_for_terms(bundle, terms, subset, relevance_alpha(config.theta));
}

bool prefer_candidate(const SimilarityBundle& bundle, std::size_t a, std::size_t b) {
  const double ra = bundle.relevance(static_cast<Eigen::Index>(a));
  const double rb = bundle.relevance(static_cast<Eigen::Index>(b));
  if (ra != rb) return ra > rb;
  return bundle.candidate_ids[a] < bundle.candidate_ids[b];
}

RankedList greedy_rerank(const SimilarityBundle& bundle, const RerankConfig& config) {
  relevance_alpha(config.theta);
  if (config.k == 0) throw ValidationError("k must be positive");
  if (config.k > bundle.size())
    throw ValidationError("k (" + std::to_string(config.k) + ") exceeds the " +
                          std::to_string(bundle.size()) + " available candidates");
  const auto terms = resolve_terms(bundle, config);
  const double alpha = relevance_alpha(config.theta);
  const bool fast = config.tn_mode == TnMode::off;

  auto evaluate = [&](std::span<const std::size_t> subset) {
    if (fast) return fast_for_terms(bundle, terms, subset, alpha);
    return relevance_term(bundle, subset, alpha) +
           tangent_for_terms(bundle, terms, subset, config).matrix.trace();
  };

  const std::size_t n = bundle.size();
  std::vector<bool> taken(n, false);
  std::vector<double> scores(n);
  RankedList out;
  double previous = 0.0;

  auto score_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> trial(out.indices);
    trial.push_back(0);
    for (std::size_t j = begin; j < end; ++j) {
      if (taken[j]) continue;
      trial.back() = j;
      const double v = evaluate(trial);
      scores[j] = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(n)));
  for (std::size_t step = 0; step < config.k; ++step) {
    if (workers == 1) {
      score_range(0, n);
    } else {
      std::vector<std::future<void>> jobs;
      const std::size_t chunk = (n + workers - 1) / workers;
      for (std::size_t begin = 0; begin < n; begin += chunk)
        jobs.push_back(std::async(std::launch::async, score_range, begin,
                                  std::min(n, begin + chunk)));
      for (auto& job : jobs) job.get();
    }

    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      if (best == n || scores[j] > scores[best] ||
          (scores[j] == scores[best] && prefer_candidate(bundle, j, best)))
        best = j;
    }

    taken[best] = true;
    out.indices.push_back(best);
    out.ids.push_back(bundle.candidate_ids[best]);

    StepDiagnostics diag;
    diag.id = bundle.candidate_ids[best];
    diag.index = best;
    diag.objective = scores[best];
    diag.gain = scores[best] - previous;
    previous = scores[best];
    for (const auto& term : terms)
      diag.attribute_log_det.push_back(
          out.indices.size() == 1 ? 0.0 : log_det(principal_submatrix(*term.kernel, out.indices)));
    if (!fast) diag.tn_scales = tangent_for_terms(bundle, terms, out.indices, config).scales;
    out.steps.push_back(std::move(diag));
  }
  return out;
}

}  // namespace msdpp
