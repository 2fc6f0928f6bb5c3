#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.
// Nothing here calls into the engine's linear algebra; the determinant and
// rank-correlation helpers are written out by hand so they can serve as
// cross-checks.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "msdpp/attributes.hpp"

namespace msdpp::testing {

/// Determinant by Gaussian elimination with partial pivoting.
inline double lu_determinant(Matrix a) {
  const auto n = a.rows();
  double det = 1.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (Eigen::Index j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      det = -det;
    }
    det *= a(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (Eigen::Index j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

/// Random SPD matrix G G^T / dim + shift I.
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index dim, double shift = 0.1) {
  std::normal_distribution<double> nd;
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = nd(rng);
  Matrix s = g * g.transpose() / static_cast<double>(dim);
  s.diagonal().array() += shift;
  return 0.5 * (s + s.transpose());
}

/// Unit-diagonal SPD kernel from random points via inverse distance.
inline Matrix random_kernel(std::mt19937_64& rng, Eigen::Index n, Eigen::Index dim = 3,
                            double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix pts(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) pts(i, j) = nd(rng);
  return unit_diagonal_kernel(inverse_distance_similarity(pts));
}

inline std::string item_id(std::size_t i) {
  std::string s = std::to_string(i);
  return "c" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

/// Bundle assembled directly from kernels; similarity and kernel coincide.
inline SimilarityBundle make_bundle(const std::vector<Matrix>& kernels, const Vector& relevance,
                                    const std::vector<AttributeSpec>& specs) {
  SimilarityBundle b;
  for (Eigen::Index i = 0; i < relevance.size(); ++i)
    b.candidate_ids.push_back(item_id(static_cast<std::size_t>(i)));
  for (std::size_t a = 0; a < kernels.size(); ++a)
    b.sources.push_back({specs[a], Matrix(), kernels[a], kernels[a]});
  b.relevance = relevance;
  return b;
}

inline std::vector<AttributeSpec> specs_for(std::size_t count,
                                            const std::vector<double>& weights = {},
                                            const std::vector<Direction>& dirs = {}) {
  std::vector<AttributeSpec> out;
  for (std::size_t a = 0; a < count; ++a) {
    AttributeSpec s;
    s.name = "a" + std::to_string(a);
    s.kind = AttributeKind::generic;
    s.weight = weights.empty() ? 1.0 : weights[a];
    s.direction = dirs.empty() ? Direction::increase : dirs[a];
    out.push_back(s);
  }
  return out;
}

inline Vector random_relevance(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = u(rng);
  return r;
}

/// Ranks with ties sharing their average position (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace msdpp::testing
