#include "msdpp/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace msdpp {

std::string to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::appearance: return "appearance";
    case AttributeKind::time: return "time";
    case AttributeKind::geo: return "geo";
    case AttributeKind::generic: return "generic";
  }
  return "unknown";
}

AttributeKind parse_attribute_kind(const std::string& text) {
  if (text == "appearance") return AttributeKind::appearance;
  if (text == "time") return AttributeKind::time;
  if (text == "geo") return AttributeKind::geo;
  if (text == "generic") return AttributeKind::generic;
  throw ValidationError("unknown attribute kind '" + text + "'");
}

std::vector<AttributeSpec> normalize_weights(std::vector<AttributeSpec> specs) {
  if (specs.empty()) throw ValidationError("at least one attribute is required");
  double total = 0.0;
  for (const auto& s : specs) {
    if (!std::isfinite(s.weight) || s.weight < 0.0)
      throw ValidationError("attribute '" + s.name + "': weight must be finite and >= 0");
    total += s.weight;
  }
  if (!(total > 0.0)) throw ValidationError("attribute weights sum to zero");
  for (auto& s : specs) s.weight /= total;
  return specs;
}

const AttributeSource& SimilarityBundle::source(const std::string& name) const {
  for (const auto& s : sources)
    if (s.spec.name == name) return s;
  throw ValidationError("bundle has no attribute named '" + name + "'");
}

Eigen::Vector2d embed_time(double time_minutes, bool full_circle) {
  if (!std::isfinite(time_minutes) || time_minutes < 0.0 || time_minutes >= 1440.0)
    throw ValidationError("time_minutes must lie in [0, 1440), got " +
                          std::to_string(time_minutes));
  const double span = full_circle ? 2.0 * std::numbers::pi : std::numbers::pi;
  const double z = time_minutes / 1440.0 * span;
  return {std::cos(z), std::sin(z)};
}

Eigen::Vector3d embed_geo(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || lat_deg < -90.0 || lat_deg > 90.0)
    throw ValidationError("lat_deg must lie in [-90, 90], got " + std::to_string(lat_deg));
  if (!std::isfinite(lon_deg) || lon_deg <= -180.0 || lon_deg > 180.0)
    throw ValidationError("lon_deg must lie in (-180, 180], got " + std::to_string(lon_deg));
  constexpr double kRad = std::numbers::pi / 180.0;
  const double lat = lat_deg * kRad;
  const double lon = lon_deg * kRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

Matrix inverse_distance_similarity(const Matrix& embeddings) {
  const Eigen::Index n = embeddings.rows();
  if (n == 0) throw ValidationError("similarity_matrix: no embeddings");
  Matrix sim(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (embeddings.row(i) - embeddings.row(j)).norm();
      sim(i, j) = sim(j, i) = 1.0 / (d + 1.0);
    }
  }
  return sim;
}

SpdMatrix<double> similarity_matrix(const Matrix& embeddings, double floor) {
  return ensure_spd(inverse_distance_similarity(embeddings), floor);
}

SpdMatrix<double> unit_diagonal_kernel(const Matrix& similarity, double floor) {
  Matrix k = ensure_spd(similarity, floor);
  const Vector inv_sqrt = k.diagonal().array().rsqrt();
  k = inv_sqrt.asDiagonal() * k * inv_sqrt.asDiagonal();
  k = (k + k.transpose()) * 0.5;
  k.diagonal().setOnes();
  return k;
}

double relevance_alpha(double theta) {
  if (!std::isfinite(theta) || theta <= 0.0 || theta >= 1.0)
    throw ValidationError("theta must lie in the open interval (0, 1), got " +
                          std::to_string(theta));
  return theta / (2.0 * (1.0 - theta));
}

std::vector<double> attribute_embedding(const ImageRecord& record, const AttributeSpec& spec,
                                        const EmbeddingOptions& options) {
  auto missing = [&]() {
    return ValidationError("item '" + record.id + "' has no value for attribute '" +
                           spec.name + "'");
  };
  switch (spec.kind) {
    case AttributeKind::appearance:
      if (record.appearance.empty()) throw missing();
      return record.appearance;
    case AttributeKind::time: {
      if (!record.time_minutes) throw missing();
      const auto v = embed_time(*record.time_minutes, options.full_circle_time);
      return {v[0], v[1]};
    }
    case AttributeKind::geo: {
      if (!record.lat_deg || !record.lon_deg) throw missing();
      const auto v = embed_geo(*record.lat_deg, *record.lon_deg);
      return {v[0], v[1], v[2]};
    }
    case AttributeKind::generic: {
      auto it = record.extra.find(spec.name);
      if (it == record.extra.end() || it->second.empty()) throw missing();
      return it->second;
    }
  }
  throw missing();
}

std::vector<std::size_t> select_candidates(std::span<const ImageRecord> gallery,
                                           const std::map<std::string, double>& scores,
                                           std::size_t top_n) {
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> score(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    auto it = scores.find(gallery[i].id);
    if (it == scores.end())
      throw ValidationError("no relevance score for item '" + gallery[i].id + "'");
    if (!std::isfinite(it->second))
      throw ValidationError("non-finite relevance score for item '" + gallery[i].id + "'");
    score[i] = it->second;
  }
  const std::size_t keep = std::min(top_n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (score[a] != score[b]) return score[a] > score[b];
                      return gallery[a].id < gallery[b].id;
                    });
  order.resize(keep);
  return order;
}

SimilarityBundle build_bundle(std::span<const ImageRecord> gallery,
                              const std::map<std::string, double>& scores,
                              std::span<const AttributeSpec> specs, std::size_t top_n,
                              const EmbeddingOptions& options) {
  if (top_n == 0) throw ValidationError("top_n must be positive");
  if (specs.empty()) throw ValidationError("at least one attribute is required");
  const auto picked = select_candidates(gallery, scores, top_n);

  SimilarityBundle bundle;
  bundle.relevance.resize(static_cast<Eigen::Index>(picked.size()));
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const auto& rec = gallery[picked[r]];
    bundle.candidate_ids.push_back(rec.id);
    bundle.relevance(static_cast<Eigen::Index>(r)) = scores.at(rec.id);
  }

  for (const auto& spec : specs) {
    for (const auto& existing : bundle.sources)
      if (existing.spec.name == spec.name)
        throw ValidationError("duplicate attribute name '" + spec.name + "'");
    AttributeSource src;
    src.spec = spec;
    std::size_t dim = 0;
    for (std::size_t r = 0; r < picked.size(); ++r) {
      const auto& rec = gallery[picked[r]];
      const auto e = attribute_embedding(rec, spec, options);
      if (r == 0) {
        dim = e.size();
        src.embeddings.resize(static_cast<Eigen::Index>(picked.size()),
                              static_cast<Eigen::Index>(dim));
      } else if (e.size() != dim) {
        throw ValidationError("attribute '" + spec.name + "' of item '" + rec.id +
                              "' has dimension " + std::to_string(e.size()) + ", expected " +
                              std::to_string(dim));
      }
      for (std::size_t c = 0; c < dim; ++c)
        src.embeddings(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = e[c];
    }
    if (!picked.empty()) {
      src.similarity = inverse_distance_similarity(src.embeddings);
      src.kernel = unit_diagonal_kernel(src.similarity, options.spd_floor);
    }
    bundle.sources.push_back(std::move(src));
  }
  return bundle;
}

}  // namespace msdpp
