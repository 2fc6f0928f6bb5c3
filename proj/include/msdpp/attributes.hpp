#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msdpp/spd_linalg.hpp"

namespace msdpp {

struct ImageRecord {
  std::string id;
  std::vector<double> appearance;
  std::optional<double> time_minutes;
  std::optional<double> lat_deg;
  std::optional<double> lon_deg;
  std::map<std::string, std::vector<double>> extra;

  bool operator==(const ImageRecord&) const = default;
};

enum class AttributeKind { appearance, time, geo, generic };

/// Refinement direction: +1 raises an attribute's diversity, -1 lowers it.
enum class Direction : int { decrease = -1, increase = +1 };

inline double sign(Direction d) { return static_cast<int>(d); }

std::string to_string(AttributeKind kind);
AttributeKind parse_attribute_kind(const std::string& text);

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::appearance;
  Direction direction = Direction::increase;
  double weight = 1.0;

  bool operator==(const AttributeSpec&) const = default;
};

/// Copy of `specs` with weights rescaled to sum to 1. Throws when a weight
/// is negative or all weights are zero.
std::vector<AttributeSpec> normalize_weights(std::vector<AttributeSpec> specs);

/// One attribute over the candidate set.
struct AttributeSource {
  AttributeSpec spec;
  Matrix embeddings;  ///< one row per candidate
  Matrix similarity;  ///< inverse-distance similarity, unit diagonal, unrepaired
  Matrix kernel;      ///< SPD-repaired similarity with unit diagonal
};

struct SimilarityBundle {
  std::vector<std::string> candidate_ids;
  std::vector<AttributeSource> sources;
  Vector relevance;  ///< raw scores, candidate order

  std::size_t size() const { return candidate_ids.size(); }
  /// Throws ValidationError when no source carries this name.
  const AttributeSource& source(const std::string& name) const;
};

struct EmbeddingOptions {
  /// Map the day onto the full circle (2*pi) instead of the half circle.
  bool full_circle_time = false;
  double spd_floor = kDefaultSpdFloor;
};

Eigen::Vector2d embed_time(double time_minutes, bool full_circle = false);
Eigen::Vector3d embed_geo(double lat_deg, double lon_deg);

/// Entry (i,j) = 1 / (|e_i - e_j|_2 + 1). Rows of `embeddings` are points.
Matrix inverse_distance_similarity(const Matrix& embeddings);

/// inverse_distance_similarity passed through ensure_spd.
SpdMatrix<double> similarity_matrix(const Matrix& embeddings,
                                    double floor = kDefaultSpdFloor);

/// ensure_spd followed by a rescale back to unit diagonal.
SpdMatrix<double> unit_diagonal_kernel(const Matrix& similarity,
                                       double floor = kDefaultSpdFloor);

/// theta / (2 (1 - theta)), theta in (0, 1).
double relevance_alpha(double theta);

/// Embedded vector of one attribute for one record.
std::vector<double> attribute_embedding(const ImageRecord& record,
                                        const AttributeSpec& spec,
                                        const EmbeddingOptions& options = {});

/// Indices of the top_n records by descending score, ties by ascending id.
std::vector<std::size_t> select_candidates(std::span<const ImageRecord> gallery,
                                           const std::map<std::string, double>& scores,
                                           std::size_t top_n);

SimilarityBundle build_bundle(std::span<const ImageRecord> gallery,
                              const std::map<std::string, double>& scores,
                              std::span<const AttributeSpec> specs, std::size_t top_n,
                              const EmbeddingOptions& options = {});

}  // namespace msdpp
