#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "msdpp/baselines.hpp"
#include "msdpp/metrics.hpp"
#include "msdpp/msdpp_core.hpp"

namespace msdpp {

using Json = nlohmann::json;

struct Query {
  std::string query_id;
  std::optional<std::string> text;
  std::map<std::string, double> relevance;
  std::optional<std::vector<std::string>> relevant_ids;
  std::optional<std::map<std::string, double>> semantic_scores;

  bool operator==(const Query&) const = default;
};

// Newline-delimited records. Blank lines are ignored; errors carry the
// 1-based line number.
std::vector<ImageRecord> read_gallery(std::istream& in, const std::string& source = "gallery");
std::vector<ImageRecord> load_gallery(const std::filesystem::path& path);
void write_gallery(std::ostream& out, std::span<const ImageRecord> records);
void save_gallery(const std::filesystem::path& path, std::span<const ImageRecord> records);

/// When `gallery` is given every referenced image id must exist in it.
std::vector<Query> read_queries(std::istream& in, const std::string& source = "queries",
                                std::span<const ImageRecord> gallery = {});
std::vector<Query> load_queries(const std::filesystem::path& path,
                                std::span<const ImageRecord> gallery = {});
void write_queries(std::ostream& out, std::span<const Query> queries);
void save_queries(const std::filesystem::path& path, std::span<const Query> queries);

ImageRecord image_record_from_json(const Json& j);
Json to_json(const ImageRecord& record);
Query query_from_json(const Json& j);
Json to_json(const Query& query);

struct BaselineSettings {
  double lambda = 0.5;  ///< MMR
  double theta = 0.5;   ///< k-DPP
  std::size_t num_clusters = 40;
  std::optional<BaselineMode> mode;
};

struct SweepGrid {
  std::optional<std::string> attribute;
  std::vector<double> weights;
  std::vector<double> thetas;
  std::vector<TnMode> tn_modes;
};

struct TaskConfig {
  RerankConfig rerank;
  EmbeddingOptions embedding;
  RetrievalKind retrieval = RetrievalKind::map;
  std::size_t ncs_k = 10;
  BaselineSettings baseline;
  SweepGrid sweep;
  std::uint64_t seed = 0;

  BaselineConfig baseline_config(BaselineMethod method) const;
  void validate() const;
};

TaskConfig task_config_from_json(const Json& j);
Json to_json(const TaskConfig& config);
TaskConfig load_task_config(const std::filesystem::path& path);

AttributeSpec attribute_spec_from_json(const Json& j);
Json to_json(const AttributeSpec& spec);
Direction parse_direction(const Json& j);

struct SyntheticPlan {
  std::uint64_t seed = 0;
  std::size_t n_items = 200;
  std::size_t d_appearance = 8;
  std::size_t clusters = 4;
  std::size_t n_queries = 8;
  bool with_time = true;
  bool with_geo = true;
  double cluster_separation = 3.0;  ///< scale of blob centers
  double cluster_spread = 1.0;      ///< per-item appearance noise
  double time_spread_minutes = 120.0;
  double geo_spread_deg = 5.0;
  double relevance_noise = 0.02;

  void validate() const;
};

struct SyntheticData {
  std::vector<ImageRecord> gallery;
  std::vector<Query> queries;
  std::vector<std::size_t> labels;  ///< generating blob per gallery item
};

SyntheticData gen_synthetic(const SyntheticPlan& plan);

}  // namespace msdpp
