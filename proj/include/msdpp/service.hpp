#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msdpp/dataio.hpp"

namespace msdpp {

enum class RerankMethod { msdpp, mmr, kdpp, clustering, none };

std::string to_string(RerankMethod method);
RerankMethod parse_rerank_method(const std::string& text);

inline constexpr std::size_t kTimeBins = 24;
inline constexpr std::size_t kLatBins = 18;
inline constexpr std::size_t kLonBins = 36;

/// Validation failure tied to a field of a request document.
class FieldError : public ValidationError {
 public:
  FieldError(std::string field, const std::string& message)
      : ValidationError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Per-request parameter overrides. Attribute overrides are keyed by name.
struct RerankOverrides {
  struct Attribute {
    std::optional<Direction> direction;
    std::optional<double> weight;
  };
  std::optional<double> theta;
  std::optional<std::size_t> k;
  std::optional<TnMode> tn_mode;
  std::map<std::string, Attribute> attributes;
};

struct RerankRequest {
  std::string query_id;
  RerankMethod method = RerankMethod::msdpp;
  RerankOverrides overrides;
  bool include_diagnostics = false;
};

struct WeightSweepRequest {
  std::string attribute;
  std::vector<double> weights;  ///< empty: 0, 0.1, ..., 1
  std::vector<double> thetas;   ///< empty: configured theta
  std::vector<TnMode> tn_modes; ///< empty: configured mode
  std::vector<std::string> query_ids;  ///< empty: all queries
  RerankOverrides overrides;           ///< applied before sweeping
};

/// Parses a request body; errors carry the offending field path.
RerankRequest rerank_request_from_json(const Json& j);
WeightSweepRequest sweep_request_from_json(const Json& j);
RerankOverrides overrides_from_json(const Json& j, const std::string& path = "overrides");

/// Copy of `base` with overrides applied and validated.
TaskConfig apply_overrides(const TaskConfig& base, const RerankOverrides& overrides);

/// Immutable data every command and request reads from.
struct Snapshot {
  TaskConfig config;
  std::vector<ImageRecord> gallery;
  std::vector<Query> queries;

  Snapshot(TaskConfig config, std::vector<ImageRecord> gallery, std::vector<Query> queries);

  const Query& query(const std::string& id) const;  ///< throws UnknownQuery
  const ImageRecord& image(const std::string& id) const;

 private:
  std::map<std::string, std::size_t> query_index_;
  std::map<std::string, std::size_t> image_index_;
};

class UnknownQuery : public ValidationError {
 public:
  explicit UnknownQuery(const std::string& id)
      : ValidationError("unknown query id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

std::array<std::size_t, kTimeBins> time_histogram(const Snapshot& snap,
                                                  const std::vector<std::string>& ids);
std::vector<std::vector<std::size_t>> location_heat(const Snapshot& snap,
                                                    const std::vector<std::string>& ids);

SimilarityBundle bundle_for_query(const Snapshot& snap, const Query& query,
                                  const TaskConfig& config);

RankedList run_method(const SimilarityBundle& bundle, const TaskConfig& config,
                      RerankMethod method);

/// Retrieval score of one ranking, or nullopt when the query lacks the
/// ground truth the configured metric needs.
std::optional<double> retrieval_score(const Query& query, const std::vector<std::string>& ids,
                                      const TaskConfig& config);

/// One rerank response document (ranked ids, metrics, histograms).
Json rerank_query(const Snapshot& snap, const Query& query, const TaskConfig& config,
                  RerankMethod method, bool include_diagnostics);

Json handle_rerank(const Snapshot& snap, const RerankRequest& request);

/// Rerank every query (or the listed ones) and return response documents in
/// query order. `threads` > 1 processes queries in parallel.
std::vector<Json> cmd_rerank(const Snapshot& snap, RerankMethod method,
                             const std::vector<std::string>& only_queries = {},
                             unsigned threads = 1, bool include_diagnostics = false);

/// Aggregate report over rerank responses. With a gallery in `snap` the
/// diversity metrics are recomputed from the ranked ids; otherwise the
/// normalized scores stored in the responses are used.
Json cmd_eval(const std::vector<Json>& results, const Snapshot& snap, bool recompute_diversity);

/// Configured weights with `attribute` set to w and the rest sharing 1 - w
/// in proportion to their configured weights.
std::vector<AttributeSpec> sweep_weights(const std::vector<AttributeSpec>& specs,
                                         const std::string& attribute, double w);

Json weight_sweep(const Snapshot& snap, const TaskConfig& config,
                  const WeightSweepRequest& request);

/// Grid search over thetas x tn modes x per-attribute weights (normalized)
/// from the config's sweep section; reports every point and the best HM.
Json grid_sweep(const Snapshot& snap);

/// Weight sweep when an attribute is given (argument or config), grid
/// search otherwise.
Json cmd_sweep(const Snapshot& snap, const std::optional<std::string>& attribute);

std::vector<double> default_weight_grid();

}  // namespace msdpp
