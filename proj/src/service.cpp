#include "msdpp/service.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

namespace msdpp {

namespace {

double number_field(const Json& j, const std::string& path) {
  if (!j.is_number()) throw FieldError(path, "expected a number");
  return j.get<double>();
}

std::vector<double> number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw FieldError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number_field(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string string_field(const Json& j, const std::string& path) {
  if (!j.is_string()) throw FieldError(path, "expected a string");
  return j.get<std::string>();
}

// Metrics of one ranking against one query.
struct QueryEval {
  std::optional<double> retrieval;
  DiversityReport diversity;
};

QueryEval evaluate_ranking(const Query& query, const SimilarityBundle& bundle,
                           const RankedList& ranked, const TaskConfig& config) {
  QueryEval e;
  e.retrieval = retrieval_score(query, ranked.ids, config);
  e.diversity = diversity_metric(ranked.indices, bundle, config.rerank.specs, config.rerank.k);
  return e;
}

Json metrics_json(const TaskConfig& config, const QueryEval& e) {
  Json vs = Json::object();
  Json norm = Json::object();
  for (const auto& a : e.diversity.attributes) {
    vs[a.name] = a.vendi;
    norm[a.name] = a.normalized;
  }
  Json m{{"per_attribute_vs", vs}, {"per_attribute_normalized", norm}, {"dm", e.diversity.dm}};
  if (e.retrieval) {
    m["retrieval"] = Json{{"kind", to_string(config.retrieval)}, {"value", *e.retrieval}};
    m["hm"] = harmonic_mean(*e.retrieval, e.diversity.dm);
  } else {
    m["retrieval"] = nullptr;
    m["hm"] = nullptr;
  }
  return m;
}

Json specs_json(const std::vector<AttributeSpec>& specs) {
  Json out = Json::array();
  for (const auto& s : normalize_weights(specs)) out.push_back(to_json(s));
  return out;
}

Json diagnostics_json(const RankedList& ranked, const std::vector<AttributeSpec>& specs) {
  Json steps = Json::array();
  for (const auto& s : ranked.steps) {
    Json step{{"id", s.id}, {"objective", s.objective}, {"gain", s.gain}};
    if (!s.attribute_log_det.empty()) {
      Json ld = Json::object();
      for (std::size_t i = 0; i < specs.size() && i < s.attribute_log_det.size(); ++i)
        ld[specs[i].name] = s.attribute_log_det[i];
      step["attribute_log_det"] = ld;
    }
    if (!s.tn_scales.empty()) {
      Json sc = Json::object();
      for (std::size_t i = 0; i < specs.size() && i < s.tn_scales.size(); ++i)
        sc[specs[i].name] = s.tn_scales[i];
      step["tn_scales"] = sc;
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

// Mean metrics over queries for one parameter setting.
struct Aggregate {
  std::optional<double> retrieval;
  double dm = 0.0;
  std::map<std::string, double> normalized;
  std::optional<double> hm;
};

Aggregate aggregate(const std::vector<QueryEval>& evals) {
  Aggregate agg;
  if (evals.empty()) return agg;
  double retrieval = 0.0;
  std::size_t with_retrieval = 0;
  for (const auto& e : evals) {
    agg.dm += e.diversity.dm;
    for (const auto& a : e.diversity.attributes) agg.normalized[a.name] += a.normalized;
    if (e.retrieval) {
      retrieval += *e.retrieval;
      ++with_retrieval;
    }
  }
  const double n = static_cast<double>(evals.size());
  agg.dm /= n;
  for (auto& [_, v] : agg.normalized) v /= n;
  if (with_retrieval) {
    agg.retrieval = retrieval / static_cast<double>(with_retrieval);
    agg.hm = harmonic_mean(*agg.retrieval, agg.dm);
  }
  return agg;
}

Json aggregate_json(const Aggregate& agg, const TaskConfig& config) {
  Json j{{"dm", agg.dm}, {"per_attribute_normalized", agg.normalized}};
  if (agg.retrieval)
    j["retrieval"] = Json{{"kind", to_string(config.retrieval)}, {"value", *agg.retrieval}};
  else
    j["retrieval"] = nullptr;
  j["hm"] = agg.hm ? Json(*agg.hm) : Json(nullptr);
  return j;
}

struct PreparedQuery {
  const Query* query;
  SimilarityBundle bundle;
};

std::vector<PreparedQuery> prepare(const Snapshot& snap, const TaskConfig& config,
                                   const std::vector<std::string>& only) {
  std::vector<PreparedQuery> out;
  if (only.empty()) {
    for (const auto& q : snap.queries) out.push_back({&q, bundle_for_query(snap, q, config)});
  } else {
    for (const auto& id : only) {
      const auto& q = snap.query(id);
      out.push_back({&q, bundle_for_query(snap, q, config)});
    }
  }
  if (out.empty()) throw ValidationError("no queries to evaluate");
  return out;
}

Aggregate run_point(const std::vector<PreparedQuery>& prepared, const TaskConfig& config) {
  std::vector<QueryEval> evals;
  for (const auto& p : prepared) {
    const auto ranked = greedy_rerank(p.bundle, config.rerank);
    evals.push_back(evaluate_ranking(*p.query, p.bundle, ranked, config));
  }
  return aggregate(evals);
}

}  // namespace

std::string to_string(RerankMethod method) {
  switch (method) {
    case RerankMethod::msdpp: return "msdpp";
    case RerankMethod::mmr: return "mmr";
    case RerankMethod::kdpp: return "kdpp";
    case RerankMethod::clustering: return "clustering";
    case RerankMethod::none: return "none";
  }
  return "none";
}

RerankMethod parse_rerank_method(const std::string& text) {
  if (text == "msdpp") return RerankMethod::msdpp;
  if (text == "mmr") return RerankMethod::mmr;
  if (text == "kdpp") return RerankMethod::kdpp;
  if (text == "clustering") return RerankMethod::clustering;
  if (text == "none") return RerankMethod::none;
  throw ValidationError("unknown method '" + text +
                        "' (expected msdpp, mmr, kdpp, clustering or none)");
}

RerankOverrides overrides_from_json(const Json& j, const std::string& path) {
  RerankOverrides o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw FieldError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string field = path + "." + key;
    if (key == "theta") {
      o.theta = number_field(value, field);
    } else if (key == "k") {
      if (!value.is_number_unsigned() || value.get<std::size_t>() == 0)
        throw FieldError(field, "expected a positive integer");
      o.k = value.get<std::size_t>();
    } else if (key == "tn_mode") {
      try {
        o.tn_mode = parse_tn_mode(string_field(value, field));
      } catch (const FieldError&) {
        throw;
      } catch (const ValidationError& e) {
        throw FieldError(field, e.what());
      }
    } else if (key == "attributes") {
      if (!value.is_object()) throw FieldError(field, "expected an object keyed by attribute name");
      for (const auto& [name, attr] : value.items()) {
        const std::string afield = field + "." + name;
        if (!attr.is_object()) throw FieldError(afield, "expected an object");
        RerankOverrides::Attribute a;
        for (const auto& [akey, aval] : attr.items()) {
          if (akey == "weight") {
            a.weight = number_field(aval, afield + ".weight");
            if (!(*a.weight >= 0.0)) throw FieldError(afield + ".weight", "must be >= 0");
          } else if (akey == "direction") {
            try {
              a.direction = parse_direction(aval);
            } catch (const ValidationError& e) {
              throw FieldError(afield + ".direction", e.what());
            }
          } else {
            throw FieldError(afield + "." + akey, "unknown field");
          }
        }
        o.attributes[name] = a;
      }
    } else {
      throw FieldError(field, "unknown field");
    }
  }
  return o;
}

RerankRequest rerank_request_from_json(const Json& j) {
  if (!j.is_object()) throw FieldError("$", "request body must be an object");
  RerankRequest r;
  auto qid = j.find("query_id");
  if (qid == j.end()) throw FieldError("query_id", "required");
  r.query_id = string_field(*qid, "query_id");
  if (auto m = j.find("method"); m != j.end()) {
    try {
      r.method = parse_rerank_method(string_field(*m, "method"));
    } catch (const FieldError&) {
      throw;
    } catch (const ValidationError& e) {
      throw FieldError("method", e.what());
    }
  }
  if (auto o = j.find("overrides"); o != j.end()) r.overrides = overrides_from_json(*o);
  if (auto d = j.find("include_diagnostics"); d != j.end()) {
    if (!d->is_boolean()) throw FieldError("include_diagnostics", "expected a boolean");
    r.include_diagnostics = d->get<bool>();
  }
  return r;
}

WeightSweepRequest sweep_request_from_json(const Json& j) {
  if (!j.is_object()) throw FieldError("$", "request body must be an object");
  WeightSweepRequest r;
  auto attr = j.find("attribute");
  if (attr == j.end()) throw FieldError("attribute", "required");
  r.attribute = string_field(*attr, "attribute");
  if (auto q = j.find("query_id"); q != j.end())
    r.query_ids.push_back(string_field(*q, "query_id"));
  if (auto qs = j.find("query_ids"); qs != j.end()) {
    if (!qs->is_array()) throw FieldError("query_ids", "expected an array of strings");
    for (std::size_t i = 0; i < qs->size(); ++i)
      r.query_ids.push_back(string_field((*qs)[i], "query_ids[" + std::to_string(i) + "]"));
  }
  if (auto w = j.find("weights"); w != j.end()) {
    r.weights = number_list(*w, "weights");
    if (r.weights.empty()) throw FieldError("weights", "empty sweep grid");
  }
  if (auto t = j.find("thetas"); t != j.end()) {
    r.thetas = number_list(*t, "thetas");
    if (r.thetas.empty()) throw FieldError("thetas", "empty sweep grid");
  }
  if (auto m = j.find("tn_modes"); m != j.end()) {
    if (!m->is_array()) throw FieldError("tn_modes", "expected an array of strings");
    for (std::size_t i = 0; i < m->size(); ++i) {
      const std::string field = "tn_modes[" + std::to_string(i) + "]";
      try {
        r.tn_modes.push_back(parse_tn_mode(string_field((*m)[i], field)));
      } catch (const FieldError&) {
        throw;
      } catch (const ValidationError& e) {
        throw FieldError(field, e.what());
      }
    }
  }
  if (auto o = j.find("overrides"); o != j.end()) r.overrides = overrides_from_json(*o);
  return r;
}

TaskConfig apply_overrides(const TaskConfig& base, const RerankOverrides& o) {
  TaskConfig c = base;
  if (o.theta) c.rerank.theta = *o.theta;
  if (o.k) c.rerank.k = *o.k;
  if (o.tn_mode) c.rerank.tn_mode = *o.tn_mode;
  for (const auto& [name, attr] : o.attributes) {
    auto it = std::find_if(c.rerank.specs.begin(), c.rerank.specs.end(),
                           [&](const AttributeSpec& s) { return s.name == name; });
    if (it == c.rerank.specs.end())
      throw FieldError("overrides.attributes." + name, "attribute is not configured");
    if (attr.direction) it->direction = *attr.direction;
    if (attr.weight) it->weight = *attr.weight;
  }
  try {
    c.rerank.validate();
  } catch (const FieldError&) {
    throw;
  } catch (const ValidationError& e) {
    throw FieldError("overrides", e.what());
  }
  return c;
}

Snapshot::Snapshot(TaskConfig config_, std::vector<ImageRecord> gallery_,
                   std::vector<Query> queries_)
    : config(std::move(config_)), gallery(std::move(gallery_)), queries(std::move(queries_)) {
  for (std::size_t i = 0; i < gallery.size(); ++i) image_index_[gallery[i].id] = i;
  for (std::size_t i = 0; i < queries.size(); ++i) query_index_[queries[i].query_id] = i;
}

const Query& Snapshot::query(const std::string& id) const {
  auto it = query_index_.find(id);
  if (it == query_index_.end()) throw UnknownQuery(id);
  return queries[it->second];
}

const ImageRecord& Snapshot::image(const std::string& id) const {
  auto it = image_index_.find(id);
  if (it == image_index_.end()) throw ValidationError("unknown image id '" + id + "'");
  return gallery[it->second];
}

std::array<std::size_t, kTimeBins> time_histogram(const Snapshot& snap,
                                                  const std::vector<std::string>& ids) {
  std::array<std::size_t, kTimeBins> bins{};
  for (const auto& id : ids) {
    const auto& rec = snap.image(id);
    if (!rec.time_minutes) continue;
    const auto hour = static_cast<std::size_t>(std::floor(*rec.time_minutes / 60.0));
    ++bins[std::min(hour, kTimeBins - 1)];
  }
  return bins;
}

std::vector<std::vector<std::size_t>> location_heat(const Snapshot& snap,
                                                    const std::vector<std::string>& ids) {
  std::vector<std::vector<std::size_t>> grid(kLatBins, std::vector<std::size_t>(kLonBins, 0));
  for (const auto& id : ids) {
    const auto& rec = snap.image(id);
    if (!rec.lat_deg || !rec.lon_deg) continue;
    const auto lat = static_cast<std::size_t>(std::clamp(
        std::floor((*rec.lat_deg + 90.0) / 10.0), 0.0, static_cast<double>(kLatBins - 1)));
    const auto lon = static_cast<std::size_t>(std::clamp(
        std::floor((*rec.lon_deg + 180.0) / 10.0), 0.0, static_cast<double>(kLonBins - 1)));
    ++grid[lat][lon];
  }
  return grid;
}

SimilarityBundle bundle_for_query(const Snapshot& snap, const Query& query,
                                  const TaskConfig& config) {
  return build_bundle(snap.gallery, query.relevance, config.rerank.specs, config.rerank.top_n,
                      config.embedding);
}

RankedList run_method(const SimilarityBundle& bundle, const TaskConfig& config,
                      RerankMethod method) {
  switch (method) {
    case RerankMethod::msdpp: return greedy_rerank(bundle, config.rerank);
    case RerankMethod::mmr: return run_baseline(bundle, config.baseline_config(BaselineMethod::mmr));
    case RerankMethod::kdpp: return run_baseline(bundle, config.baseline_config(BaselineMethod::kdpp));
    case RerankMethod::clustering:
      return run_baseline(bundle, config.baseline_config(BaselineMethod::clustering));
    case RerankMethod::none: return relevance_rerank(bundle, config.rerank.k);
  }
  throw ValidationError("unknown method");
}

std::optional<double> retrieval_score(const Query& query, const std::vector<std::string>& ids,
                                      const TaskConfig& config) {
  if (config.retrieval == RetrievalKind::map) {
    if (!query.relevant_ids || query.relevant_ids->empty()) return std::nullopt;
    const std::set<std::string> relevant(query.relevant_ids->begin(), query.relevant_ids->end());
    return average_precision(ids, relevant);
  }
  if (!query.semantic_scores) return std::nullopt;
  return ncs_at_k(ids, *query.semantic_scores, config.ncs_k);
}

Json rerank_query(const Snapshot& snap, const Query& query, const TaskConfig& config,
                  RerankMethod method, bool include_diagnostics) {
  const auto bundle = bundle_for_query(snap, query, config);
  const auto ranked = run_method(bundle, config, method);
  const auto eval = evaluate_ranking(query, bundle, ranked, config);

  Json ranked_json = Json::array();
  for (std::size_t i = 0; i < ranked.ids.size(); ++i)
    ranked_json.push_back(
        {{"id", ranked.ids[i]},
         {"relevance", bundle.relevance(static_cast<Eigen::Index>(ranked.indices[i]))}});

  Json out{{"query_id", query.query_id},
           {"method", to_string(method)},
           {"k", config.rerank.k},
           {"theta", config.rerank.theta},
           {"tn_mode", to_string(config.rerank.tn_mode)},
           {"attributes", specs_json(config.rerank.specs)},
           {"ranked", ranked_json},
           {"metrics", metrics_json(config, eval)},
           {"time_histogram", time_histogram(snap, ranked.ids)},
           {"location_heat", Json{{"lat_bins", kLatBins},
                                  {"lon_bins", kLonBins},
                                  {"cell_deg", 10},
                                  {"counts", location_heat(snap, ranked.ids)}}}};
  if (include_diagnostics) out["diagnostics"] = diagnostics_json(ranked, config.rerank.specs);
  return out;
}

Json handle_rerank(const Snapshot& snap, const RerankRequest& request) {
  const auto config = apply_overrides(snap.config, request.overrides);
  const auto& query = snap.query(request.query_id);
  return rerank_query(snap, query, config, request.method, request.include_diagnostics);
}

std::vector<Json> cmd_rerank(const Snapshot& snap, RerankMethod method,
                             const std::vector<std::string>& only_queries, unsigned threads,
                             bool include_diagnostics) {
  std::vector<const Query*> todo;
  if (only_queries.empty()) {
    for (const auto& q : snap.queries) todo.push_back(&q);
  } else {
    for (const auto& id : only_queries) todo.push_back(&snap.query(id));
  }

  std::vector<Json> out(todo.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = rerank_query(snap, *todo[i], snap.config, method, include_diagnostics);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, todo.size()));
  if (workers <= 1) {
    work(0, todo.size());
  } else {
    const std::size_t chunk = (todo.size() + workers - 1) / workers;
    std::vector<std::future<void>> jobs;
    for (std::size_t b = 0; b < todo.size(); b += chunk)
      jobs.push_back(std::async(std::launch::async, work, b, std::min(todo.size(), b + chunk)));
    for (auto& j : jobs) j.get();
  }
  return out;
}

Json cmd_eval(const std::vector<Json>& results, const Snapshot& snap, bool recompute_diversity) {
  const auto& config = snap.config;
  const std::size_t k = config.rerank.k;
  std::vector<QueryEval> evals;
  Json per_query = Json::array();
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    const std::string where = "result #" + std::to_string(r + 1);
    if (!res.is_object() || !res.contains("query_id") || !res.contains("ranked"))
      throw ValidationError(where + ": expected a rerank response with query_id and ranked");
    const auto& query = snap.query(res["query_id"].get<std::string>());
    std::vector<std::string> ids;
    for (const auto& item : res["ranked"]) ids.push_back(item.at("id").get<std::string>());
    if (ids.size() < k)
      throw ValidationError(where + ": ranked list shorter than k=" + std::to_string(k));

    QueryEval e;
    e.retrieval = retrieval_score(query, ids, config);
    if (!e.retrieval)
      throw ValidationError("query '" + query.query_id + "': retrieval metric '" +
                            to_string(config.retrieval) + "' needs " +
                            (config.retrieval == RetrievalKind::map ? "relevant_ids"
                                                                    : "semantic_scores"));
    if (recompute_diversity) {
      const auto bundle = bundle_for_query(snap, query, config);
      std::map<std::string, std::size_t> pos;
      for (std::size_t i = 0; i < bundle.size(); ++i) pos[bundle.candidate_ids[i]] = i;
      std::vector<std::size_t> indices;
      for (const auto& id : ids) {
        auto it = pos.find(id);
        if (it == pos.end())
          throw ValidationError(where + ": ranked id '" + id + "' is not among the candidates");
        indices.push_back(it->second);
      }
      e.diversity = diversity_metric(indices, bundle, config.rerank.specs, k);
    } else {
      const auto& norm = res.at("metrics").at("per_attribute_normalized");
      std::vector<double> values;
      for (const auto& spec : config.rerank.specs) {
        if (!norm.contains(spec.name))
          throw ValidationError(where + ": no stored diversity for attribute '" + spec.name + "'");
        AttributeDiversity a;
        a.name = spec.name;
        a.normalized = norm[spec.name].get<double>();
        a.vendi = res["metrics"]["per_attribute_vs"].value(spec.name, 0.0);
        values.push_back(a.normalized);
        e.diversity.attributes.push_back(a);
      }
      e.diversity.dm = harmonic_mean(values);
    }
    per_query.push_back(Json{{"query_id", query.query_id}, {"metrics", metrics_json(config, e)}});
    evals.push_back(std::move(e));
  }
  if (evals.empty()) throw ValidationError("no results to evaluate");
  Json report = aggregate_json(aggregate(evals), config);
  report["queries"] = evals.size();
  report["per_query"] = per_query;
  return report;
}

std::vector<double> default_weight_grid() {
  std::vector<double> w;
  for (int i = 0; i <= 10; ++i) w.push_back(i / 10.0);
  return w;
}

std::vector<AttributeSpec> sweep_weights(const std::vector<AttributeSpec>& specs,
                                         const std::string& attribute, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("sweep weight must lie in [0, 1]");
  if (specs.size() < 2) throw ValidationError("a weight sweep needs at least two attributes");
  auto out = specs;
  double others = 0.0;
  bool found = false;
  for (const auto& s : specs) {
    if (s.name == attribute) found = true;
    else others += s.weight;
  }
  if (!found) throw ValidationError("sweep attribute '" + attribute + "' is not configured");
  const double n_others = static_cast<double>(specs.size() - 1);
  for (auto& s : out) {
    if (s.name == attribute) s.weight = w;
    else s.weight = (1.0 - w) * (others > 0.0 ? s.weight / others : 1.0 / n_others);
  }
  return out;
}

Json weight_sweep(const Snapshot& snap, const TaskConfig& config,
                  const WeightSweepRequest& request) {
  const auto weights = request.weights.empty() ? default_weight_grid() : request.weights;
  const auto thetas =
      request.thetas.empty() ? std::vector<double>{config.rerank.theta} : request.thetas;
  const auto modes =
      request.tn_modes.empty() ? std::vector<TnMode>{config.rerank.tn_mode} : request.tn_modes;
  const auto prepared = prepare(snap, config, request.query_ids);
  sweep_weights(config.rerank.specs, request.attribute, weights.front());

  Json points = Json::array();
  Json curves = Json::array();
  std::optional<Json> best;
  double best_score = -1.0;
  for (double theta : thetas) {
    for (auto mode : modes) {
      std::vector<double> series;
      Json curve_points = Json::array();
      for (double w : weights) {
        TaskConfig point = config;
        point.rerank.theta = theta;
        point.rerank.tn_mode = mode;
        point.rerank.specs = sweep_weights(config.rerank.specs, request.attribute, w);
        point.rerank.validate();
        const auto agg = run_point(prepared, point);
        series.push_back(agg.normalized.at(request.attribute));
        Json p = aggregate_json(agg, point);
        p["theta"] = theta;
        p["tn_mode"] = to_string(mode);
        p["weight"] = w;
        p["attributes"] = specs_json(point.rerank.specs);
        const double score = agg.hm ? *agg.hm : agg.dm;
        if (score > best_score) {
          best_score = score;
          best = p;
        }
        curve_points.push_back(Json{{"weight", w}, {"value", series.back()}});
        points.push_back(std::move(p));
      }
      // A single-weight sweep has no slope to score.
      const bool scored = weights.size() >= 2 && weights.back() > weights.front();
      curves.push_back(Json{{"theta", theta},
                            {"tn_mode", to_string(mode)},
                            {"points", curve_points},
                            {"prs", scored ? Json(prs(series, weights)) : Json(nullptr)},
                            {"prs_mean_slope", scored ? Json(prs(series, weights, PrsVariant::mean_slope))
                                                      : Json(nullptr)}});
    }
  }
  return Json{{"mode", "weight"},
              {"attribute", request.attribute},
              {"queries", prepared.size()},
              {"points", points},
              {"curves", curves},
              {"best", best ? *best : Json(nullptr)}};
}

Json grid_sweep(const Snapshot& snap) {
  const auto& config = snap.config;
  const auto& grid = config.sweep;
  const auto thetas = grid.thetas.empty() ? std::vector<double>{config.rerank.theta} : grid.thetas;
  const auto modes =
      grid.tn_modes.empty() ? std::vector<TnMode>{config.rerank.tn_mode} : grid.tn_modes;
  const auto prepared = prepare(snap, config, {});

  // Odometer over per-attribute weight choices.
  const std::size_t n_attr = config.rerank.specs.size();
  std::vector<std::vector<double>> choices(n_attr);
  for (std::size_t a = 0; a < n_attr; ++a)
    choices[a] = grid.weights.empty() ? std::vector<double>{config.rerank.specs[a].weight}
                                      : grid.weights;

  Json points = Json::array();
  std::optional<Json> best;
  double best_score = -1.0;
  for (double theta : thetas) {
    for (auto mode : modes) {
      std::vector<std::size_t> odo(n_attr, 0);
      while (true) {
        TaskConfig point = config;
        point.rerank.theta = theta;
        point.rerank.tn_mode = mode;
        double total = 0.0;
        for (std::size_t a = 0; a < n_attr; ++a) {
          point.rerank.specs[a].weight = choices[a][odo[a]];
          total += choices[a][odo[a]];
        }
        if (total > 0.0) {
          point.rerank.specs = normalize_weights(point.rerank.specs);
          const auto agg = run_point(prepared, point);
          Json p = aggregate_json(agg, point);
          p["theta"] = theta;
          p["tn_mode"] = to_string(mode);
          p["attributes"] = specs_json(point.rerank.specs);
          const double score = agg.hm ? *agg.hm : agg.dm;
          if (score > best_score) {
            best_score = score;
            best = p;
          }
          points.push_back(std::move(p));
        }
        std::size_t a = 0;
        while (a < n_attr && ++odo[a] == choices[a].size()) odo[a++] = 0;
        if (a == n_attr) break;
      }
    }
  }
  if (points.empty()) throw ValidationError("sweep grid is empty");
  return Json{{"mode", "grid"},
              {"queries", prepared.size()},
              {"points", points},
              {"best", best ? *best : Json(nullptr)}};
}

Json cmd_sweep(const Snapshot& snap, const std::optional<std::string>& attribute) {
  const auto target = attribute ? attribute : snap.config.sweep.attribute;
  if (!target) return grid_sweep(snap);
  WeightSweepRequest req;
  req.attribute = *target;
  req.weights = snap.config.sweep.weights;
  req.thetas = snap.config.sweep.thetas;
  req.tn_modes = snap.config.sweep.tn_modes;
  return weight_sweep(snap, snap.config, req);
}

}  // namespace msdpp
