#include "msdpp/dataio.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace msdpp {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Calls fn(json, line_number) for every non-blank line, rewrapping errors with
// the source position.
template <typename Fn>
void for_each_record(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(Json::parse(line), line_no);
    } catch (const Json::exception& e) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<double> float_array(const Json& j, const char* field) {
  if (!j.is_array()) throw ValidationError(std::string("field '") + field + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ValidationError(std::string("field '") + field + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::map<std::string, double> score_map(const Json& j, const char* field) {
  if (!j.is_object()) throw ValidationError(std::string("field '") + field + "' must be an object");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number())
      throw ValidationError(std::string("field '") + field + "': score for '" + k + "' is not a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
      throw ValidationError(std::string("field '") + field + "': non-finite score for '" + k + "'");
    out.emplace(k, d);
  }
  return out;
}

std::optional<double> optional_number(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ValidationError(std::string("field '") + field + "' must be a number");
  return it->get<double>();
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

ImageRecord image_record_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("record must be an object");
  ImageRecord r;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw ValidationError("record needs a string 'id'");
  r.id = id->get<std::string>();
  auto app = j.find("appearance");
  if (app == j.end()) throw ValidationError("record '" + r.id + "' has no 'appearance'");
  r.appearance = float_array(*app, "appearance");
  r.time_minutes = optional_number(j, "time_minutes");
  r.lat_deg = optional_number(j, "lat_deg");
  r.lon_deg = optional_number(j, "lon_deg");
  if (r.time_minutes && (*r.time_minutes < 0.0 || *r.time_minutes >= 1440.0))
    throw ValidationError("record '" + r.id + "': time_minutes outside [0, 1440)");
  if (r.lat_deg && (*r.lat_deg < -90.0 || *r.lat_deg > 90.0))
    throw ValidationError("record '" + r.id + "': lat_deg outside [-90, 90]");
  if (r.lon_deg && (*r.lon_deg <= -180.0 || *r.lon_deg > 180.0))
    throw ValidationError("record '" + r.id + "': lon_deg outside (-180, 180]");
  if (auto extra = j.find("extra"); extra != j.end() && !extra->is_null()) {
    if (!extra->is_object()) throw ValidationError("field 'extra' must be an object");
    for (const auto& [name, vec] : extra->items()) r.extra[name] = float_array(vec, "extra");
  }
  return r;
}

Json to_json(const ImageRecord& r) {
  Json j;
  j["id"] = r.id;
  j["appearance"] = r.appearance;
  if (r.time_minutes) j["time_minutes"] = *r.time_minutes;
  if (r.lat_deg) j["lat_deg"] = *r.lat_deg;
  if (r.lon_deg) j["lon_deg"] = *r.lon_deg;
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

std::vector<ImageRecord> read_gallery(std::istream& in, const std::string& source) {
  std::vector<ImageRecord> out;
  std::map<std::string, std::size_t> seen;
  for_each_record(in, source, [&](const Json& j, std::size_t line) {
    auto rec = image_record_from_json(j);
    if (auto [it, fresh] = seen.emplace(rec.id, line); !fresh)
      throw ValidationError("duplicate id '" + rec.id + "' (first seen on line " +
                            std::to_string(it->second) + ")");
    if (!out.empty() && rec.appearance.size() != out.front().appearance.size())
      throw ValidationError("record '" + rec.id + "' has appearance dimension " +
                            std::to_string(rec.appearance.size()) + ", expected " +
                            std::to_string(out.front().appearance.size()));
    out.push_back(std::move(rec));
  });
  if (out.empty()) spdlog::warn("{}: gallery is empty", source);
  return out;
}

std::vector<ImageRecord> load_gallery(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_gallery(in, path.string());
}

void write_gallery(std::ostream& out, std::span<const ImageRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void save_gallery(const std::filesystem::path& path, std::span<const ImageRecord> records) {
  auto out = open_out(path);
  write_gallery(out, records);
}

Query query_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("query must be an object");
  Query q;
  auto id = j.find("query_id");
  if (id == j.end() || !id->is_string()) throw ValidationError("query needs a string 'query_id'");
  q.query_id = id->get<std::string>();
  if (auto t = j.find("text"); t != j.end() && !t->is_null()) {
    if (!t->is_string()) throw ValidationError("field 'text' must be a string");
    q.text = t->get<std::string>();
  }
  auto rel = j.find("relevance");
  if (rel == j.end()) throw ValidationError("query '" + q.query_id + "' has no 'relevance'");
  q.relevance = score_map(*rel, "relevance");
  if (auto r = j.find("relevant_ids"); r != j.end() && !r->is_null()) {
    if (!r->is_array()) throw ValidationError("field 'relevant_ids' must be an array");
    std::vector<std::string> ids;
    for (const auto& v : *r) {
      if (!v.is_string()) throw ValidationError("field 'relevant_ids' must hold strings");
      ids.push_back(v.get<std::string>());
    }
    q.relevant_ids = std::move(ids);
  }
  if (auto s = j.find("semantic_scores"); s != j.end() && !s->is_null())
    q.semantic_scores = score_map(*s, "semantic_scores");
  return q;
}

Json to_json(const Query& q) {
  Json j;
  j["query_id"] = q.query_id;
  if (q.text) j["text"] = *q.text;
  j["relevance"] = q.relevance;
  if (q.relevant_ids) j["relevant_ids"] = *q.relevant_ids;
  if (q.semantic_scores) j["semantic_scores"] = *q.semantic_scores;
  return j;
}

std::vector<Query> read_queries(std::istream& in, const std::string& source,
                                std::span<const ImageRecord> gallery) {
  std::set<std::string> known;
  for (const auto& r : gallery) known.insert(r.id);
  auto check = [&](const std::string& query, const std::string& image) {
    if (!gallery.empty() && !known.count(image))
      throw ValidationError("query '" + query + "' references unknown image id '" + image + "'");
  };

  std::vector<Query> out;
  std::set<std::string> seen;
  for_each_record(in, source, [&](const Json& j, std::size_t) {
    auto q = query_from_json(j);
    if (!seen.insert(q.query_id).second)
      throw ValidationError("duplicate query id '" + q.query_id + "'");
    for (const auto& [id, _] : q.relevance) check(q.query_id, id);
    if (q.relevant_ids)
      for (const auto& id : *q.relevant_ids) check(q.query_id, id);
    if (q.semantic_scores)
      for (const auto& [id, _] : *q.semantic_scores) check(q.query_id, id);
    out.push_back(std::move(q));
  });
  if (out.empty()) spdlog::warn("{}: no queries", source);
  return out;
}

std::vector<Query> load_queries(const std::filesystem::path& path,
                                std::span<const ImageRecord> gallery) {
  auto in = open_in(path);
  return read_queries(in, path.string(), gallery);
}

void write_queries(std::ostream& out, std::span<const Query> queries) {
  for (const auto& q : queries) out << to_json(q).dump() << '\n';
}

void save_queries(const std::filesystem::path& path, std::span<const Query> queries) {
  auto out = open_out(path);
  write_queries(out, queries);
}

Direction parse_direction(const Json& j) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (v == 1.0) return Direction::increase;
    if (v == -1.0) return Direction::decrease;
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "increase" || s == "+1" || s == "inc") return Direction::increase;
    if (s == "decrease" || s == "-1" || s == "dec") return Direction::decrease;
  }
  throw ValidationError("direction must be +1, -1, \"increase\" or \"decrease\", got " + j.dump());
}

AttributeSpec attribute_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("attribute entry must be an object");
  AttributeSpec spec;
  auto name = j.find("name");
  if (name == j.end() || !name->is_string()) throw ValidationError("attribute needs a string 'name'");
  spec.name = name->get<std::string>();
  if (auto kind = j.find("kind"); kind != j.end()) {
    if (!kind->is_string()) throw ValidationError("attribute 'kind' must be a string");
    spec.kind = parse_attribute_kind(kind->get<std::string>());
  } else {
    spec.kind = parse_attribute_kind(spec.name == "location" ? "geo" : spec.name);
  }
  if (auto dir = j.find("direction"); dir != j.end()) spec.direction = parse_direction(*dir);
  if (auto w = j.find("weight"); w != j.end()) {
    if (!w->is_number()) throw ValidationError("attribute 'weight' must be a number");
    spec.weight = w->get<double>();
  }
  if (!std::isfinite(spec.weight) || spec.weight < 0.0)
    throw ValidationError("attribute '" + spec.name + "': weight must be >= 0");
  return spec;
}

Json to_json(const AttributeSpec& spec) {
  return Json{{"name", spec.name},
              {"kind", to_string(spec.kind)},
              {"direction", static_cast<int>(spec.direction)},
              {"weight", spec.weight}};
}

BaselineConfig TaskConfig::baseline_config(BaselineMethod method) const {
  BaselineConfig c;
  c.method = method;
  c.lambda_or_theta = method == BaselineMethod::mmr ? baseline.lambda : baseline.theta;
  c.num_clusters = baseline.num_clusters;
  c.k = rerank.k;
  c.specs = rerank.specs;
  c.mode = baseline.mode;
  return c;
}

void TaskConfig::validate() const {
  rerank.validate();
  if (ncs_k == 0) throw ValidationError("ncs_k must be positive");
  if (!(embedding.spd_floor > 0.0)) throw ValidationError("spd_floor must be positive");
  for (auto method : {BaselineMethod::mmr, BaselineMethod::kdpp, BaselineMethod::clustering})
    baseline_config(method).validate();
  for (double w : sweep.weights)
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("sweep weights must lie in [0, 1]");
  for (double t : sweep.thetas) relevance_alpha(t);
  if (sweep.attribute) {
    bool found = false;
    for (const auto& s : rerank.specs) found = found || s.name == *sweep.attribute;
    if (!found) throw ValidationError("sweep attribute '" + *sweep.attribute + "' is not configured");
  }
}

TaskConfig task_config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("config must be an object");
  TaskConfig c;
  c.rerank.theta = get_or(j, "theta", c.rerank.theta);
  c.rerank.k = get_or<std::size_t>(j, "k", c.rerank.k);
  c.rerank.top_n = get_or<std::size_t>(j, "top_n", c.rerank.top_n);
  c.rerank.tn_mode = parse_tn_mode(get_or<std::string>(j, "tn_mode", "off"));
  c.rerank.threads = get_or<unsigned>(j, "threads", 1u);
  if (auto attrs = j.find("attributes"); attrs != j.end()) {
    if (!attrs->is_array()) throw ValidationError("'attributes' must be an array");
    for (const auto& a : *attrs) c.rerank.specs.push_back(attribute_spec_from_json(a));
  } else {
    c.rerank.specs.push_back({"appearance", AttributeKind::appearance, Direction::increase, 1.0});
  }
  c.embedding.full_circle_time = get_or(j, "full_circle_time", false);
  c.embedding.spd_floor = get_or(j, "spd_floor", kDefaultSpdFloor);
  c.retrieval = parse_retrieval_kind(get_or<std::string>(j, "retrieval_metric", "map"));
  c.ncs_k = get_or<std::size_t>(j, "ncs_k", 10);
  c.seed = get_or<std::uint64_t>(j, "seed", 0);

  if (auto b = j.find("baseline"); b != j.end() && !b->is_null()) {
    c.baseline.lambda = get_or(*b, "lambda", c.baseline.lambda);
    c.baseline.theta = get_or(*b, "theta", c.baseline.theta);
    c.baseline.num_clusters = get_or<std::size_t>(*b, "num_clusters", c.baseline.num_clusters);
    if (auto m = b->find("mode"); m != b->end() && !m->is_null())
      c.baseline.mode = parse_baseline_mode(m->get<std::string>());
  }
  if (auto s = j.find("sweep"); s != j.end() && !s->is_null()) {
    for (const char* key : {"weights", "thetas", "tn_modes"})
      if (auto g = s->find(key); g != s->end() && g->is_array() && g->empty())
        throw ValidationError(std::string("sweep.") + key + ": empty sweep grid");
    if (auto a = s->find("attribute"); a != s->end() && !a->is_null())
      c.sweep.attribute = a->get<std::string>();
    c.sweep.weights = get_or(*s, "weights", std::vector<double>{});
    c.sweep.thetas = get_or(*s, "thetas", std::vector<double>{});
    for (const auto& m : get_or(*s, "tn_modes", std::vector<std::string>{}))
      c.sweep.tn_modes.push_back(parse_tn_mode(m));
  }
  c.validate();
  return c;
}

Json to_json(const TaskConfig& c) {
  Json attrs = Json::array();
  for (const auto& s : c.rerank.specs) attrs.push_back(to_json(s));
  Json j{{"theta", c.rerank.theta},
         {"k", c.rerank.k},
         {"top_n", c.rerank.top_n},
         {"tn_mode", to_string(c.rerank.tn_mode)},
         {"threads", c.rerank.threads},
         {"attributes", attrs},
         {"full_circle_time", c.embedding.full_circle_time},
         {"spd_floor", c.embedding.spd_floor},
         {"retrieval_metric", to_string(c.retrieval)},
         {"ncs_k", c.ncs_k},
         {"seed", c.seed}};
  Json b{{"lambda", c.baseline.lambda},
         {"theta", c.baseline.theta},
         {"num_clusters", c.baseline.num_clusters}};
  if (c.baseline.mode) b["mode"] = to_string(*c.baseline.mode);
  j["baseline"] = b;
  // Empty grids are omitted: an explicit empty array is rejected on load.
  Json s = Json::object();
  if (!c.sweep.weights.empty()) s["weights"] = c.sweep.weights;
  if (!c.sweep.thetas.empty()) s["thetas"] = c.sweep.thetas;
  if (!c.sweep.tn_modes.empty()) {
    Json modes = Json::array();
    for (auto m : c.sweep.tn_modes) modes.push_back(to_string(m));
    s["tn_modes"] = modes;
  }
  if (c.sweep.attribute) s["attribute"] = *c.sweep.attribute;
  j["sweep"] = s;
  return j;
}

TaskConfig load_task_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  try {
    return task_config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void SyntheticPlan::validate() const {
  if (clusters == 0) throw ValidationError("synthetic plan: clusters must be >= 1");
  if (n_items < clusters) throw ValidationError("synthetic plan: n_items must be >= clusters");
  if (d_appearance == 0) throw ValidationError("synthetic plan: d_appearance must be >= 1");
  if (!(cluster_spread >= 0.0 && time_spread_minutes >= 0.0 && geo_spread_deg >= 0.0 &&
        relevance_noise >= 0.0 && cluster_separation >= 0.0))
    throw ValidationError("synthetic plan: spreads must be non-negative");
}

SyntheticData gen_synthetic(const SyntheticPlan& plan) {
  plan.validate();
  std::mt19937_64 rng(plan.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(plan.d_appearance);

  struct Blob {
    Vector center;
    double time;
    double lat;
    double lon;
  };
  std::vector<Blob> blobs;
  for (std::size_t c = 0; c < plan.clusters; ++c) {
    Blob b;
    b.center = Vector(d);
    for (Eigen::Index i = 0; i < d; ++i) b.center(i) = plan.cluster_separation * normal(rng);
    b.time = 1440.0 * unit(rng);
    b.lat = -60.0 + 120.0 * unit(rng);
    b.lon = -179.0 + 358.0 * unit(rng);
    blobs.push_back(std::move(b));
  }

  SyntheticData data;
  const int width = static_cast<int>(std::to_string(plan.n_items).size());
  for (std::size_t i = 0; i < plan.n_items; ++i) {
    // Every blob gets at least one item; the rest are assigned at random.
    const std::size_t c = i < plan.clusters ? i : static_cast<std::size_t>(rng() % plan.clusters);
    const auto& b = blobs[c];
    ImageRecord r;
    std::ostringstream id;
    id << "img" << std::setw(width) << std::setfill('0') << i;
    r.id = id.str();
    r.appearance.resize(plan.d_appearance);
    for (Eigen::Index k = 0; k < d; ++k)
      r.appearance[static_cast<std::size_t>(k)] = b.center(k) + plan.cluster_spread * normal(rng);
    if (plan.with_time) {
      double t = std::fmod(b.time + plan.time_spread_minutes * normal(rng), 1440.0);
      if (t < 0.0) t += 1440.0;
      if (t >= 1440.0) t = 0.0;
      r.time_minutes = t;
    }
    if (plan.with_geo) {
      r.lat_deg = std::clamp(b.lat + plan.geo_spread_deg * normal(rng), -90.0, 90.0);
      double lon = b.lon + plan.geo_spread_deg * normal(rng);
      if (lon > 180.0) lon -= 360.0;
      if (lon <= -180.0) lon += 360.0;
      r.lon_deg = lon;
    }
    data.gallery.push_back(std::move(r));
    data.labels.push_back(c);
  }

  for (std::size_t q = 0; q < plan.n_queries; ++q) {
    const std::size_t c = q % plan.clusters;
    Vector centroid = blobs[c].center;
    for (Eigen::Index k = 0; k < d; ++k) centroid(k) += 0.3 * plan.cluster_spread * normal(rng);
    Query query;
    query.query_id = "q" + std::to_string(q);
    query.text = "synthetic query for blob " + std::to_string(c);
    std::vector<std::string> relevant;
    std::map<std::string, double> semantic;
    for (std::size_t i = 0; i < data.gallery.size(); ++i) {
      const auto& rec = data.gallery[i];
      const Vector f = Eigen::Map<const Vector>(rec.appearance.data(), d);
      const double sim = f.dot(centroid) / (f.norm() * centroid.norm() + 1e-300);
      query.relevance[rec.id] = sim + plan.relevance_noise * normal(rng);
      semantic[rec.id] = std::max(0.0, sim);
      if (data.labels[i] == c) relevant.push_back(rec.id);
    }
    query.relevant_ids = std::move(relevant);
    query.semantic_scores = std::move(semantic);
    data.queries.push_back(std::move(query));
  }
  return data;
}

}  // namespace msdpp
