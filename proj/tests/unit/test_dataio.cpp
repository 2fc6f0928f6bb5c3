#include <sstream>

#include <gtest/gtest.h>

#include "msdpp/dataio.hpp"

namespace msdpp {
namespace {

std::string gallery_line(const std::string& id, double t = 60.0) {
  return R"({"id":")" + id + R"(","appearance":[0.1,0.2],"time_minutes":)" + std::to_string(t) +
         R"(,"lat_deg":35.0,"lon_deg":139.7})";
}

TEST(ReadGallery, PreservesOrder) {
  std::istringstream in(gallery_line("b") + "\n" + gallery_line("a") + "\n\n" + gallery_line("c") + "\n");
  const auto g = read_gallery(in);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].id, "b");
  EXPECT_EQ(g[1].id, "a");
  EXPECT_EQ(g[2].id, "c");
  EXPECT_DOUBLE_EQ(*g[0].lat_deg, 35.0);
}

TEST(ReadGallery, EmptyIsValid) {
  std::istringstream in("");
  EXPECT_TRUE(read_gallery(in).empty());
}

TEST(ReadGallery, DuplicateIdCitesLine) {
  std::string text;
  for (int i = 1; i <= 6; ++i) text += gallery_line("img" + std::to_string(i)) + "\n";
  text += gallery_line("img3") + "\n";
  std::istringstream in(text);
  try {
    read_gallery(in, "g.jsonl");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("g.jsonl:7:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("img3"), std::string::npos) << msg;
  }
}

TEST(ReadGallery, MalformedAndInconsistentLines) {
  std::istringstream bad_json(gallery_line("a") + "\n{\"id\": \n");
  EXPECT_THROW(read_gallery(bad_json), ValidationError);
  std::istringstream bad_dim(gallery_line("a") + "\n" + R"({"id":"b","appearance":[1,2,3]})" + "\n");
  EXPECT_THROW(read_gallery(bad_dim), ValidationError);
  std::istringstream bad_time(gallery_line("a", 1440.0) + "\n");
  EXPECT_THROW(read_gallery(bad_time), ValidationError);
}

TEST(ReadQueries, GroundTruthCapabilities) {
  std::istringstream in(
      R"({"query_id":"q1","relevance":{"a":0.5},"relevant_ids":["a"]})" "\n"
      R"({"query_id":"q2","text":"dogs","relevance":{"a":0.1},"semantic_scores":{"a":0.3}})" "\n");
  const auto q = read_queries(in);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_TRUE(q[0].relevant_ids.has_value());
  EXPECT_FALSE(q[0].semantic_scores.has_value());
  EXPECT_FALSE(q[1].relevant_ids.has_value());
  EXPECT_TRUE(q[1].semantic_scores.has_value());
  EXPECT_EQ(*q[1].text, "dogs");
}

TEST(ReadQueries, UnknownImageIsNamed) {
  std::istringstream g(gallery_line("a") + "\n");
  const auto gallery = read_gallery(g);
  std::istringstream in(R"({"query_id":"q1","relevance":{"a":0.5,"ghost":0.2}})" "\n");
  try {
    read_queries(in, "queries", gallery);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(RoundTrip, GalleryAndQueriesAreBitExact) {
  SyntheticPlan plan;
  plan.seed = 42;
  plan.n_items = 30;
  plan.n_queries = 3;
  const auto data = gen_synthetic(plan);

  std::stringstream g;
  write_gallery(g, data.gallery);
  EXPECT_EQ(read_gallery(g), data.gallery);

  std::stringstream q;
  write_queries(q, data.queries);
  EXPECT_EQ(read_queries(q), data.queries);
}

TEST(RoundTrip, ExtraAttributes) {
  ImageRecord r;
  r.id = "x";
  r.appearance = {0.1 + 0.2, 1e-300, -3.5};
  r.extra["color"] = {0.25, 1.0 / 3.0};
  std::stringstream s;
  write_gallery(s, std::vector<ImageRecord>{r});
  const auto back = read_gallery(s);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(GenSynthetic, SameSeedSameBytes) {
  SyntheticPlan plan;
  plan.seed = 9;
  auto render = [&] {
    const auto data = gen_synthetic(plan);
    std::ostringstream out;
    write_gallery(out, data.gallery);
    write_queries(out, data.queries);
    return out.str();
  };
  const auto first = render();
  EXPECT_EQ(first, render());
  plan.seed = 10;
  EXPECT_NE(first, render());
}

TEST(GenSynthetic, ShapeAndGroundTruth) {
  SyntheticPlan plan;
  plan.n_items = 50;
  plan.clusters = 1;
  plan.n_queries = 2;
  plan.with_geo = false;
  const auto data = gen_synthetic(plan);
  EXPECT_EQ(data.gallery.size(), 50u);
  EXPECT_EQ(data.queries.size(), 2u);
  for (const auto& r : data.gallery) {
    EXPECT_TRUE(r.time_minutes.has_value());
    EXPECT_FALSE(r.lat_deg.has_value());
  }
  EXPECT_EQ(data.queries[0].relevant_ids->size(), 50u);
  EXPECT_EQ(data.queries[0].relevance.size(), 50u);

  plan.clusters = 0;
  EXPECT_THROW(gen_synthetic(plan), ValidationError);
}

TEST(TaskConfig, ParsesAndValidates) {
  const auto cfg = task_config_from_json(Json::parse(R"({
    "theta": 0.8, "k": 5, "top_n": 50, "tn_mode": "tv_m",
    "attributes": [{"name": "appearance", "kind": "appearance", "direction": 1, "weight": 0.6},
                   {"name": "time", "kind": "time", "direction": "decrease", "weight": 0.4}],
    "retrieval_metric": "ncs_at_k", "ncs_k": 5,
    "baseline": {"lambda": 0.3, "num_clusters": 10},
    "sweep": {"attribute": "time", "weights": [0.1, 0.5, 0.9]}})"));
  EXPECT_DOUBLE_EQ(cfg.rerank.theta, 0.8);
  EXPECT_EQ(cfg.rerank.tn_mode, TnMode::tv_m);
  EXPECT_EQ(cfg.rerank.specs[1].direction, Direction::decrease);
  EXPECT_EQ(cfg.retrieval, RetrievalKind::ncs_at_k);
  EXPECT_EQ(cfg.baseline.num_clusters, 10u);
  EXPECT_EQ(cfg.sweep.weights.size(), 3u);

  const auto again = task_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(TaskConfig, RejectsInvalidDocuments) {
  const char* bad[] = {
      R"({"theta": 1.0, "attributes": [{"name": "a", "kind": "appearance"}]})",
      R"({"k": 30, "top_n": 20, "attributes": [{"name": "a", "kind": "appearance"}]})",
      R"({"attributes": [{"name": "a", "kind": "appearance", "direction": 0}]})",
      R"({"attributes": [{"name": "a", "kind": "appearance", "weight": -1}]})",
      R"({"attributes": [{"name": "a", "kind": "appearance"}], "sweep": {"weights": []}})",
      R"({"attributes": [{"name": "a", "kind": "appearance"}], "tn_mode": "sometimes"})",
  };
  for (const char* doc : bad)
    EXPECT_THROW(task_config_from_json(Json::parse(doc)), ValidationError) << doc;
}

}  // namespace
}  // namespace msdpp
