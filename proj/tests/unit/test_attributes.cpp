#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "msdpp/attributes.hpp"

namespace msdpp {
namespace {

ImageRecord record(const std::string& id, std::vector<double> app, double t, double lat,
                   double lon) {
  ImageRecord r;
  r.id = id;
  r.appearance = std::move(app);
  r.time_minutes = t;
  r.lat_deg = lat;
  r.lon_deg = lon;
  return r;
}

TEST(EmbedTime, HalfCircleMapping) {
  const auto midnight = embed_time(0.0);
  EXPECT_DOUBLE_EQ(midnight[0], 1.0);
  EXPECT_DOUBLE_EQ(midnight[1], 0.0);

  const auto noon = embed_time(720.0);
  EXPECT_NEAR(noon[0], 0.0, 1e-15);
  EXPECT_NEAR(noon[1], 1.0, 1e-15);

  // Independent evaluation of the angle for the last minute of the day.
  const double z = 1439.0 * std::numbers::pi / 1440.0;
  const auto late = embed_time(1439.0);
  // sin near pi carries absolute, not relative, round-off.
  EXPECT_NEAR(late[0], std::cos(z), 1e-15);
  EXPECT_NEAR(late[1], std::sin(z), 1e-15);
  EXPECT_NEAR(late[0], -0.999998, 1e-6);
  EXPECT_NEAR(late[1], 0.002182, 1e-6);
}

TEST(EmbedTime, FullCircleWrapsAround) {
  const auto late = embed_time(1439.0, true);
  const auto early = embed_time(0.0, true);
  EXPECT_LT((late - early).norm(), 0.005);
}

TEST(EmbedTime, OutOfRange) {
  EXPECT_THROW(embed_time(-1.0), ValidationError);
  EXPECT_THROW(embed_time(1440.0), ValidationError);
  EXPECT_THROW(embed_time(std::nan("")), ValidationError);
}

TEST(EmbedGeo, Landmarks) {
  EXPECT_TRUE(embed_geo(0.0, 0.0).isApprox(Eigen::Vector3d(1, 0, 0)));
  EXPECT_LT((embed_geo(90.0, 37.0) - Eigen::Vector3d(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT((embed_geo(0.0, 90.0) - Eigen::Vector3d(0, 1, 0)).norm(), 1e-15);
  EXPECT_NEAR(embed_geo(-33.9, 151.2).norm(), 1.0, 1e-15);
}

TEST(EmbedGeo, OutOfRange) {
  EXPECT_THROW(embed_geo(91.0, 0.0), ValidationError);
  EXPECT_THROW(embed_geo(0.0, -180.0), ValidationError);
  EXPECT_NO_THROW(embed_geo(0.0, 180.0));
}

TEST(Similarity, IdenticalAndUnitDistancePoints) {
  Matrix same{{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_EQ(inverse_distance_similarity(same), Matrix::Ones(2, 2));
  Matrix unit{{0.0}, {1.0}};
  EXPECT_DOUBLE_EQ(inverse_distance_similarity(unit)(0, 1), 0.5);
}

TEST(Similarity, ThreePointsOnALine) {
  Matrix pts{{0.0}, {1.0}, {3.0}};
  const Matrix s = inverse_distance_similarity(pts);
  EXPECT_DOUBLE_EQ(s(0, 1), 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(s(0, 2), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(s(1, 2), 1.0 / 3.0);
  EXPECT_EQ(s.diagonal(), Vector::Ones(3));
  Eigen::LLT<Matrix> llt(similarity_matrix(pts));
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Similarity, RepairedKernelKeepsUnitDiagonal) {
  Matrix pts{{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  const Matrix k = unit_diagonal_kernel(inverse_distance_similarity(pts));
  EXPECT_EQ(k.diagonal(), Vector::Ones(3));
  Eigen::LLT<Matrix> llt(k);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(RelevanceAlpha, Values) {
  EXPECT_DOUBLE_EQ(relevance_alpha(0.5), 0.5);
  EXPECT_NEAR(relevance_alpha(0.9), 4.5, 1e-12);
  EXPECT_DOUBLE_EQ(relevance_alpha(0.75), 1.5);
  EXPECT_THROW(relevance_alpha(0.0), ValidationError);
  EXPECT_THROW(relevance_alpha(1.0), ValidationError);
}

TEST(NormalizeWeights, SumsToOne) {
  std::vector<AttributeSpec> specs{{"a", AttributeKind::appearance, Direction::increase, 3.0},
                                   {"b", AttributeKind::time, Direction::decrease, 1.0}};
  const auto n = normalize_weights(specs);
  EXPECT_DOUBLE_EQ(n[0].weight, 0.75);
  EXPECT_DOUBLE_EQ(n[1].weight, 0.25);
  specs[0].weight = -1.0;
  EXPECT_THROW(normalize_weights(specs), ValidationError);
  specs[0].weight = 0.0;
  specs[1].weight = 0.0;
  EXPECT_THROW(normalize_weights(specs), ValidationError);
}

class BuildBundle : public ::testing::Test {
 protected:
  void SetUp() override {
    gallery = {record("e", {0, 0}, 10, 1, 1), record("d", {1, 0}, 100, 2, 2),
               record("c", {0, 1}, 700, 3, 3), record("b", {1, 1}, 1000, 4, 4),
               record("a", {2, 2}, 1400, 5, 5)};
    scores = {{"a", 0.1}, {"b", 0.9}, {"c", 0.5}, {"d", 0.7}, {"e", 0.3}};
  }

  std::vector<ImageRecord> gallery;
  std::map<std::string, double> scores;
  std::vector<AttributeSpec> app{{"appearance", AttributeKind::appearance, Direction::increase, 1}};
};

TEST_F(BuildBundle, KeepsTopNInScoreOrder) {
  const auto b = build_bundle(gallery, scores, app, 3);
  EXPECT_EQ(b.candidate_ids, (std::vector<std::string>{"b", "d", "c"}));
  EXPECT_DOUBLE_EQ(b.relevance(0), 0.9);
  EXPECT_DOUBLE_EQ(b.relevance(2), 0.5);
}

TEST_F(BuildBundle, TiesBreakByAscendingId) {
  scores["a"] = 0.9;
  const auto b = build_bundle(gallery, scores, app, 2);
  EXPECT_EQ(b.candidate_ids, (std::vector<std::string>{"a", "b"}));
}

TEST_F(BuildBundle, ThreeAttributes) {
  const std::vector<AttributeSpec> specs{
      {"appearance", AttributeKind::appearance, Direction::increase, 1},
      {"time", AttributeKind::time, Direction::increase, 1},
      {"geo", AttributeKind::geo, Direction::decrease, 1}};
  const auto b = build_bundle(gallery, scores, specs, 3);
  ASSERT_EQ(b.sources.size(), 3u);
  for (const auto& s : b.sources) {
    EXPECT_EQ(s.similarity.rows(), 3);
    EXPECT_EQ(s.kernel.rows(), 3);
    EXPECT_EQ(s.similarity.diagonal(), Vector::Ones(3));
    EXPECT_EQ(s.kernel.diagonal(), Vector::Ones(3));
  }
  EXPECT_EQ(b.source("time").embeddings.cols(), 2);
  EXPECT_EQ(b.source("geo").embeddings.cols(), 3);
  EXPECT_THROW(b.source("color"), ValidationError);
}

TEST_F(BuildBundle, GalleryOrderDoesNotMatter) {
  const auto forward = build_bundle(gallery, scores, app, 4);
  std::reverse(gallery.begin(), gallery.end());
  const auto reversed = build_bundle(gallery, scores, app, 4);
  EXPECT_EQ(forward.candidate_ids, reversed.candidate_ids);
  EXPECT_EQ(forward.sources[0].kernel, reversed.sources[0].kernel);
}

TEST_F(BuildBundle, MissingAttributeNamesItemAndAttribute) {
  gallery[1].time_minutes.reset();
  const std::vector<AttributeSpec> specs{{"when", AttributeKind::time, Direction::increase, 1}};
  try {
    build_bundle(gallery, scores, specs, 5);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'d'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'when'"), std::string::npos) << msg;
  }
}

TEST_F(BuildBundle, MissingScoreAndDuplicateName) {
  scores.erase("c");
  EXPECT_THROW(build_bundle(gallery, scores, app, 3), ValidationError);
  scores["c"] = 0.5;
  const std::vector<AttributeSpec> twice{app[0], app[0]};
  EXPECT_THROW(build_bundle(gallery, scores, twice, 3), ValidationError);
}

}  // namespace
}  // namespace msdpp
