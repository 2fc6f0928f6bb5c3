#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "msdpp/baselines.hpp"
#include "msdpp/dataio.hpp"
#include "test_support.hpp"

namespace msdpp {
namespace {

using testing::make_bundle;
using testing::random_kernel;
using testing::random_relevance;
using testing::specs_for;

BaselineConfig baseline(BaselineMethod method, std::vector<AttributeSpec> specs, std::size_t k,
                        double param = 0.5) {
  BaselineConfig c;
  c.method = method;
  c.specs = std::move(specs);
  c.k = k;
  c.lambda_or_theta = param;
  return c;
}

TEST(Mmr, HandEvaluatedSteps) {
  Matrix s{{1.0, 0.9, 0.1}, {0.9, 1.0, 0.2}, {0.1, 0.2, 1.0}};
  Vector r(3);
  r << 0.9, 0.8, 0.3;
  const auto specs = specs_for(1);
  const auto b = make_bundle({s}, r, specs);
  // step 1: 0.45, 0.40, 0.15; step 2: item 1 -> 0.40 - 0.45, item 2 -> 0.15 - 0.05
  const auto out = mmr_rerank(b, baseline(BaselineMethod::mmr, specs, 2));
  EXPECT_EQ(out.indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_NEAR(out.steps[1].objective, 0.10, 1e-15);
}

TEST(Mmr, ZeroLambdaIsRelevanceOrder) {
  std::mt19937_64 rng(4);
  const auto specs = specs_for(2, {0.5, 0.5}, {Direction::increase, Direction::decrease});
  const auto b = make_bundle({random_kernel(rng, 25), random_kernel(rng, 25)},
                             random_relevance(rng, 25), specs);
  EXPECT_EQ(mmr_rerank(b, baseline(BaselineMethod::mmr, specs, 10, 0.0)).ids,
            relevance_rerank(b, 10).ids);
}

TEST(Kdpp, IdentityIsRelevanceOrder) {
  std::mt19937_64 rng(6);
  const auto specs = specs_for(1);
  const auto b = make_bundle({Matrix::Identity(12, 12)}, random_relevance(rng, 12), specs);
  EXPECT_EQ(kdpp_rerank(b, baseline(BaselineMethod::kdpp, specs, 6)).ids, relevance_rerank(b, 6).ids);
}

TEST(Kdpp, MixedDirectionsRepairKernel) {
  std::mt19937_64 rng(9);
  const auto specs = specs_for(2, {0.3, 0.7}, {Direction::increase, Direction::decrease});
  const auto b = make_bundle({random_kernel(rng, 15), random_kernel(rng, 15)},
                             random_relevance(rng, 15), specs);
  const Matrix k = kdpp_kernel(b, specs);
  Eigen::LLT<Matrix> llt(k);
  EXPECT_EQ(llt.info(), Eigen::Success);
  const auto out = kdpp_rerank(b, baseline(BaselineMethod::kdpp, specs, 7));
  EXPECT_EQ(out.ids.size(), 7u);
  EXPECT_EQ(std::set<std::string>(out.ids.begin(), out.ids.end()).size(), 7u);
}

// Two tight blobs far apart in appearance; relevance interleaves them so a
// relevance sort alone would not alternate.
class TwoBlobs : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd(0.0, 0.05);
    for (int i = 0; i < 12; ++i) {
      ImageRecord rec;
      rec.id = "i" + std::to_string(10 + i);
      const double cx = i < 6 ? 0.0 : 10.0;
      rec.appearance = {cx + nd(rng), nd(rng)};
      gallery.push_back(rec);
      scores[rec.id] = (i < 6 ? 0.9 : 0.5) - 0.01 * i;
      blob[rec.id] = i < 6 ? 0 : 1;
    }
  }

  SimilarityBundle bundle() const { return build_bundle(gallery, scores, specs, 12); }

  std::vector<ImageRecord> gallery;
  std::map<std::string, double> scores;
  std::map<std::string, int> blob;
  std::vector<AttributeSpec> specs{{"appearance", AttributeKind::appearance, Direction::increase, 1}};
};

TEST_F(TwoBlobs, IncreaseModeAlternates) {
  auto cfg = baseline(BaselineMethod::clustering, specs, 8);
  cfg.num_clusters = 2;
  const auto out = clustering_rerank(bundle(), cfg);
  for (std::size_t i = 0; i < out.ids.size(); ++i)
    EXPECT_EQ(blob.at(out.ids[i]), static_cast<int>(i % 2)) << "position " << i;
}

TEST_F(TwoBlobs, MixedModeExhaustsFirstCluster) {
  auto cfg = baseline(BaselineMethod::clustering, specs, 8);
  cfg.num_clusters = 2;
  cfg.mode = BaselineMode::mixed;
  const auto out = clustering_rerank(bundle(), cfg);
  for (std::size_t i = 0; i < out.ids.size(); ++i)
    EXPECT_EQ(blob.at(out.ids[i]), i < 6 ? 0 : 1) << "position " << i;
}

TEST_F(TwoBlobs, OneClusterIsRelevanceOrder) {
  const auto b = bundle();
  for (auto mode : {BaselineMode::increase, BaselineMode::mixed}) {
    auto cfg = baseline(BaselineMethod::clustering, specs, 9);
    cfg.num_clusters = 1;
    cfg.mode = mode;
    EXPECT_EQ(clustering_rerank(b, cfg).ids, relevance_rerank(b, 9).ids);
  }
}

TEST_F(TwoBlobs, DecreaseDirectionImpliesMixedMode) {
  auto cfg = baseline(BaselineMethod::clustering, specs, 4);
  EXPECT_EQ(cfg.effective_mode(), BaselineMode::increase);
  cfg.specs[0].direction = Direction::decrease;
  EXPECT_EQ(cfg.effective_mode(), BaselineMode::mixed);
}

TEST(KMeans, RecoversGeneratorBlobs) {
  SyntheticPlan plan;
  plan.seed = 7;
  plan.n_items = 200;
  plan.clusters = 4;
  const auto data = gen_synthetic(plan);
  Matrix pts(200, static_cast<Eigen::Index>(plan.d_appearance));
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t d = 0; d < plan.d_appearance; ++d)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = data.gallery[i].appearance[d];
  const auto km = kmeans(pts, 4, 0);
  EXPECT_LE(km.iterations, 50);

  // Purity: each found cluster votes for its majority generating label.
  std::map<std::size_t, std::map<std::size_t, int>> votes;
  for (std::size_t i = 0; i < 200; ++i) ++votes[km.assignment[i]][data.labels[i]];
  int agree = 0;
  for (const auto& [cluster, counts] : votes) {
    int best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    agree += best;
  }
  EXPECT_GE(agree / 200.0, 0.9);

  const auto again = kmeans(pts, 4, 0);
  EXPECT_EQ(km.assignment, again.assignment);
}

TEST(KMeans, RejectsBadClusterCount) {
  Matrix pts = Matrix::Zero(3, 2);
  EXPECT_THROW(kmeans(pts, 0, 0), ValidationError);
  EXPECT_THROW(kmeans(pts, 4, 0), ValidationError);
}

TEST(Baselines, AllReturnDistinctDeterministicLists) {
  SyntheticPlan plan;
  plan.seed = 3;
  plan.n_items = 60;
  const auto data = gen_synthetic(plan);
  const std::vector<AttributeSpec> specs{
      {"appearance", AttributeKind::appearance, Direction::increase, 0.5},
      {"time", AttributeKind::time, Direction::decrease, 0.5}};
  const auto b = build_bundle(data.gallery, data.queries[0].relevance, specs, 40);
  for (auto method : {BaselineMethod::mmr, BaselineMethod::kdpp, BaselineMethod::clustering}) {
    auto cfg = baseline(method, specs, 10);
    cfg.num_clusters = 5;
    const auto first = run_baseline(b, cfg);
    const auto second = run_baseline(b, cfg);
    EXPECT_EQ(first.ids, second.ids) << to_string(method);
    EXPECT_EQ(std::set<std::string>(first.ids.begin(), first.ids.end()).size(), 10u);
  }
  EXPECT_THROW(run_baseline(b, baseline(BaselineMethod::mmr, specs, 41)), ValidationError);
}

TEST(Baselines, ParseNames) {
  EXPECT_EQ(parse_baseline_method("clustering"), BaselineMethod::clustering);
  EXPECT_EQ(parse_baseline_mode("mixed"), BaselineMode::mixed);
  EXPECT_THROW(parse_baseline_method("random"), ValidationError);
}

}  // namespace
}  // namespace msdpp
