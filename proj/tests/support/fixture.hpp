#pragma once

// Small generated snapshot shared by the service and server tests.

#include "msdpp/service.hpp"

namespace msdpp::testing {

inline Snapshot small_snapshot(TnMode mode = TnMode::off, std::size_t k = 10) {
  SyntheticPlan plan;
  plan.seed = 5;
  plan.n_items = 60;
  plan.clusters = 3;
  plan.n_queries = 3;
  auto data = gen_synthetic(plan);
  TaskConfig cfg;
  cfg.rerank.k = k;
  cfg.rerank.top_n = 40;
  cfg.rerank.theta = 0.7;
  cfg.rerank.tn_mode = mode;
  cfg.rerank.specs = {{"appearance", AttributeKind::appearance, Direction::increase, 0.5},
                      {"time", AttributeKind::time, Direction::increase, 0.3},
                      {"geo", AttributeKind::geo, Direction::decrease, 0.2}};
  cfg.baseline.num_clusters = 4;
  cfg.validate();
  return Snapshot(std::move(cfg), std::move(data.gallery), std::move(data.queries));
}

}  // namespace msdpp::testing
