// msdpp: multi-attribute diversity re-ranking from the command line.
//
//   msdpp rerank --gallery G --queries Q --config C --method M --out F
//   msdpp eval   --results F --queries Q --config C [--gallery G]
//   msdpp sweep  --config C --gallery G --queries Q [--attribute NAME]
//   msdpp gen    --seed N --items N --clusters N --out-dir D
//   msdpp serve  --bind HOST:PORT --gallery G --queries Q --config C
//
// MSDPP_CONFIG supplies --config when omitted; MSDPP_LOG_LEVEL sets the log
// level (trace, debug, info, warn, error, off).

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "msdpp/server.hpp"
#include "msdpp/service.hpp"

namespace {

using namespace msdpp;

constexpr int kExitValidation = 2;
constexpr int kExitFailure = 1;

RerankServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
}

std::string require_config(const std::string& flag) {
  const auto path = flag.empty() ? env_or("MSDPP_CONFIG", "") : flag;
  if (path.empty()) throw ValidationError("--config is required (or set MSDPP_CONFIG)");
  return path;
}

Snapshot load_snapshot(const std::string& config, const std::string& gallery,
                       const std::string& queries) {
  auto cfg = load_task_config(require_config(config));
  auto g = load_gallery(gallery);
  auto q = load_queries(queries, g);
  return Snapshot(std::move(cfg), std::move(g), std::move(q));
}

std::vector<Json> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::vector<Json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_st("msdpp");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(env_or("MSDPP_LOG_LEVEL", "warn")));

  CLI::App app{"Multi-source DPP diversity re-ranking"};
  app.require_subcommand(1);

  std::string gallery, queries, config, out, results, method = "msdpp", attribute, bind_addr;
  std::string out_dir;
  std::vector<std::string> only;
  unsigned threads = 1;
  bool diagnostics = false;
  SyntheticPlan plan;
  bool no_time = false, no_geo = false;

  auto* rerank = app.add_subcommand("rerank", "Re-rank every query and write one response per line");
  rerank->add_option("--gallery", gallery, "Gallery records (one JSON object per line)")->required();
  rerank->add_option("--queries", queries, "Query records (one JSON object per line)")->required();
  rerank->add_option("--config", config, "Task configuration document");
  rerank->add_option("--method", method, "msdpp, mmr, kdpp, clustering or none");
  rerank->add_option("--out", out, "Output file ('-' for stdout)");
  rerank->add_option("--query", only, "Restrict to these query ids");
  rerank->add_option("--threads", threads, "Queries processed in parallel");
  rerank->add_flag("--diagnostics", diagnostics, "Include per-step diagnostics");

  auto* eval = app.add_subcommand("eval", "Aggregate metrics over rerank output");
  eval->add_option("--results", results, "Output of `rerank`")->required();
  eval->add_option("--queries", queries, "Query records")->required();
  eval->add_option("--config", config, "Task configuration document");
  eval->add_option("--gallery", gallery, "Recompute diversity from the gallery");
  eval->add_option("--out", out, "Output file ('-' for stdout)");

  auto* sweep = app.add_subcommand("sweep", "Weight sweep or grid search");
  sweep->add_option("--config", config, "Task configuration document");
  sweep->add_option("--gallery", gallery, "Gallery records")->required();
  sweep->add_option("--queries", queries, "Query records")->required();
  sweep->add_option("--attribute", attribute, "Attribute whose weight is swept");
  sweep->add_option("--out", out, "Output file ('-' for stdout)");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic gallery and query set");
  gen->add_option("--seed", plan.seed, "Random seed");
  gen->add_option("--items", plan.n_items, "Gallery size");
  gen->add_option("--clusters", plan.clusters, "Number of appearance blobs");
  gen->add_option("--dim", plan.d_appearance, "Appearance dimension");
  gen->add_option("--queries", plan.n_queries, "Number of queries");
  gen->add_option("--separation", plan.cluster_separation, "Scale of blob centers");
  gen->add_option("--spread", plan.cluster_spread, "Per-item appearance noise");
  gen->add_option("--time-spread", plan.time_spread_minutes, "Per-item time noise (minutes)");
  gen->add_option("--geo-spread", plan.geo_spread_deg, "Per-item location noise (degrees)");
  gen->add_option("--noise", plan.relevance_noise, "Relevance score noise");
  gen->add_flag("--no-time", no_time, "Omit shooting times");
  gen->add_flag("--no-geo", no_geo, "Omit locations");
  gen->add_option("--out-dir", out_dir, "Directory for gallery.jsonl and queries.jsonl")->required();

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a loaded snapshot");
  serve->add_option("--bind", bind_addr, "HOST:PORT")->default_val("127.0.0.1:8080");
  serve->add_option("--gallery", gallery, "Gallery records")->required();
  serve->add_option("--queries", queries, "Query records")->required();
  serve->add_option("--config", config, "Task configuration document");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rerank) {
      const auto snap = load_snapshot(config, gallery, queries);
      const auto docs = cmd_rerank(snap, parse_rerank_method(method), only,
                                   threads, diagnostics);
      std::string text;
      for (const auto& d : docs) text += d.dump() + "\n";
      write_output(out, text);
    } else if (*eval) {
      auto cfg = load_task_config(require_config(config));
      std::vector<ImageRecord> g;
      if (!gallery.empty()) g = load_gallery(gallery);
      auto q = load_queries(queries, g);
      const Snapshot snap(std::move(cfg), std::move(g), std::move(q));
      write_output(out, cmd_eval(read_results(results), snap, !gallery.empty()).dump(2) + "\n");
    } else if (*sweep) {
      const auto snap = load_snapshot(config, gallery, queries);
      const auto target = attribute.empty() ? std::nullopt : std::optional<std::string>(attribute);
      write_output(out, cmd_sweep(snap, target).dump(2) + "\n");
    } else if (*gen) {
      plan.with_time = !no_time;
      plan.with_geo = !no_geo;
      const auto data = gen_synthetic(plan);
      std::filesystem::create_directories(out_dir);
      save_gallery(std::filesystem::path(out_dir) / "gallery.jsonl", data.gallery);
      save_queries(std::filesystem::path(out_dir) / "queries.jsonl", data.queries);
    } else if (*serve) {
      const auto colon = bind_addr.rfind(':');
      if (colon == std::string::npos) throw ValidationError("--bind expects HOST:PORT");
      const auto host = bind_addr.substr(0, colon);
      const int port = std::stoi(bind_addr.substr(colon + 1));
      auto snap = std::make_shared<const Snapshot>(load_snapshot(config, gallery, queries));
      RerankServer server(snap);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("listening on {}:{}", host, bound);
      std::cerr << "msdpp serving on " << host << ":" << bound << std::endl;
      server.listen();
      g_server = nullptr;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
