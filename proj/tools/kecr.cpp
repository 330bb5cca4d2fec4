// SPDX-License-Identifier: Apache-2.0
// Command-line entry point: build-kg, pretrain, train, eval, chat, serve, gen-data.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "kecr/checkpoint.hpp"
#include "kecr/config.hpp"
#include "kecr/engine.hpp"
#include "kecr/errors.hpp"
#include "kecr/evaluation.hpp"
#include "kecr/kg.hpp"
#include "kecr/mi_pretrainer.hpp"
#include "kecr/model.hpp"
#include "kecr/server.hpp"
#include "kecr/synthetic.hpp"
#include "kecr/text.hpp"
#include "kecr/trainer.hpp"

namespace {

using namespace kecr;

constexpr int kExitMissingFile = 2;
constexpr int kExitFailure = 1;

void set_log_level() {
  const char* env = std::getenv("KECR_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

Config resolve_config(const std::string& path, std::optional<std::uint64_t> seed) {
  Config cfg = path.empty() ? Config{} : load_config(path);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

std::vector<PreparedConversation> load_prepared(const std::string& corpus_path, const KnowledgeGraph& g,
                                                const Config& cfg) {
  const Lexicon lexicon(g);
  CorpusDiagnostics diag;
  auto corpus = load_corpus(corpus_path, g, &lexicon, &diag);
  spdlog::info("corpus: {} conversations, {} merged turns, {} unresolved mentions", diag.conversations,
               diag.merged_turns, diag.unresolved_mentions);
  return prepare_corpus(corpus, g, UtteranceEmbedder(cfg));
}

struct DataArgs {
  std::string kg;
  std::string corpus;
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_data_args(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--kg", a.kg, "expanded graph binary from build-kg")->required();
  cmd->add_option("--corpus", a.corpus, "dialogue corpus (JSON lines)")->required();
  cmd->add_option("--config", a.config, "config file (key = value lines)");
  cmd->add_option("--seed", a.seed, "override the config seed");
}

int run(int argc, char** argv) {
  CLI::App app{"Knowledge-enhanced conversational recommender"};
  app.require_subcommand(1);

  // build-kg
  auto* build = app.add_subcommand("build-kg", "expand a triple file into a graph binary");
  std::string triples, aliases, kg_out;
  build->add_option("--triples", triples, "head<TAB>relation<TAB>tail lines")->required();
  build->add_option("--aliases", aliases, "alias lexicon (JSON lines)");
  build->add_option("--out", kg_out, "output graph binary")->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "mutual-information pretraining of the encoders");
  DataArgs pre_args;
  std::string pre_out, pre_trace;
  add_data_args(pre, pre_args);
  pre->add_option("--out", pre_out, "output checkpoint")->required();
  pre->add_option("--trace", pre_trace, "per-epoch CSV trace");

  // train
  auto* tr = app.add_subcommand("train", "pretraining then joint policy and reasoner training");
  DataArgs tr_args;
  std::string tr_out, tr_trace_dir;
  add_data_args(tr, tr_args);
  tr->add_option("--out", tr_out, "output checkpoint")->required();
  tr->add_option("--trace-dir", tr_trace_dir, "directory for pretrain_trace.csv and joint_trace.csv");

  // eval
  auto* ev = app.add_subcommand("eval", "Recall@k, Dist-n and BLEU on the test split");
  std::string ev_kg, ev_corpus, ev_ckpt, ev_out = "metrics.json", ev_templates;
  bool ev_all = false;
  ev->add_option("--kg", ev_kg, "expanded graph binary")->required();
  ev->add_option("--corpus", ev_corpus, "dialogue corpus")->required();
  ev->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
  ev->add_option("--templates", ev_templates, "response templates (JSON)");
  ev->add_option("--out", ev_out, "metrics output");
  ev->add_flag("--all", ev_all, "evaluate every conversation instead of the test split");

  // chat and serve share the engine flags.
  std::string en_kg, en_ckpt, en_templates, en_config, en_generator;
  std::optional<std::uint64_t> en_seed;
  auto add_engine_args = [&](CLI::App* cmd) {
    cmd->add_option("--kg", en_kg, "expanded graph binary")->required();
    cmd->add_option("--checkpoint", en_ckpt, "trained checkpoint")->required();
    cmd->add_option("--templates", en_templates, "response templates (JSON)");
    cmd->add_option("--config", en_config, "override the checkpoint config");
    cmd->add_option("--seed", en_seed, "override the seed");
    cmd->add_option("--generator", en_generator, "external text generator URL");
  };
  auto* chat = app.add_subcommand("chat", "interactive terminal session");
  add_engine_args(chat);
  auto* srv = app.add_subcommand("serve", "session API over HTTP");
  add_engine_args(srv);
  int port = 8080;
  std::string host = "127.0.0.1";
  srv->add_option("--port", port, "listen port");
  srv->add_option("--host", host, "listen address");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  std::string gen_kind = "toy", gen_out;
  std::uint64_t gen_seed = 42;
  std::size_t gen_n = 0;
  gen->add_option("--kind", gen_kind, "toy, mi, policy or reasoner")
      ->check(CLI::IsMember({"toy", "mi", "policy", "reasoner"}));
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--conversations", gen_n, "number of conversations (0 for the default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  set_log_level();

  try {
    if (*build) {
      LoadReport report;
      const KnowledgeGraph g = expand_graph(load_triples(triples, aliases, &report));
      save_graph(g, kg_out);
      std::cout << "entities " << g.entity_count() << "\nrelations " << g.relation_count() << "\ntriples "
                << g.triple_count() << "\n";
      spdlog::info("{} lines, {} duplicates, {} self loops, {} kind conflicts", report.lines,
                   report.duplicate_triples, report.self_loops, report.kind_conflicts);
      return 0;
    }
    if (*pre) {
      const Config cfg = resolve_config(pre_args.config, pre_args.seed);
      const KnowledgeGraph g = load_graph(pre_args.kg);
      auto split = split_corpus(load_prepared(pre_args.corpus, g, cfg), cfg.seed);
      ParameterStore params = init_model(g, cfg);
      const auto trace = pretrain(split.train, g, params, cfg);
      save_checkpoint(pre_out, cfg, params);
      if (!pre_trace.empty()) write_mi_trace(pre_trace, trace);
      std::cout << "checkpoint " << pre_out << "\n";
      return 0;
    }
    if (*tr) {
      const Config cfg = resolve_config(tr_args.config, tr_args.seed);
      const KnowledgeGraph g = load_graph(tr_args.kg);
      const auto result = train(load_prepared(tr_args.corpus, g, cfg), g, cfg);
      save_checkpoint(tr_out, cfg, result.params);
      if (!tr_trace_dir.empty()) {
        std::filesystem::create_directories(tr_trace_dir);
        write_mi_trace(std::filesystem::path(tr_trace_dir) / "pretrain_trace.csv", result.pretrain_trace);
        write_joint_trace(std::filesystem::path(tr_trace_dir) / "joint_trace.csv", result.joint_trace);
      }
      std::cout << "checkpoint " << tr_out << "\n";
      return 0;
    }
    if (*ev) {
      if (!std::filesystem::exists(ev_ckpt)) {
        std::cerr << "error: checkpoint not found: " << ev_ckpt << "\n";
        return kExitMissingFile;
      }
      std::optional<std::filesystem::path> templates;
      if (!ev_templates.empty()) templates = ev_templates;
      auto engine = load_engine(ev_kg, ev_ckpt, templates);
      auto prepared = load_prepared(ev_corpus, engine->graph(), engine->config());
      const auto data = ev_all ? prepared : split_corpus(std::move(prepared), engine->config().seed).test;
      const auto report = evaluate(*engine, data);
      write_metrics(ev_out, report);
      std::cout << report_to_json(report).dump(2) << "\n";
      return 0;
    }
    if (*chat || *srv) {
      std::optional<std::filesystem::path> templates;
      if (!en_templates.empty()) templates = en_templates;
      std::optional<Config> cfg;
      if (!en_config.empty() || en_seed) {
        cfg = en_config.empty() ? load_checkpoint(en_ckpt).config : load_config(en_config);
        if (en_seed) cfg->seed = *en_seed;
      }
      auto engine = load_engine(en_kg, en_ckpt, templates, cfg, en_generator);
      if (*srv) {
        serve(*engine, host, port);
        return 0;
      }
      SessionManager sessions(*engine);
      const std::string id = sessions.create();
      std::cout << "session " << id << " (empty line to quit)\n";
      for (std::string line; std::cout << "> " << std::flush, std::getline(std::cin, line) && !line.empty();) {
        const auto reply = sessions.utterance(id, line);
        std::cout << "[" << reply["action"].get<std::string>() << "] " << reply["reply"].get<std::string>() << "\n";
        if (!reply["explanation"].get<std::string>().empty()) {
          std::cout << "  because " << reply["explanation"].get<std::string>() << "\n";
        }
      }
      return 0;
    }
    if (*gen) {
      SyntheticData data;
      if (gen_kind == "toy") data = toy_scenario(gen_n ? gen_n : 50, gen_seed);
      if (gen_kind == "mi") data = planted_mi_corpus(gen_n ? gen_n : 200, 50, gen_seed);
      if (gen_kind == "policy") data = planted_policy_corpus(gen_n ? gen_n : 300, gen_seed);
      if (gen_kind == "reasoner") data = planted_reasoner_corpus(gen_n ? gen_n : 600, gen_seed);
      write_dataset(data, gen_out);
      std::cout << "wrote " << data.corpus.size() << " conversations to " << gen_out << "\n";
      return 0;
    }
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
