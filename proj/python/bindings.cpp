// SPDX-License-Identifier: Apache-2.0
// Python module kecr._kecr. Structured results cross the boundary as JSON
// strings; the package wrapper decodes them.
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "kecr/checkpoint.hpp"
#include "kecr/config.hpp"
#include "kecr/corpus.hpp"
#include "kecr/engine.hpp"
#include "kecr/errors.hpp"
#include "kecr/evaluation.hpp"
#include "kecr/kg.hpp"
#include "kecr/metrics.hpp"
#include "kecr/model.hpp"
#include "kecr/synthetic.hpp"
#include "kecr/text.hpp"
#include "kecr/trainer.hpp"

namespace py = pybind11;
using namespace kecr;

namespace {

Config config_from_text(const std::string& json_text) {
  return json_text.empty() ? Config{} : config_from_json(nlohmann::json::parse(json_text));
}

std::vector<PreparedConversation> prepared(const std::string& corpus, const KnowledgeGraph& g, const Config& cfg) {
  const Lexicon lexicon(g);
  return prepare_corpus(load_corpus(corpus, g, &lexicon), g, UtteranceEmbedder(cfg));
}

std::string build_kg(const std::string& triples, const std::string& aliases, const std::string& out) {
  LoadReport report;
  const KnowledgeGraph g = expand_graph(load_triples(triples, aliases, &report));
  save_graph(g, out);
  return nlohmann::ordered_json{{"entities", g.entity_count()},
                                {"relations", g.relation_count()},
                                {"triples", g.triple_count()},
                                {"duplicates", report.duplicate_triples},
                                {"self_loops", report.self_loops}}
      .dump();
}

std::string train_model(const std::string& kg, const std::string& corpus, const std::string& out,
                        const std::string& config_json) {
  const Config cfg = config_from_text(config_json);
  const KnowledgeGraph g = load_graph(kg);
  TrainResult result;
  {
    py::gil_scoped_release release;
    result = train(prepared(corpus, g, cfg), g, cfg);
  }
  save_checkpoint(out, cfg, result.params);
  nlohmann::ordered_json j;
  j["pretrain"] = nlohmann::json::array();
  for (const auto& e : result.pretrain_trace) {
    j["pretrain"].push_back({{"epoch", e.epoch}, {"objective", e.mean_objective}, {"pos_g", e.pos_mean_g},
                             {"neg_g", e.neg_mean_g}});
  }
  j["joint"] = nlohmann::json::array();
  for (const auto& e : result.joint_trace) {
    j["joint"].push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation_loss", e.validation_loss},
                          {"train_action_accuracy", e.train_action_accuracy}});
  }
  return j.dump();
}

std::string evaluate_model(const std::string& kg, const std::string& corpus, const std::string& checkpoint,
                           bool all) {
  auto engine = load_engine(kg, checkpoint);
  auto data = prepared(corpus, engine->graph(), engine->config());
  if (!all) data = split_corpus(std::move(data), engine->config().seed).test;
  EvaluationReport report;
  {
    py::gil_scoped_release release;
    report = evaluate(*engine, data);
  }
  return report_to_json(report).dump();
}

std::size_t gen_data(const std::string& kind, const std::string& out, std::uint64_t seed, std::size_t n) {
  SyntheticData data;
  if (kind == "toy") {
    data = toy_scenario(n ? n : 50, seed);
  } else if (kind == "mi") {
    data = planted_mi_corpus(n ? n : 200, 50, seed);
  } else if (kind == "policy") {
    data = planted_policy_corpus(n ? n : 300, seed);
  } else if (kind == "reasoner") {
    data = planted_reasoner_corpus(n ? n : 600, seed);
  } else {
    throw ConfigError("unknown dataset kind '" + kind + "'");
  }
  write_dataset(data, out);
  return data.corpus.size();
}

/// Engine plus its live sessions.
class PyRecommender {
 public:
  PyRecommender(const std::string& kg, const std::string& checkpoint, const std::optional<std::string>& templates,
                const std::string& generator)
      : engine_(load_engine(kg, checkpoint,
                            templates ? std::optional<std::filesystem::path>(*templates) : std::nullopt,
                            std::nullopt, generator)),
        sessions_(std::make_unique<SessionManager>(*engine_)) {}

  std::string create_session() { return sessions_->create(); }
  std::string utterance(const std::string& id, const std::string& text) {
    py::gil_scoped_release release;
    return sessions_->utterance(id, text).dump();
  }
  std::string describe(const std::string& id) const { return sessions_->describe(id).dump(); }
  bool close(const std::string& id) { return sessions_->close(id); }
  std::vector<std::string> link(const std::string& text) const {
    std::vector<std::string> out;
    for (auto e : engine_->lexicon().link(text)) out.push_back(engine_->graph().name(e));
    return out;
  }
  std::size_t entity_count() const { return engine_->graph().entity_count(); }

 private:
  std::unique_ptr<Engine> engine_;
  std::unique_ptr<SessionManager> sessions_;
};

}  // namespace

PYBIND11_MODULE(_kecr, m) {
  m.doc() = "Knowledge-enhanced conversational recommender core";

  // Most recently registered translators run first, so the base goes first.
  py::register_exception<Error>(m, "KecrError", PyExc_RuntimeError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_FileNotFoundError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("default_config", [] { return config_to_json(Config{}).dump(); });
  m.def("build_kg", &build_kg, py::arg("triples"), py::arg("aliases"), py::arg("out"));
  m.def("gen_data", &gen_data, py::arg("kind"), py::arg("out"), py::arg("seed") = 42, py::arg("conversations") = 0);
  m.def("train", &train_model, py::arg("kg"), py::arg("corpus"), py::arg("out"), py::arg("config_json") = "");
  m.def("evaluate", &evaluate_model, py::arg("kg"), py::arg("corpus"), py::arg("checkpoint"), py::arg("all") = false);

  m.def(
      "recall_at_k",
      [](const std::vector<std::uint32_t>& ranked, std::uint32_t gold, std::size_t k) {
        std::vector<EntityId> ids(ranked.begin(), ranked.end());
        return recall_at_k(ids, EntityId{gold}, k);
      },
      py::arg("ranked"), py::arg("gold"), py::arg("k"));
  m.def("distinct_n", &distinct_n, py::arg("texts"), py::arg("n"));
  m.def("bleu", &bleu, py::arg("candidate"), py::arg("references"));
  m.def("corpus_bleu", &corpus_bleu, py::arg("candidates"), py::arg("references"));

  py::class_<PyRecommender>(m, "Recommender")
      .def(py::init<const std::string&, const std::string&, const std::optional<std::string>&, const std::string&>(),
           py::arg("kg"), py::arg("checkpoint"), py::arg("templates") = std::nullopt, py::arg("generator") = "")
      .def("create_session", &PyRecommender::create_session)
      .def("utterance", &PyRecommender::utterance, py::arg("session_id"), py::arg("text"))
      .def("describe", &PyRecommender::describe, py::arg("session_id"))
      .def("close", &PyRecommender::close, py::arg("session_id"))
      .def("link", &PyRecommender::link, py::arg("text"))
      .def_property_readonly("entity_count", &PyRecommender::entity_count);
}
