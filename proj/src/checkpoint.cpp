// SPDX-License-Identifier: Apache-2.0
#include "kecr/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "kecr/errors.hpp"

namespace kecr {

namespace {

nlohmann::ordered_json tensor_values(const Tensor& t) {
  auto arr = nlohmann::ordered_json::array();
  for (double v : t.values()) arr.push_back(v);
  return arr;
}

Tensor read_tensor(const nlohmann::json& shape_json, const nlohmann::json& values_json, const std::string& what) {
  if (!shape_json.is_array() || !values_json.is_array()) throw ParseError("checkpoint: bad tensor for " + what);
  Shape shape = shape_json.get<Shape>();
  std::vector<double> values = values_json.get<std::vector<double>>();
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

std::string checkpoint_to_string(const Config& cfg, const ParameterStore& params) {
  nlohmann::ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["config_echo"] = config_to_json(cfg);
  auto& p = j["params"] = nlohmann::ordered_json::object();
  auto& opt = j["optimizer_state"] = nlohmann::ordered_json::object();
  for (const auto& [name, entry] : params) {
    nlohmann::ordered_json e;
    e["shape"] = entry.value.shape();
    e["values"] = tensor_values(entry.value);
    e["trainable"] = entry.trainable;
    p[name] = std::move(e);
    nlohmann::ordered_json o;
    o["step"] = entry.step;
    o["m"] = tensor_values(entry.m);
    o["v"] = tensor_values(entry.v);
    opt[name] = std::move(o);
  }
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format_version") || j["format_version"] != kCheckpointFormatVersion) {
    throw ParseError("checkpoint: unsupported format_version");
  }
  Checkpoint ck;
  ck.config = config_from_json(j.at("config_echo"));
  for (const auto& [name, e] : j.at("params").items()) {
    Tensor value = read_tensor(e.at("shape"), e.at("values"), name);
    Parameter& p = ck.params.add(name, std::move(value), e.value("trainable", true));
    if (j.contains("optimizer_state") && j["optimizer_state"].contains(name)) {
      const auto& o = j["optimizer_state"][name];
      p.step = o.value("step", std::uint64_t{0});
      const auto m = o.at("m").get<std::vector<double>>();
      const auto v = o.at("v").get<std::vector<double>>();
      if (!m.empty()) p.m = Tensor(p.value.shape(), m);
      if (!v.empty()) p.v = Tensor(p.value.shape(), v);
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Config& cfg, const ParameterStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(cfg, params);
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("checkpoint not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace kecr
