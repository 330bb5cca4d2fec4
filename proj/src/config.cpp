// SPDX-License-Identifier: Apache-2.0
#include "kecr/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "kecr/errors.hpp"

namespace kecr {

void Config::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (embed_dim == 0) fail("embed_dim must be positive");
  if (rgcn_layers == 0) fail("rgcn_layers must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(lambda >= 0.0)) fail("lambda must be nonnegative");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be nonnegative");
  if (batch_pretrain == 0 || batch_joint == 0) fail("batch sizes must be positive");
  if (neg_samples == 0) fail("neg_samples must be positive");
  if (hash_buckets == 0) fail("hash_buckets must be positive");
  if (top_k == 0) fail("top_k must be positive");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

NormMode parse_norm(const std::string& value) {
  if (value == "const" || value == "constant") return NormMode::constant;
  if (value == "degree") return NormMode::degree;
  throw ConfigError("norm_mode must be const or degree, got '" + value + "'");
}

void set_key(Config& cfg, const std::string& key, const std::string& value) {
  if (key == "embed_dim") cfg.embed_dim = parse_number<std::size_t>(key, value);
  else if (key == "rgcn_layers") cfg.rgcn_layers = parse_number<std::size_t>(key, value);
  else if (key == "norm_mode") cfg.norm_mode = parse_norm(value);
  else if (key == "gamma") cfg.gamma = parse_number<double>(key, value);
  else if (key == "lambda") cfg.lambda = parse_number<double>(key, value);
  else if (key == "lr") cfg.lr = parse_number<double>(key, value);
  else if (key == "weight_decay") cfg.weight_decay = parse_number<double>(key, value);
  else if (key == "pretrain_epochs") cfg.pretrain_epochs = parse_number<std::size_t>(key, value);
  else if (key == "joint_epochs") cfg.joint_epochs = parse_number<std::size_t>(key, value);
  else if (key == "batch_pretrain") cfg.batch_pretrain = parse_number<std::size_t>(key, value);
  else if (key == "batch_joint") cfg.batch_joint = parse_number<std::size_t>(key, value);
  else if (key == "neg_samples") cfg.neg_samples = parse_number<std::size_t>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "finetune_encoders") cfg.finetune_encoders = parse_bool(key, value);
  else if (key == "damping_normalize") cfg.damping_normalize = parse_bool(key, value);
  else if (key == "hash_buckets") cfg.hash_buckets = parse_number<std::size_t>(key, value);
  else if (key == "patience") cfg.patience = parse_number<std::size_t>(key, value);
  else if (key == "top_k") cfg.top_k = parse_number<std::size_t>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

Config parse_config(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    set_key(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::ordered_json config_to_json(const Config& cfg) {
  nlohmann::ordered_json j;
  j["embed_dim"] = cfg.embed_dim;
  j["rgcn_layers"] = cfg.rgcn_layers;
  j["norm_mode"] = cfg.norm_mode == NormMode::constant ? "const" : "degree";
  j["gamma"] = cfg.gamma;
  j["lambda"] = cfg.lambda;
  j["lr"] = cfg.lr;
  j["weight_decay"] = cfg.weight_decay;
  j["pretrain_epochs"] = cfg.pretrain_epochs;
  j["joint_epochs"] = cfg.joint_epochs;
  j["batch_pretrain"] = cfg.batch_pretrain;
  j["batch_joint"] = cfg.batch_joint;
  j["neg_samples"] = cfg.neg_samples;
  j["seed"] = cfg.seed;
  j["finetune_encoders"] = cfg.finetune_encoders;
  j["damping_normalize"] = cfg.damping_normalize;
  j["hash_buckets"] = cfg.hash_buckets;
  j["patience"] = cfg.patience;
  j["top_k"] = cfg.top_k;
  return j;
}

std::string format_config(const Config& cfg) {
  std::ostringstream out;
  const auto j = config_to_json(cfg);
  for (const auto& [key, value] : j.items()) {
    out << key << " = " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  return out.str();
}

Config config_from_json(const nlohmann::json& j) {
  Config cfg;
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    set_key(cfg, key, value.is_string() ? value.get<std::string>() : value.dump());
  }
  cfg.validate();
  return cfg;
}

}  // namespace kecr
