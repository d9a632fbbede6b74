#include "molrel/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "molrel/core/digest.hpp"
#include "molrel/core/error.hpp"

namespace molrel::cli {
namespace {

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw ConfigError("invalid seed '" + std::string(text) + "'");
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

chem::DatasetSpec DatasetConfig::spec() const {
  chem::DatasetSpec s;
  if (!preset.empty()) s = chem::dataset_preset(preset);
  if (!smiles_column.empty()) s.smiles_column = smiles_column;
  if (!label_columns.empty()) s.label_columns = label_columns;
  if (s.name.empty()) s.name = path.stem().string();
  if (s.smiles_column.empty()) throw ConfigError("dataset: set a preset or smiles_column");
  if (s.label_columns.empty()) throw ConfigError("dataset: set a preset or label_columns");
  return s;
}

void RunConfig::validate(bool need_dataset) const {
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (modes.empty()) throw ConfigError("mode list is empty");
  if (members < 1) throw ConfigError("members must be >= 1");
  if (samples && *samples < 1) throw ConfigError("samples must be >= 1");
  double total = 0.0;
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  model.validate();
  for (bayes::Mode m : modes) schedule.validate(m);
  if (!(screen.low >= 0.0 && screen.low <= screen.high && screen.high <= 1.0))
    throw ConfigError("screen thresholds must satisfy 0 <= low <= high <= 1");
  if (need_dataset) {
    if (dataset.path.empty()) throw ConfigError("dataset.path is not set");
    if (!std::filesystem::is_regular_file(dataset.path))
      throw ConfigError("dataset file " + dataset.path.string() + " does not exist");
    (void)dataset.spec();
  }
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json modes = nlohmann::json::array();
  for (auto m : c.modes) modes.push_back(bayes::mode_name(m));
  return {{"dataset",
           {{"path", c.dataset.path.string()},
            {"preset", c.dataset.preset},
            {"smiles_column", c.dataset.smiles_column},
            {"label_columns", c.dataset.label_columns}}},
          {"model", c.model},
          {"modes", modes},
          {"schedule", c.schedule},
          {"split", {{"ratios", c.split_ratios}}},
          {"seeds", c.seeds},
          {"members", c.members},
          {"samples", c.samples ? nlohmann::json(*c.samples) : nlohmann::json()},
          {"workers", c.workers},
          {"out", c.out.string()},
          {"screen",
           {{"library", c.screen.library.string()},
            {"smiles_column", c.screen.smiles_column},
            {"low", c.screen.low},
            {"high", c.screen.high}}}};
}

nlohmann::json default_config_json() { return config_to_json(RunConfig{}); }

void merge_config(nlohmann::json& doc, const nlohmann::json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("config" + (where.empty() ? "" : " at '" + where + "'") + " must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!doc.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    nlohmann::json& target = doc[key];
    if (target.is_object() && value.is_object() && key != "model" && key != "schedule") {
      merge_config(target, value, path);
    } else if (target.is_object() && value.is_object()) {
      for (const auto& [k, v] : value.items()) target[k] = v;  // validated when parsed
    } else {
      target = value;
    }
  }
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  // Build a nested patch so the key is checked like a config file entry.
  nlohmann::json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) parts.push_back(rest.substr(0, pos));
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (it->empty()) throw ConfigError("--set: empty path component in '" + key + "'");
    patch = nlohmann::json{{*it, patch}};
  }
  // model.* and schedule.* keys are validated by their parsers; check them here for a clear message.
  if (parts.size() == 2 && (parts[0] == "model" || parts[0] == "schedule") && !doc[parts[0]].contains(parts[1]))
    throw ConfigError("unknown config key '" + key + "'");
  merge_config(doc, patch);
}

RunConfig config_from_json(const nlohmann::json& doc) {
  RunConfig c;
  try {
    const auto& d = doc.at("dataset");
    c.dataset.path = d.at("path").get<std::string>();
    c.dataset.preset = d.at("preset").get<std::string>();
    c.dataset.smiles_column = d.at("smiles_column").get<std::string>();
    c.dataset.label_columns = d.at("label_columns").get<std::vector<std::string>>();
    const nlohmann::json& model = doc.at("model");
    const nlohmann::json known = gnn::ModelConfig{};
    for (const auto& [k, v] : model.items())
      if (!known.contains(k)) throw ConfigError("unknown config key 'model." + k + "'");
    c.model = model.get<gnn::ModelConfig>();
    c.modes.clear();
    const nlohmann::json& modes = doc.at("modes");
    if (modes.is_string()) c.modes = parse_mode_list(modes.get<std::string>());
    else
      for (const auto& m : modes) c.modes.push_back(bayes::mode_from_name(m.get<std::string>()));
    c.schedule = doc.at("schedule").get<bayes::Schedule>();
    c.split_ratios = doc.at("split").at("ratios").get<std::array<double, 3>>();
    const nlohmann::json& seeds = doc.at("seeds");
    c.seeds = seeds.is_string() ? parse_seed_list(seeds.get<std::string>()) : seeds.get<std::vector<std::uint64_t>>();
    c.members = doc.at("members").get<std::size_t>();
    if (!doc.at("samples").is_null()) c.samples = doc.at("samples").get<std::size_t>();
    c.workers = doc.at("workers").get<std::size_t>();
    c.out = doc.at("out").get<std::string>();
    const auto& s = doc.at("screen");
    c.screen.library = s.at("library").get<std::string>();
    c.screen.smiles_column = s.at("smiles_column").get<std::string>();
    c.screen.low = s.at("low").get<double>();
    c.screen.high = s.at("high").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::string rest(text);
  std::stringstream ss(rest);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const std::uint64_t a = parse_u64(trim(std::string_view(item).substr(0, dash)));
      const std::uint64_t b = parse_u64(trim(std::string_view(item).substr(dash + 1)));
      if (b < a) throw ConfigError("seed range '" + item + "' is descending");
      for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_u64(item));
    }
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

std::vector<bayes::Mode> parse_mode_list(std::string_view text) {
  std::vector<bayes::Mode> modes;
  std::stringstream ss{std::string(text)};
  for (std::string item; std::getline(ss, item, ',');) modes.push_back(bayes::mode_from_name(trim(item)));
  if (modes.empty()) throw ConfigError("mode list is empty");
  return modes;
}

std::string config_digest(const RunConfig& config) {
  nlohmann::json j = config_to_json(config);
  for (const char* k : {"seeds", "modes", "samples", "workers", "out", "screen"}) j.erase(k);
  j["dataset"].erase("path");
  j["dataset"]["bytes"] = to_hex(fnv1a64(read_file(config.dataset.path)));
  return to_hex(fnv1a64(j.dump()));
}

}  // namespace molrel::cli
