#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "molrel/bayes/schedule.hpp"
#include "molrel/chem/dataset.hpp"
#include "molrel/gnn/config.hpp"

namespace molrel::cli {

struct DatasetConfig {
  std::filesystem::path path;
  std::string preset;  // bace, bbbp, hiv, tox21; fills the columns left empty
  std::string smiles_column;
  std::vector<std::string> label_columns;

  chem::DatasetSpec spec() const;
};

struct ScreenConfig {
  std::filesystem::path library;  // empty: each seed's held-out test split
  std::string smiles_column = "smiles";
  double low = 0.05;
  double high = 0.95;
};

struct RunConfig {
  DatasetConfig dataset;
  gnn::ModelConfig model;
  std::vector<bayes::Mode> modes{bayes::Mode::kNone};
  bayes::Schedule schedule;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  std::vector<std::uint64_t> seeds{0};
  std::size_t members = 10;             // independent posteriors per (seed, mode); ensemble mode uses its own size
  std::optional<std::size_t> samples;   // marginalization draws; per-mode default when empty
  std::size_t workers = 0;              // 0: available cores
  std::filesystem::path out = "runs";
  ScreenConfig screen;

  /// Throws ConfigError on an empty seed list, bad ratios, invalid model or
  /// schedule, or (when `need_dataset`) a dataset path that does not exist.
  void validate(bool need_dataset = true) const;
};

/// Full document with every default filled in.
nlohmann::json default_config_json();

/// Sets the value at a dotted path ("schedule.epochs=5"). The value is parsed
/// as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Recursive merge of `patch` into `doc`; keys absent from `doc` are a ConfigError.
void merge_config(nlohmann::json& doc, const nlohmann::json& patch, const std::string& where = "");

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);

/// "0,3,5", "0-7" or a mix; throws ConfigError on malformed input.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
/// Comma-separated mode names.
std::vector<bayes::Mode> parse_mode_list(std::string_view text);

/// FNV digest (hex) of everything that determines trained posteriors: dataset
/// bytes and columns, model, schedule, split ratios and member count. Seeds,
/// modes, sample counts, worker count, output and screening settings are excluded.
std::string config_digest(const RunConfig& config);

}  // namespace molrel::cli
