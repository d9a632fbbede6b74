#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "molrel/chem/molecule.hpp"

namespace molrel::chem {

inline constexpr std::int8_t kMissingLabel = -1;

struct Record {
  std::string smiles;
  MoleculeGraph graph;
  std::vector<std::int8_t> labels;  // 0, 1 or kMissingLabel; one per task
};

struct LabeledDataset {
  std::string name;
  std::vector<std::string> tasks;
  std::vector<Record> records;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t task_count() const noexcept { return tasks.size(); }
};

struct DroppedRow {
  std::size_t line;  // 1-based CSV line
  std::string reason;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t dropped_unparseable = 0;
  std::size_t dropped_unlabeled = 0;
  std::vector<std::size_t> positives;  // per task
  std::vector<std::size_t> negatives;
  std::vector<std::size_t> missing;
  std::vector<DroppedRow> dropped;
};

struct DatasetSpec {
  std::string name;
  std::string smiles_column;
  std::vector<std::string> label_columns;
};

/// Column presets for "bace", "bbbp", "hiv" and "tox21"; throws ConfigError otherwise.
DatasetSpec dataset_preset(std::string_view name);

/// Label cells "0", "1", "0.0", "1.0" (surrounding blanks ignored); empty means
/// missing. Any other label text is a DataError. Rows whose SMILES fails to
/// parse, or whose labels are all missing, are dropped and counted.
LabeledDataset load_dataset(const std::filesystem::path& path, const DatasetSpec& spec, LoadReport* report = nullptr);

/// Same as load_dataset but from CSV text already in memory.
LabeledDataset parse_dataset(std::string_view csv_text, const DatasetSpec& spec, LoadReport* report = nullptr);

}  // namespace molrel::chem
