#include "molrel/chem/dataset.hpp"

#include <algorithm>
#include <cctype>

#include "molrel/chem/smiles.hpp"
#include "molrel/core/csv.hpp"
#include "molrel/core/error.hpp"

namespace molrel::chem {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::int8_t parse_label(std::string_view cell, std::size_t line, std::string_view column) {
  const std::string_view t = trim(cell);
  if (t.empty()) return kMissingLabel;
  if (t == "0" || t == "0.0") return 0;
  if (t == "1" || t == "1.0") return 1;
  throw DataError("CSV line " + std::to_string(line) + ": label '" + std::string(t) + "' in column '" +
                  std::string(column) + "' is not 0, 1 or empty");
}

LabeledDataset build(const CsvTable& table, const DatasetSpec& spec, LoadReport* report) {
  if (spec.label_columns.empty()) throw ConfigError("dataset '" + spec.name + "' has no label columns");
  const std::size_t smiles_col = table.column(spec.smiles_column);
  std::vector<std::size_t> label_cols;
  for (const auto& name : spec.label_columns) label_cols.push_back(table.column(name));

  const std::size_t tasks = label_cols.size();
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = LoadReport{};
  rep.positives.assign(tasks, 0);
  rep.negatives.assign(tasks, 0);
  rep.missing.assign(tasks, 0);

  LabeledDataset ds;
  ds.name = spec.name;
  ds.tasks = spec.label_columns;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.row_lines[r];
    ++rep.rows_read;
    Record rec;
    rec.smiles = std::string(trim(row[smiles_col]));
    for (std::size_t t = 0; t < tasks; ++t) rec.labels.push_back(parse_label(row[label_cols[t]], line, spec.label_columns[t]));
    if (std::all_of(rec.labels.begin(), rec.labels.end(), [](std::int8_t v) { return v == kMissingLabel; })) {
      ++rep.dropped_unlabeled;
      rep.dropped.push_back({line, "no labels"});
      continue;
    }
    try {
      rec.graph = parse_smiles(rec.smiles);
    } catch (const ParseError& e) {
      ++rep.dropped_unparseable;
      rep.dropped.push_back({line, e.what()});
      continue;
    }
    for (std::size_t t = 0; t < tasks; ++t) {
      if (rec.labels[t] == 1) ++rep.positives[t];
      else if (rec.labels[t] == 0) ++rep.negatives[t];
      else ++rep.missing[t];
    }
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.empty()) throw DataError("dataset '" + spec.name + "' has no usable rows");
  return ds;
}

}  // namespace

DatasetSpec dataset_preset(std::string_view name) {
  if (name == "bace") return {"bace", "mol", {"Class"}};
  if (name == "bbbp") return {"bbbp", "smiles", {"p_np"}};
  if (name == "hiv") return {"hiv", "smiles", {"HIV_active"}};
  if (name == "tox21") {
    return {"tox21",
            "smiles",
            {"NR-AR", "NR-AR-LBD", "NR-AhR", "NR-Aromatase", "NR-ER", "NR-ER-LBD", "NR-PPAR-gamma", "SR-ARE",
             "SR-ATAD5", "SR-HSE", "SR-MMP", "SR-p53"}};
  }
  throw ConfigError("unknown dataset '" + std::string(name) + "' (expected bace, bbbp, hiv or tox21)");
}

LabeledDataset load_dataset(const std::filesystem::path& path, const DatasetSpec& spec, LoadReport* report) {
  return build(read_csv(path), spec, report);
}

LabeledDataset parse_dataset(std::string_view csv_text, const DatasetSpec& spec, LoadReport* report) {
  return build(parse_csv(csv_text), spec, report);
}

}  // namespace molrel::chem
