#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "molrel/chem/dataset.hpp"

namespace molrel::chem {

struct ScaffoldSplit {
  std::vector<std::size_t> train;  // ascending indices
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
  std::vector<std::string> keys;  // scaffold key per dataset index
  std::array<std::size_t, 3> quotas{};
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Groups indices by scaffold key, orders groups by (size desc, key asc) with a
/// seeded shuffle inside each run of equal size, and gives each group to the
/// first of train, valid, test whose fill is below its quota. Quotas are
/// round(ratio * N) for train and valid; test takes the remainder.
ScaffoldSplit scaffold_split(const std::vector<std::string>& keys, std::array<double, 3> ratios, std::uint64_t seed);
ScaffoldSplit scaffold_split(const LabeledDataset& dataset, std::array<double, 3> ratios, std::uint64_t seed);

std::vector<std::string> scaffold_keys(const LabeledDataset& dataset);

nlohmann::json split_manifest(const ScaffoldSplit& split);
ScaffoldSplit split_from_manifest(const nlohmann::json& manifest);

}  // namespace molrel::chem
