#include "molrel/chem/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "molrel/chem/canonical.hpp"
#include "molrel/core/error.hpp"
#include "molrel/core/random.hpp"

namespace molrel::chem {

ScaffoldSplit scaffold_split(const std::vector<std::string>& keys, std::array<double, 3> ratios, std::uint64_t seed) {
  const std::size_t n = keys.size();
  if (n == 0) throw DataError("scaffold_split: empty dataset");
  for (double r : ratios)
    if (!(r >= 0.0)) throw ConfigError("scaffold_split: ratios must be non-negative");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw ConfigError("scaffold_split: ratios must sum to 1");

  ScaffoldSplit split;
  split.keys = keys;
  split.seed = seed;
  split.quotas[0] = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
  split.quotas[1] = std::min(n - split.quotas[0], static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));
  split.quotas[2] = n - split.quotas[0] - split.quotas[1];

  std::map<std::string, std::vector<std::size_t>> by_key;
  for (std::size_t i = 0; i < n; ++i) by_key[keys[i]].push_back(i);
  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> groups;
  for (const auto& entry : by_key) groups.push_back(&entry);
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto* a, const auto* b) { return a->second.size() > b->second.size(); });

  Rng rng = make_rng(seed, Stream::kSplit);
  for (auto run = groups.begin(); run != groups.end();) {
    const auto end = std::find_if(run, groups.end(), [&](const auto* g) { return g->second.size() != (*run)->second.size(); });
    std::shuffle(run, end, rng);
    run = end;
  }

  if (groups.size() == 1) split.warnings.push_back("all molecules share one scaffold; valid and test are empty");
  std::array<std::vector<std::size_t>*, 3> sets{&split.train, &split.valid, &split.test};
  static constexpr const char* kNames[] = {"train", "valid", "test"};
  for (const auto* g : groups) {
    std::size_t s = 0;
    while (s < 2 && sets[s]->size() >= split.quotas[s]) ++s;
    sets[s]->insert(sets[s]->end(), g->second.begin(), g->second.end());
    if (sets[s]->size() > split.quotas[s] && sets[s]->size() - g->second.size() < split.quotas[s]) {
      split.warnings.push_back(std::string(kNames[s]) + " exceeds its quota of " + std::to_string(split.quotas[s]) +
                               " (scaffold group of " + std::to_string(g->second.size()) + ")");
    }
  }
  for (auto* set : sets) std::sort(set->begin(), set->end());
  return split;
}

std::vector<std::string> scaffold_keys(const LabeledDataset& dataset) {
  std::vector<std::string> keys;
  keys.reserve(dataset.size());
  for (const Record& r : dataset.records) keys.push_back(murcko_scaffold(r.graph));
  return keys;
}

ScaffoldSplit scaffold_split(const LabeledDataset& dataset, std::array<double, 3> ratios, std::uint64_t seed) {
  return scaffold_split(scaffold_keys(dataset), ratios, seed);
}

nlohmann::json split_manifest(const ScaffoldSplit& split) {
  nlohmann::json j;
  j["seed"] = split.seed;
  j["quotas"] = {{"train", split.quotas[0]}, {"valid", split.quotas[1]}, {"test", split.quotas[2]}};
  j["train"] = split.train;
  j["valid"] = split.valid;
  j["test"] = split.test;
  j["scaffold_keys"] = split.keys;
  j["warnings"] = split.warnings;
  return j;
}

ScaffoldSplit split_from_manifest(const nlohmann::json& manifest) {
  try {
    ScaffoldSplit split;
    split.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& q = manifest.at("quotas");
    split.quotas = {q.at("train").get<std::size_t>(), q.at("valid").get<std::size_t>(), q.at("test").get<std::size_t>()};
    split.train = manifest.at("train").get<std::vector<std::size_t>>();
    split.valid = manifest.at("valid").get<std::vector<std::size_t>>();
    split.test = manifest.at("test").get<std::vector<std::size_t>>();
    split.keys = manifest.at("scaffold_keys").get<std::vector<std::string>>();
    if (manifest.contains("warnings")) split.warnings = manifest.at("warnings").get<std::vector<std::string>>();
    const std::size_t n = split.keys.size();
    std::vector<bool> seen(n, false);
    for (const auto* set : {&split.train, &split.valid, &split.test}) {
      for (std::size_t i : *set) {
        if (i >= n || seen[i]) throw DataError("split manifest: index " + std::to_string(i) + " out of range or repeated");
        seen[i] = true;
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw DataError("split manifest does not cover every index");
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("split manifest: ") + e.what());
  }
}

}  // namespace molrel::chem
