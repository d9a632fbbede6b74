#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "molrel/chem/molecule.hpp"

namespace molrel::chem {

// Node feature layout (40 columns):
//   [0, 28)  element one-hot; the last slot collects every element outside the vocabulary
//   [28, 34) heavy-atom degree 0..5 (higher degrees land in 5)
//   [34, 39) formal charge -2..+2 (clamped)
//   39       aromatic flag
// Edge features (4 columns): bond order one-hot single, double, triple, aromatic.
inline constexpr std::size_t kElementSlots = 28;
inline constexpr std::size_t kDegreeOffset = kElementSlots;
inline constexpr std::size_t kDegreeSlots = 6;
inline constexpr std::size_t kChargeOffset = kDegreeOffset + kDegreeSlots;
inline constexpr std::size_t kChargeSlots = 5;
inline constexpr std::size_t kAromaticColumn = kChargeOffset + kChargeSlots;
inline constexpr std::size_t kNodeFeatureDim = kAromaticColumn + 1;
inline constexpr std::size_t kEdgeFeatureDim = 4;

/// Element vocabulary; index kElementSlots - 1 is the "other" slot.
const std::array<std::string_view, kElementSlots - 1>& element_vocabulary();
std::size_t element_slot(std::string_view element);

struct FeaturizedGraph {
  std::size_t atom_count = 0;
  std::vector<double> node_features;  // atom_count x kNodeFeatureDim, row-major
  std::vector<double> edge_features;  // 2 * bonds x kEdgeFeatureDim
  // Directed edges: bond k contributes (begin -> end) at 2k and (end -> begin) at 2k + 1.
  std::vector<std::size_t> edge_source;
  std::vector<std::size_t> edge_target;

  std::size_t edge_count() const noexcept { return edge_source.size(); }
};

FeaturizedGraph featurize(const MoleculeGraph& molecule);

}  // namespace molrel::chem
