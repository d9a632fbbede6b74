#include "molrel/chem/featurize.hpp"

#include <algorithm>

namespace molrel::chem {

const std::array<std::string_view, kElementSlots - 1>& element_vocabulary() {
  static constexpr std::array<std::string_view, kElementSlots - 1> kVocab{
      "C",  "N",  "O", "S", "F", "Si", "P",  "Cl", "Br", "Mg", "Na", "Ca", "Fe", "As",
      "Al", "I",  "B", "V", "K", "Tl", "Yb", "Sb", "Sn", "Ag", "Pd", "Co", "Se"};
  return kVocab;
}

std::size_t element_slot(std::string_view element) {
  const auto& vocab = element_vocabulary();
  const auto it = std::find(vocab.begin(), vocab.end(), element);
  return it == vocab.end() ? kElementSlots - 1 : static_cast<std::size_t>(it - vocab.begin());
}

FeaturizedGraph featurize(const MoleculeGraph& molecule) {
  FeaturizedGraph out;
  out.atom_count = molecule.atom_count();
  out.node_features.assign(out.atom_count * kNodeFeatureDim, 0.0);
  for (std::size_t i = 0; i < out.atom_count; ++i) {
    const Atom& atom = molecule.atom(i);
    double* row = out.node_features.data() + i * kNodeFeatureDim;
    row[element_slot(atom.element)] = 1.0;
    row[kDegreeOffset + std::min<std::size_t>(molecule.degree(i), kDegreeSlots - 1)] = 1.0;
    row[kChargeOffset + static_cast<std::size_t>(std::clamp(atom.charge, -2, 2) + 2)] = 1.0;
    row[kAromaticColumn] = atom.aromatic ? 1.0 : 0.0;
  }
  const std::size_t edges = 2 * molecule.bond_count();
  out.edge_features.assign(edges * kEdgeFeatureDim, 0.0);
  out.edge_source.reserve(edges);
  out.edge_target.reserve(edges);
  for (std::size_t k = 0; k < molecule.bond_count(); ++k) {
    const Bond& b = molecule.bond(k);
    out.edge_source.push_back(b.begin);
    out.edge_target.push_back(b.end);
    out.edge_source.push_back(b.end);
    out.edge_target.push_back(b.begin);
    const auto slot = static_cast<std::size_t>(b.order);
    out.edge_features[(2 * k) * kEdgeFeatureDim + slot] = 1.0;
    out.edge_features[(2 * k + 1) * kEdgeFeatureDim + slot] = 1.0;
  }
  return out;
}

}  // namespace molrel::chem
