#include "molrel/chem/molecule.hpp"

#include <cstdint>
#include <string>

#include "molrel/core/error.hpp"

namespace molrel::chem {

std::size_t MoleculeGraph::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return atoms_.size() - 1;
}

std::size_t MoleculeGraph::add_bond(std::size_t a, std::size_t b, BondOrder order) {
  if (a >= atoms_.size() || b >= atoms_.size()) {
    throw Error("bond (" + std::to_string(a) + ", " + std::to_string(b) + ") references a missing atom");
  }
  if (a == b) throw Error("self-bond on atom " + std::to_string(a));
  if (find_bond(a, b) != bonds_.size()) {
    throw Error("duplicate bond between atoms " + std::to_string(a) + " and " + std::to_string(b));
  }
  bonds_.push_back(Bond{a, b, order});
  const std::size_t id = bonds_.size() - 1;
  adjacency_[a].push_back(Neighbor{b, id});
  adjacency_[b].push_back(Neighbor{a, id});
  return id;
}

std::size_t MoleculeGraph::find_bond(std::size_t a, std::size_t b) const {
  if (a < adjacency_.size()) {
    for (const Neighbor& n : adjacency_[a])
      if (n.atom == b) return n.bond;
  }
  return bonds_.size();
}

MoleculeGraph MoleculeGraph::induced(const std::vector<bool>& keep) const {
  if (keep.size() != atoms_.size()) throw Error("induced: mask length does not match atom count");
  MoleculeGraph out;
  std::vector<std::size_t> remap(atoms_.size(), SIZE_MAX);
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (keep[i]) remap[i] = out.add_atom(atoms_[i]);
  for (const Bond& b : bonds_)
    if (keep[b.begin] && keep[b.end]) out.add_bond(remap[b.begin], remap[b.end], b.order);
  return out;
}

std::vector<std::size_t> MoleculeGraph::components(std::size_t* count) const {
  std::vector<std::size_t> label(atoms_.size(), SIZE_MAX);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < atoms_.size(); ++start) {
    if (label[start] != SIZE_MAX) continue;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const Neighbor& n : adjacency_[u]) {
        if (label[n.atom] == SIZE_MAX) {
          label[n.atom] = next;
          stack.push_back(n.atom);
        }
      }
    }
    ++next;
  }
  if (count != nullptr) *count = next;
  return label;
}

char bond_symbol(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return '-';
    case BondOrder::kDouble: return '=';
    case BondOrder::kTriple: return '#';
    case BondOrder::kAromatic: return ':';
  }
  return '?';
}

}  // namespace molrel::chem
