#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace molrel::chem {

enum class BondOrder : std::uint8_t { kSingle = 0, kDouble = 1, kTriple = 2, kAromatic = 3 };

struct Atom {
  std::string element;  // "C", "Cl", "Se", ...; aromaticity is carried by the flag
  int charge = 0;
  bool aromatic = false;
  int hydrogens = 0;  // explicit count from a bracket atom; never featurized

  bool operator==(const Atom&) const = default;
};

struct Bond {
  std::size_t begin = 0;
  std::size_t end = 0;
  BondOrder order = BondOrder::kSingle;
};

struct Neighbor {
  std::size_t atom;
  std::size_t bond;
};

/// Undirected heavy-atom graph. Disconnected fragments (salts, mixtures) stay
/// in one graph as separate components.
class MoleculeGraph {
 public:
  std::size_t add_atom(Atom atom);
  /// Rejects self-loops, out-of-range indices and duplicate pairs.
  std::size_t add_bond(std::size_t a, std::size_t b, BondOrder order);

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t bond_count() const noexcept { return bonds_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  const Atom& atom(std::size_t i) const { return atoms_.at(i); }
  Atom& atom(std::size_t i) { return atoms_.at(i); }
  const Bond& bond(std::size_t i) const { return bonds_.at(i); }
  std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_.at(i); }
  std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }

  /// Bond index joining a and b, or bond_count() when not bonded.
  std::size_t find_bond(std::size_t a, std::size_t b) const;

  /// Subgraph on the atoms with keep[i] set, renumbered in original order.
  MoleculeGraph induced(const std::vector<bool>& keep) const;

  /// Connected-component label per atom, numbered by first appearance.
  std::vector<std::size_t> components(std::size_t* count = nullptr) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

char bond_symbol(BondOrder order);

}  // namespace molrel::chem
