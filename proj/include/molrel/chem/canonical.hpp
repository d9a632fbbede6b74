#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "molrel/chem/molecule.hpp"

namespace molrel::chem {

/// Isomorphism-invariant SMILES-like string. Each connected component is
/// serialized separately and the sorted component strings are joined by '.'.
/// The result parses back to a graph with the same canonical form. Hydrogen
/// counts are not part of the form.
std::string canonical_form(const MoleculeGraph& molecule);

/// Serializes one connected component using a total atom ranking: DFS from the
/// lowest-ranked atom, neighbors in rank order. Exposed for testing.
std::string write_smiles(const MoleculeGraph& molecule, const std::vector<std::size_t>& rank);

/// Bemis-Murcko framework: atoms of degree <= 1 are stripped until none
/// remain, leaving ring systems and their linkers.
MoleculeGraph murcko_framework(const MoleculeGraph& molecule);

/// canonical_form of the framework; "" for acyclic molecules.
std::string murcko_scaffold(const MoleculeGraph& molecule);

}  // namespace molrel::chem
