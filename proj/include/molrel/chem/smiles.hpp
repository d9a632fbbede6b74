#pragma once

#include <string_view>

#include "molrel/chem/molecule.hpp"

namespace molrel::chem {

/// Parses a SMILES string into a heavy-atom graph.
///
/// Supported: the organic subset (B C N O P S F Cl Br I) and its aromatic
/// lowercase forms, bracket atoms (isotope, chirality and atom class are read
/// and dropped; H count and charge kept), bonds - = # : / \, ring closures
/// (digits and %nn), branches, and '.'-separated fragments. Explicit [H] atoms
/// bonded to a single heavy atom are folded into that atom's H count.
///
/// Throws ParseError carrying the byte offset of the offending token.
MoleculeGraph parse_smiles(std::string_view smiles);

/// True when `symbol` (capitalised, e.g. "Cl") is a known element.
bool is_element(std::string_view symbol);

}  // namespace molrel::chem
