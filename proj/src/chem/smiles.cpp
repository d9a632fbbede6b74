#include "molrel/chem/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molrel/core/error.hpp"

namespace molrel::chem {
namespace {

constexpr std::array<std::string_view, 118> kElements{
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar",
    "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe",
    "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Bond written before an atom or ring digit; `explicit_order` is empty when the
// bond is implicit (single, or aromatic between two aromatic atoms).
struct PendingBond {
  std::optional<BondOrder> explicit_order;
  std::size_t offset = 0;
  bool present = false;
};

struct RingOpening {
  std::size_t atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  MoleculeGraph run() {
    if (s_.empty()) throw ParseError("empty SMILES", 0);
    while (pos_ < s_.size()) step();
    if (pending_.present) throw ParseError("dangling bond", pending_.offset);
    if (!branches_.empty()) throw ParseError("unbalanced parentheses: '(' never closed", branches_.back().second);
    if (!rings_.empty()) {
      const auto& [digit, open] = *rings_.begin();
      throw ParseError("unclosed ring bond " + std::to_string(digit), open.offset);
    }
    if (graph_.atom_count() == 0) throw ParseError("no atoms", 0);
    return fold_explicit_hydrogens();
  }

 private:
  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        if (!prev_) throw ParseError("branch opened before any atom", pos_);
        if (pending_.present) throw ParseError("bond before '('", pending_.offset);
        branches_.emplace_back(*prev_, pos_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) throw ParseError("unbalanced parentheses: unexpected ')'", pos_);
        if (pending_.present) throw ParseError("dangling bond before ')'", pending_.offset);
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
        return;
      case '-': set_bond(BondOrder::kSingle); return;
      case '=': set_bond(BondOrder::kDouble); return;
      case '#': set_bond(BondOrder::kTriple); return;
      case ':': set_bond(BondOrder::kAromatic); return;
      case '/':
      case '\\': set_bond(BondOrder::kSingle); return;
      case '.':
        if (pending_.present) throw ParseError("bond before '.'", pending_.offset);
        if (!branches_.empty()) throw ParseError("'.' inside a branch", pos_);
        prev_.reset();
        ++pos_;
        return;
      case '%': {
        if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
          throw ParseError("'%' must be followed by two digits", pos_);
        }
        const int digit = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
        ring_closure(digit, pos_);
        pos_ += 3;
        return;
      }
      case '[': bracket_atom(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_closure(c - '0', pos_);
      ++pos_;
      return;
    }
    organic_atom();
  }

  void set_bond(BondOrder order) {
    if (pending_.present) throw ParseError("two consecutive bond symbols", pos_);
    if (!prev_) throw ParseError("bond before any atom", pos_);
    pending_ = PendingBond{order, pos_, true};
    ++pos_;
  }

  void organic_atom() {
    const std::size_t start = pos_;
    const char c = s_[pos_];
    Atom atom;
    if (c == 'C' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'l') {
      atom.element = "Cl";
      pos_ += 2;
    } else if (c == 'B' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'r') {
      atom.element = "Br";
      pos_ += 2;
    } else {
      switch (c) {
        case 'B': case 'C': case 'N': case 'O': case 'P': case 'S': case 'F': case 'I':
          atom.element = std::string(1, c);
          break;
        case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
          atom.element = std::string(1, static_cast<char>(std::toupper(c)));
          atom.aromatic = true;
          break;
        default:
          throw ParseError(std::string("unknown element token '") + c + "'", start);
      }
      ++pos_;
    }
    attach(graph_.add_atom(std::move(atom)), start);
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    const std::size_t close = s_.find(']', pos_);
    if (close == std::string_view::npos) throw ParseError("unterminated bracket atom", start);
    std::size_t i = pos_ + 1;
    auto at = [&](std::size_t k) { return k < close ? s_[k] : '\0'; };
    while (std::isdigit(static_cast<unsigned char>(at(i)))) ++i;  // isotope

    Atom atom;
    const char c0 = at(i);
    if (std::islower(static_cast<unsigned char>(c0))) {
      // Aromatic: two-letter forms first.
      const std::string two{c0, at(i + 1)};
      if (two == "se" || two == "as" || two == "te") {
        atom.element = std::string{static_cast<char>(std::toupper(c0)), at(i + 1)};
        i += 2;
      } else if (c0 == 'b' || c0 == 'c' || c0 == 'n' || c0 == 'o' || c0 == 'p' || c0 == 's') {
        atom.element = std::string(1, static_cast<char>(std::toupper(c0)));
        ++i;
      } else {
        throw ParseError("unknown aromatic element in bracket atom", i);
      }
      atom.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(c0))) {
      const std::string two{c0, at(i + 1)};
      if (std::islower(static_cast<unsigned char>(at(i + 1))) && is_element(two)) {
        atom.element = two;
        i += 2;
      } else if (is_element(std::string(1, c0))) {
        atom.element = std::string(1, c0);
        ++i;
      } else {
        throw ParseError("unknown element in bracket atom", i);
      }
    } else {
      throw ParseError("bracket atom without element symbol", i);
    }

    // Chirality: '@', '@@', or '@' + class letters and digits (TH1, SP2, ...).
    if (at(i) == '@') {
      ++i;
      if (at(i) == '@') ++i;
      const std::string cls{at(i), at(i + 1)};
      if (cls == "TH" || cls == "AL" || cls == "SP" || cls == "TB" || cls == "OH") {
        i += 2;
        while (std::isdigit(static_cast<unsigned char>(at(i)))) ++i;
      }
    }
    if (at(i) == 'H') {
      ++i;
      atom.hydrogens = 1;
      if (std::isdigit(static_cast<unsigned char>(at(i)))) {
        atom.hydrogens = 0;
        while (std::isdigit(static_cast<unsigned char>(at(i)))) atom.hydrogens = atom.hydrogens * 10 + (s_[i++] - '0');
      }
    }
    if (at(i) == '+' || at(i) == '-') {
      const char sign = at(i);
      const int unit = sign == '+' ? 1 : -1;
      ++i;
      if (std::isdigit(static_cast<unsigned char>(at(i)))) {
        int mag = 0;
        while (std::isdigit(static_cast<unsigned char>(at(i)))) mag = mag * 10 + (s_[i++] - '0');
        atom.charge = unit * mag;
      } else {
        atom.charge = unit;
        while (at(i) == sign) {
          atom.charge += unit;
          ++i;
        }
      }
    }
    if (at(i) == ':') {  // atom class
      ++i;
      while (std::isdigit(static_cast<unsigned char>(at(i)))) ++i;
    }
    if (i != close) throw ParseError("unexpected character in bracket atom", i);
    pos_ = close + 1;
    attach(graph_.add_atom(std::move(atom)), start);
  }

  BondOrder implicit_order(std::size_t a, std::size_t b) const {
    return graph_.atom(a).aromatic && graph_.atom(b).aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
  }

  void add_bond_checked(std::size_t a, std::size_t b, BondOrder order, std::size_t offset) {
    if (a == b) throw ParseError("ring bond closes on its own atom", offset);
    if (graph_.find_bond(a, b) != graph_.bond_count()) throw ParseError("duplicate bond", offset);
    graph_.add_bond(a, b, order);
  }

  void attach(std::size_t atom, std::size_t offset) {
    if (prev_) {
      const BondOrder order = pending_.explicit_order.value_or(implicit_order(*prev_, atom));
      add_bond_checked(*prev_, atom, order, offset);
    } else if (pending_.present) {
      throw ParseError("bond without a preceding atom", pending_.offset);
    }
    pending_ = PendingBond{};
    prev_ = atom;
  }

  void ring_closure(int digit, std::size_t offset) {
    if (!prev_) throw ParseError("ring bond before any atom", offset);
    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      rings_.emplace(digit, RingOpening{*prev_, pending_.explicit_order, offset});
    } else {
      const RingOpening open = it->second;
      rings_.erase(it);
      std::optional<BondOrder> order = pending_.explicit_order;
      if (open.order && order && *open.order != *order) throw ParseError("conflicting ring bond orders", offset);
      if (!order) order = open.order;
      add_bond_checked(open.atom, *prev_, order.value_or(implicit_order(open.atom, *prev_)), offset);
    }
    pending_ = PendingBond{};
  }

  MoleculeGraph fold_explicit_hydrogens() {
    std::vector<bool> keep(graph_.atom_count(), true);
    bool any = false;
    for (std::size_t i = 0; i < graph_.atom_count(); ++i) {
      if (graph_.atom(i).element != "H" || graph_.degree(i) != 1) continue;
      const std::size_t heavy = graph_.neighbors(i)[0].atom;
      if (graph_.atom(heavy).element == "H") continue;
      keep[i] = false;
      graph_.atom(heavy).hydrogens += 1;
      any = true;
    }
    if (!any) return std::move(graph_);
    return graph_.induced(keep);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MoleculeGraph graph_;
  std::optional<std::size_t> prev_;
  PendingBond pending_;
  std::vector<std::pair<std::size_t, std::size_t>> branches_;  // (atom, offset of '(')
  std::map<int, RingOpening> rings_;
};

}  // namespace

bool is_element(std::string_view symbol) {
  return std::find(kElements.begin(), kElements.end(), symbol) != kElements.end();
}

MoleculeGraph parse_smiles(std::string_view smiles) { return Parser(smiles).run(); }

}  // namespace molrel::chem
