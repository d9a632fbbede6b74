#include "molrel/chem/canonical.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>

#include "molrel/core/error.hpp"

namespace molrel::chem {
namespace {

using Coloring = std::vector<std::size_t>;

// Replaces each key by its dense rank among all keys.
template <typename Key>
Coloring dense_rank(const std::vector<Key>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  Coloring color(keys.size());
  std::size_t next = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && keys[order[k - 1]] < keys[order[k]]) ++next;
    color[order[k]] = next;
  }
  return color;
}

std::size_t distinct(const Coloring& color) {
  return color.empty() ? 0 : *std::max_element(color.begin(), color.end()) + 1;
}

Coloring initial_coloring(const MoleculeGraph& g) {
  using Key = std::tuple<std::string, int, bool, std::size_t, std::vector<int>>;
  std::vector<Key> keys;
  keys.reserve(g.atom_count());
  for (std::size_t i = 0; i < g.atom_count(); ++i) {
    std::vector<int> orders;
    for (const Neighbor& n : g.neighbors(i)) orders.push_back(static_cast<int>(g.bond(n.bond).order));
    std::sort(orders.begin(), orders.end());
    const Atom& a = g.atom(i);
    keys.emplace_back(a.element, a.charge, a.aromatic, g.degree(i), std::move(orders));
  }
  return dense_rank(keys);
}

// Splits cells by the multiset of (neighbor color, bond order) until stable.
Coloring refine(const MoleculeGraph& g, Coloring color) {
  using Key = std::pair<std::size_t, std::vector<std::pair<std::size_t, int>>>;
  std::size_t cells = distinct(color);
  for (;;) {
    std::vector<Key> keys(g.atom_count());
    for (std::size_t i = 0; i < g.atom_count(); ++i) {
      keys[i].first = color[i];
      for (const Neighbor& n : g.neighbors(i))
        keys[i].second.emplace_back(color[n.atom], static_cast<int>(g.bond(n.bond).order));
      std::sort(keys[i].second.begin(), keys[i].second.end());
    }
    Coloring next = dense_rank(keys);
    const std::size_t next_cells = distinct(next);
    color = std::move(next);
    if (next_cells == cells) return color;
    cells = next_cells;
  }
}

Coloring individualize(const Coloring& color, std::size_t v) {
  std::vector<std::pair<std::size_t, int>> keys(color.size());
  for (std::size_t i = 0; i < color.size(); ++i) keys[i] = {color[i], i == v ? 0 : 1};
  return dense_rank(keys);
}

// u and v are twins when swapping them is an automorphism: same color and
// the same bonded neighbors with the same orders, ignoring each other.
bool twins(const MoleculeGraph& g, const Coloring& color, std::size_t u, std::size_t v) {
  if (color[u] != color[v] || g.degree(u) != g.degree(v)) return false;
  auto signature = [&](std::size_t a, std::size_t other) {
    std::vector<std::pair<std::size_t, int>> sig;
    for (const Neighbor& n : g.neighbors(a))
      if (n.atom != other) sig.emplace_back(n.atom, static_cast<int>(g.bond(n.bond).order));
    std::sort(sig.begin(), sig.end());
    return sig;
  };
  return signature(u, v) == signature(v, u);
}

class CanonicalSearch {
 public:
  explicit CanonicalSearch(const MoleculeGraph& g) : g_(g) {}

  std::string run() {
    search(refine(g_, initial_coloring(g_)));
    return *best_;
  }

 private:
  void search(const Coloring& color) {
    const std::size_t cells = distinct(color);
    if (cells == color.size()) {
      std::string s = write_smiles(g_, color);
      if (!best_ || s < *best_) best_ = std::move(s);
      return;
    }
    // First non-singleton cell in color order.
    std::vector<std::size_t> size(cells, 0);
    for (std::size_t c : color) ++size[c];
    const std::size_t target = static_cast<std::size_t>(
        std::find_if(size.begin(), size.end(), [](std::size_t s) { return s > 1; }) - size.begin());
    std::vector<std::size_t> tried;
    for (std::size_t v = 0; v < color.size(); ++v) {
      if (color[v] != target) continue;
      if (std::any_of(tried.begin(), tried.end(), [&](std::size_t u) { return twins(g_, color, u, v); })) continue;
      tried.push_back(v);
      search(refine(g_, individualize(color, v)));
    }
  }

  const MoleculeGraph& g_;
  std::optional<std::string> best_;
};

bool organic_subset(const std::string& element, bool aromatic) {
  static const char* const kAliphatic[] = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
  static const char* const kAromatic[] = {"B", "C", "N", "O", "P", "S"};
  if (aromatic) return std::find(std::begin(kAromatic), std::end(kAromatic), element) != std::end(kAromatic);
  return std::find(std::begin(kAliphatic), std::end(kAliphatic), element) != std::end(kAliphatic);
}

std::string atom_token(const Atom& a) {
  std::string symbol = a.element;
  if (a.aromatic) symbol[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(symbol[0])));
  if (a.charge == 0 && organic_subset(a.element, a.aromatic)) return symbol;
  std::string out = "[" + symbol;
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  return out + "]";
}

std::string bond_token(const MoleculeGraph& g, const Bond& b) {
  const bool both_aromatic = g.atom(b.begin).aromatic && g.atom(b.end).aromatic;
  switch (b.order) {
    case BondOrder::kSingle: return both_aromatic ? "-" : "";
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(std::size_t digit) {
  if (digit < 10) return std::string(1, static_cast<char>('0' + digit));
  if (digit > 99) throw Error("canonical_form: more than 99 simultaneously open rings");
  return "%" + std::to_string(digit);
}

class SmilesWriter {
 public:
  SmilesWriter(const MoleculeGraph& g, const std::vector<std::size_t>& rank) : g_(g), rank_(rank) {
    if (rank.size() != g.atom_count()) throw Error("write_smiles: rank length does not match atom count");
  }

  std::string run() {
    const std::size_t n = g_.atom_count();
    if (n == 0) return "";
    visited_.assign(n, false);
    children_.assign(n, {});
    opens_.assign(n, {});
    closes_.assign(n, {});
    parent_bond_.assign(n, SIZE_MAX);
    const std::size_t root =
        static_cast<std::size_t>(std::min_element(rank_.begin(), rank_.end()) - rank_.begin());
    plan(root);
    if (std::count(visited_.begin(), visited_.end(), true) != static_cast<std::ptrdiff_t>(n)) {
      throw Error("write_smiles: graph is not connected");
    }
    digit_of_bond_.clear();
    emit(root);
    return out_;
  }

 private:
  std::vector<Neighbor> sorted_neighbors(std::size_t u) const {
    std::vector<Neighbor> nb(g_.neighbors(u).begin(), g_.neighbors(u).end());
    std::sort(nb.begin(), nb.end(), [&](const Neighbor& a, const Neighbor& b) { return rank_[a.atom] < rank_[b.atom]; });
    return nb;
  }

  void plan(std::size_t u) {
    visited_[u] = true;
    for (const Neighbor& nb : sorted_neighbors(u)) {
      if (nb.bond == parent_bond_[u]) continue;
      if (visited_[nb.atom]) {
        // Back edge to an ancestor; recorded once, from the descendant side.
        if (!std::count(opens_[nb.atom].begin(), opens_[nb.atom].end(), nb.bond) &&
            !std::count(opens_[u].begin(), opens_[u].end(), nb.bond)) {
          opens_[nb.atom].push_back(nb.bond);
          closes_[u].push_back(nb.bond);
        }
        continue;
      }
      parent_bond_[nb.atom] = nb.bond;
      children_[u].push_back(nb);
      plan(nb.atom);
    }
  }

  void emit(std::size_t u) {
    out_ += atom_token(g_.atom(u));
    for (std::size_t bond : closes_[u]) {
      const std::size_t digit = digit_of_bond_.at(bond);
      out_ += ring_label(digit);
      in_use_.erase(std::find(in_use_.begin(), in_use_.end(), digit));
    }
    for (std::size_t bond : opens_[u]) {
      std::size_t digit = 1;
      while (std::count(in_use_.begin(), in_use_.end(), digit)) ++digit;
      in_use_.push_back(digit);
      digit_of_bond_[bond] = digit;
      out_ += bond_token(g_, g_.bond(bond)) + ring_label(digit);
    }
    for (std::size_t k = 0; k < children_[u].size(); ++k) {
      const Neighbor& c = children_[u][k];
      const bool branch = k + 1 < children_[u].size();
      if (branch) out_ += '(';
      out_ += bond_token(g_, g_.bond(c.bond));
      emit(c.atom);
      if (branch) out_ += ')';
    }
  }

  const MoleculeGraph& g_;
  const std::vector<std::size_t>& rank_;
  std::vector<bool> visited_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<std::size_t>> opens_;   // ring bonds whose first digit follows this atom
  std::vector<std::vector<std::size_t>> closes_;  // ring bonds whose second digit follows this atom
  std::vector<std::size_t> parent_bond_;
  std::map<std::size_t, std::size_t> digit_of_bond_;
  std::vector<std::size_t> in_use_;
  std::string out_;
};

}  // namespace

std::string write_smiles(const MoleculeGraph& molecule, const std::vector<std::size_t>& rank) {
  return SmilesWriter(molecule, rank).run();
}

std::string canonical_form(const MoleculeGraph& molecule) {
  std::size_t count = 0;
  const std::vector<std::size_t> label = molecule.components(&count);
  std::vector<std::string> parts;
  parts.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<bool> keep(label.size());
    for (std::size_t i = 0; i < label.size(); ++i) keep[i] = label[i] == c;
    parts.push_back(CanonicalSearch(molecule.induced(keep)).run());
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k > 0) out += '.';
    out += parts[k];
  }
  return out;
}

MoleculeGraph murcko_framework(const MoleculeGraph& molecule) {
  std::vector<bool> keep(molecule.atom_count(), true);
  std::vector<std::size_t> degree(molecule.atom_count());
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < molecule.atom_count(); ++i) {
    degree[i] = molecule.degree(i);
    if (degree[i] <= 1) queue.push_back(i);
  }
  while (!queue.empty()) {
    const std::size_t u = queue.back();
    queue.pop_back();
    if (!keep[u]) continue;
    keep[u] = false;
    for (const Neighbor& n : molecule.neighbors(u)) {
      if (keep[n.atom] && --degree[n.atom] == 1) queue.push_back(n.atom);
    }
  }
  return molecule.induced(keep);
}

std::string murcko_scaffold(const MoleculeGraph& molecule) { return canonical_form(murcko_framework(molecule)); }

}  // namespace molrel::chem
