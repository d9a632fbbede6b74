#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "molrel/chem/canonical.hpp"
#include "molrel/chem/dataset.hpp"
#include "molrel/chem/featurize.hpp"
#include "molrel/chem/smiles.hpp"
#include "molrel/chem/split.hpp"
#include "molrel/core/csv.hpp"
#include "molrel/core/error.hpp"

namespace molrel::chem {
namespace {

const std::vector<std::string> kCorpus = {
    "C",
    "CCO",
    "C1CC1",
    "c1ccccc1",
    "Cc1ccccc1",
    "CC(=O)O",
    "CC(=O)Oc1ccccc1C(=O)O",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "c1ccc2ccccc2c1",
    "C1CCC2(CC1)CCCC2",
    "C12C3C4C1C5C2C3C45",
    "C1C2CC3CC1CC(C2)C3",
    "O=C(Nc1ccc(Cl)cc1)c1ccccn1",
    "c1ccc(cc1)-c1ccccc1",
    "c1cc[nH]c1",
    "[NH4+].[Cl-]",
    "C[N+](C)(C)C.[O-]C(=O)C",
    "CC(C)(C)c1cc(C(C)(C)C)cc(C(C)(C)C)c1",
    "OC[C@H]1OC(O)[C@H](O)[C@@H](O)[C@@H]1O",
    "FC(F)(F)c1ccc(Oc2ccc(cc2)[N+](=O)[O-])cc1",
    "C1CC2CCC1CC2",
    "c1ccc2c(c1)oc1ccccc12",
    "C#CC1=CC=CC=C1",
    "[Se]1C=CC=C1",
    "c1cc2ccc3cccc4ccc(c1)c2c34",
};

MoleculeGraph permuted(const MoleculeGraph& g, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(g.atom_count());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);  // new index of old atom i is perm[i]
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  MoleculeGraph out;
  for (std::size_t k = 0; k < perm.size(); ++k) out.add_atom(g.atom(inverse[k]));
  std::vector<Bond> bonds = g.bonds();
  std::shuffle(bonds.begin(), bonds.end(), rng);
  for (const Bond& b : bonds) {
    if (rng() & 1) out.add_bond(perm[b.end], perm[b.begin], b.order);
    else out.add_bond(perm[b.begin], perm[b.end], b.order);
  }
  return out;
}

// Brute-force isomorphism over all permutations; small graphs only.
bool isomorphic(const MoleculeGraph& a, const MoleculeGraph& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  const std::size_t n = a.atom_count();
  auto same_atom = [](const Atom& x, const Atom& y) {
    return x.element == y.element && x.charge == y.charge && x.aromatic == y.aromatic;
  };
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = same_atom(a.atom(i), b.atom(p[i]));
    for (const Bond& e : a.bonds()) {
      if (!ok) break;
      const std::size_t k = b.find_bond(p[e.begin], p[e.end]);
      ok = k != b.bond_count() && b.bond(k).order == e.order;
    }
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

MoleculeGraph random_molecule(std::mt19937_64& rng, std::size_t n) {
  static const char* const kElements[] = {"C", "C", "C", "N", "O"};
  MoleculeGraph g;
  for (std::size_t i = 0; i < n; ++i) {
    Atom a;
    a.element = kElements[rng() % 5];
    a.charge = (rng() % 8 == 0) ? 1 : 0;
    g.add_atom(a);
  }
  for (std::size_t i = 1; i < n; ++i) g.add_bond(rng() % i, i, static_cast<BondOrder>(rng() % 3 == 0 ? 1 : 0));
  const std::size_t extra = rng() % 3;
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t a = rng() % n, b = rng() % n;
    if (a != b && g.find_bond(a, b) == g.bond_count()) g.add_bond(a, b, BondOrder::kSingle);
  }
  return g;
}

std::vector<double> row(const FeaturizedGraph& f, std::size_t i) {
  return {f.node_features.begin() + static_cast<std::ptrdiff_t>(i * kNodeFeatureDim),
          f.node_features.begin() + static_cast<std::ptrdiff_t>((i + 1) * kNodeFeatureDim)};
}

// ---- parse_smiles ----

TEST(ParseSmiles, SingleAtom) {
  const MoleculeGraph g = parse_smiles("C");
  EXPECT_EQ(g.atom_count(), 1u);
  EXPECT_EQ(g.bond_count(), 0u);
  EXPECT_EQ(g.atom(0).element, "C");
}

TEST(ParseSmiles, RingClosureFormsTriangle) {
  const MoleculeGraph g = parse_smiles("C1CC1");
  ASSERT_EQ(g.atom_count(), 3u);
  ASSERT_EQ(g.bond_count(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(g.degree(i), 2u);
    EXPECT_EQ(g.bond(i).order, BondOrder::kSingle);
  }
  EXPECT_NE(g.find_bond(0, 2), g.bond_count());
}

TEST(ParseSmiles, BranchSemantics) {
  const MoleculeGraph g = parse_smiles("CC(=O)O");
  ASSERT_EQ(g.atom_count(), 4u);
  ASSERT_EQ(g.bond_count(), 3u);
  const std::vector<std::tuple<std::size_t, std::size_t, BondOrder>> expected = {
      {0, 1, BondOrder::kSingle}, {1, 2, BondOrder::kDouble}, {1, 3, BondOrder::kSingle}};
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(g.bond(k).begin, std::get<0>(expected[k]));
    EXPECT_EQ(g.bond(k).end, std::get<1>(expected[k]));
    EXPECT_EQ(g.bond(k).order, std::get<2>(expected[k]));
  }
}

TEST(ParseSmiles, AromaticBondsAndFlags) {
  const MoleculeGraph g = parse_smiles("c1ccccc1C");
  ASSERT_EQ(g.bond_count(), 7u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_TRUE(g.atom(i).aromatic);
  EXPECT_FALSE(g.atom(6).aromatic);
  EXPECT_EQ(g.bond(g.find_bond(0, 5)).order, BondOrder::kAromatic);
  EXPECT_EQ(g.bond(g.find_bond(5, 6)).order, BondOrder::kSingle);
}

TEST(ParseSmiles, BracketAtoms) {
  const MoleculeGraph g = parse_smiles("[13CH3][C@@H](N)[O-].[Fe+2].[Na+].[nH]");
  EXPECT_EQ(g.atom(0).element, "C");
  EXPECT_EQ(g.atom(0).hydrogens, 3);
  EXPECT_EQ(g.atom(1).hydrogens, 1);
  EXPECT_EQ(g.atom(3).charge, -1);
  EXPECT_EQ(g.atom(4).element, "Fe");
  EXPECT_EQ(g.atom(4).charge, 2);
  EXPECT_EQ(g.atom(5).charge, 1);
  EXPECT_TRUE(g.atom(6).aromatic);
  EXPECT_EQ(parse_smiles("[Cu++]").atom(0).charge, 2);
  EXPECT_EQ(parse_smiles("[C@TH1H](F)(Cl)Br").atom(0).hydrogens, 1);
}

TEST(ParseSmiles, PercentRingsAndDots) {
  const MoleculeGraph g = parse_smiles("C%10CC%10.O");
  EXPECT_EQ(g.atom_count(), 4u);
  EXPECT_EQ(g.bond_count(), 3u);
  std::size_t count = 0;
  g.components(&count);
  EXPECT_EQ(count, 2u);
}

TEST(ParseSmiles, StereoMarkersDiscarded) {
  const MoleculeGraph a = parse_smiles("F/C=C/F");
  const MoleculeGraph b = parse_smiles("FC=CF");
  EXPECT_EQ(canonical_form(a), canonical_form(b));
}

TEST(ParseSmiles, ExplicitHydrogenFolded) {
  const MoleculeGraph g = parse_smiles("[H]OC([H])([H])[H]");
  ASSERT_EQ(g.atom_count(), 2u);
  EXPECT_EQ(g.atom(0).hydrogens, 1);
  EXPECT_EQ(g.atom(1).hydrogens, 3);
}

TEST(ParseSmiles, RingBondOrderFromEitherEnd) {
  EXPECT_EQ(parse_smiles("C=1CCC1").bond(3).order, BondOrder::kDouble);
  EXPECT_EQ(parse_smiles("C1CCC=1").bond(3).order, BondOrder::kDouble);
}

struct BadSmiles {
  const char* text;
  std::size_t offset;
};

class ParseErrors : public ::testing::TestWithParam<BadSmiles> {};

TEST_P(ParseErrors, RejectedWithOffset) {
  try {
    parse_smiles(GetParam().text);
    FAIL() << "accepted " << GetParam().text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), GetParam().offset) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, ParseErrors,
                         ::testing::Values(BadSmiles{"", 0}, BadSmiles{"CC(C", 2}, BadSmiles{"CC)C", 2},
                                           BadSmiles{"C1CC", 1}, BadSmiles{"CXC", 1}, BadSmiles{"C[Xx]", 2},
                                           BadSmiles{"CC=", 2}, BadSmiles{"C11", 2}, BadSmiles{"C=1CC-1", 6},
                                           BadSmiles{"C1C-1", 4}, BadSmiles{"C[CH", 1}, BadSmiles{"C%1C", 1}));

// ---- featurize ----

TEST(Featurize, Methane) {
  const FeaturizedGraph f = featurize(parse_smiles("C"));
  ASSERT_EQ(f.atom_count, 1u);
  std::vector<double> expected(kNodeFeatureDim, 0.0);
  expected[element_slot("C")] = 1.0;
  expected[kDegreeOffset + 0] = 1.0;
  expected[kChargeOffset + 2] = 1.0;
  EXPECT_EQ(row(f, 0), expected);
  EXPECT_EQ(f.edge_count(), 0u);
}

TEST(Featurize, Benzene) {
  const FeaturizedGraph f = featurize(parse_smiles("c1ccccc1"));
  ASSERT_EQ(f.atom_count, 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto r = row(f, i);
    EXPECT_EQ(r[kAromaticColumn], 1.0);
    EXPECT_EQ(r[kDegreeOffset + 2], 1.0);
  }
  ASSERT_EQ(f.edge_count(), 12u);
  for (std::size_t e = 0; e < 12; ++e) {
    for (std::size_t k = 0; k < kEdgeFeatureDim; ++k) {
      EXPECT_EQ(f.edge_features[e * kEdgeFeatureDim + k], k == 3 ? 1.0 : 0.0);
    }
  }
}

TEST(Featurize, AmmoniumChargeSlot) {
  const FeaturizedGraph f = featurize(parse_smiles("[NH4+]"));
  EXPECT_EQ(row(f, 0)[kChargeOffset + 3], 1.0);
  EXPECT_EQ(row(f, 0)[element_slot("N")], 1.0);
}

TEST(Featurize, OutOfVocabularyElementUsesOtherSlot) {
  const FeaturizedGraph f = featurize(parse_smiles("[Au]"));
  EXPECT_EQ(row(f, 0)[kElementSlots - 1], 1.0);
  EXPECT_EQ(element_slot("Se"), kElementSlots - 2);
}

TEST(Featurize, ClampsDegreeAndCharge) {
  const FeaturizedGraph f = featurize(parse_smiles("[S-3](F)(F)(F)(F)(F)(F)F"));
  EXPECT_EQ(row(f, 0)[kDegreeOffset + 5], 1.0);
  EXPECT_EQ(row(f, 0)[kChargeOffset + 0], 1.0);
}

TEST(Featurize, DirectedEdgesPairUp) {
  const MoleculeGraph g = parse_smiles("CC(=O)O");
  const FeaturizedGraph f = featurize(g);
  for (std::size_t k = 0; k < g.bond_count(); ++k) {
    EXPECT_EQ(f.edge_source[2 * k], g.bond(k).begin);
    EXPECT_EQ(f.edge_target[2 * k], g.bond(k).end);
    EXPECT_EQ(f.edge_source[2 * k + 1], g.bond(k).end);
    EXPECT_EQ(f.edge_target[2 * k + 1], g.bond(k).begin);
  }
}

TEST(Featurize, ExactlyOneHotPerBlock) {
  for (const auto& s : kCorpus) {
    const FeaturizedGraph f = featurize(parse_smiles(s));
    for (std::size_t i = 0; i < f.atom_count; ++i) {
      const auto r = row(f, i);
      auto block_sum = [&](std::size_t from, std::size_t len) {
        return std::accumulate(r.begin() + static_cast<std::ptrdiff_t>(from),
                               r.begin() + static_cast<std::ptrdiff_t>(from + len), 0.0);
      };
      EXPECT_EQ(block_sum(0, kElementSlots), 1.0) << s;
      EXPECT_EQ(block_sum(kDegreeOffset, kDegreeSlots), 1.0) << s;
      EXPECT_EQ(block_sum(kChargeOffset, kChargeSlots), 1.0) << s;
      for (double v : r) EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
    for (std::size_t e = 0; e < f.edge_count(); ++e) {
      double sum = 0.0;
      for (std::size_t k = 0; k < kEdgeFeatureDim; ++k) sum += f.edge_features[e * kEdgeFeatureDim + k];
      EXPECT_EQ(sum, 1.0) << s;
    }
  }
}

// ---- canonical_form ----

TEST(CanonicalForm, RingDigitRenaming) {
  EXPECT_EQ(canonical_form(parse_smiles("C1CC1")), canonical_form(parse_smiles("C2CC2")));
}

TEST(CanonicalForm, RotatedBenzene) {
  EXPECT_EQ(canonical_form(parse_smiles("c1ccccc1")), canonical_form(parse_smiles("c1ccc(cc1)")));
}

TEST(CanonicalForm, ElementDifference) {
  EXPECT_NE(canonical_form(parse_smiles("CCO")), canonical_form(parse_smiles("CCN")));
}

TEST(CanonicalForm, KnownEquivalentWritings) {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"OCC", "CCO"},
      {"C(=O)(O)C", "CC(=O)O"},
      {"c1ccccc1C", "Cc1ccccc1"},
      {"[Cl-].[NH4+]", "[NH4+].[Cl-]"},
      {"N1C=CC=C1", "C1=CNC=C1"},
  };
  for (const auto& [a, b] : pairs) EXPECT_EQ(canonical_form(parse_smiles(a)), canonical_form(parse_smiles(b))) << a;
}

TEST(CanonicalForm, DistinguishesBondOrdersAndCharges) {
  EXPECT_NE(canonical_form(parse_smiles("C=CC")), canonical_form(parse_smiles("CCC")));
  EXPECT_NE(canonical_form(parse_smiles("C[N+]")), canonical_form(parse_smiles("CN")));
  EXPECT_NE(canonical_form(parse_smiles("c1ccccc1")), canonical_form(parse_smiles("C1CCCCC1")));
  // Same degree sequence, different topology.
  EXPECT_NE(canonical_form(parse_smiles("C1CCCCC1.C1CCCCC1")), canonical_form(parse_smiles("C1CCCCCCCCCCC1")));
}

TEST(CanonicalForm, InvariantUnderRandomRelabeling) {
  std::mt19937_64 rng(20240611);
  for (const auto& s : kCorpus) {
    const MoleculeGraph g = parse_smiles(s);
    const std::string expected = canonical_form(g);
    for (int trial = 0; trial < 20; ++trial) EXPECT_EQ(canonical_form(permuted(g, rng)), expected) << s;
  }
}

TEST(CanonicalForm, RoundTripIsFixedPoint) {
  for (const auto& s : kCorpus) {
    const std::string once = canonical_form(parse_smiles(s));
    const MoleculeGraph reparsed = parse_smiles(once);
    EXPECT_EQ(canonical_form(reparsed), once) << s;
    EXPECT_EQ(reparsed.atom_count(), parse_smiles(s).atom_count()) << s;
    EXPECT_EQ(reparsed.bond_count(), parse_smiles(s).bond_count()) << s;
  }
}

TEST(CanonicalForm, AgreesWithBruteForceIsomorphism) {
  std::mt19937_64 rng(7);
  std::vector<MoleculeGraph> graphs;
  for (int k = 0; k < 160; ++k) graphs.push_back(random_molecule(rng, 3 + rng() % 4));
  std::vector<std::string> forms;
  for (const auto& g : graphs) forms.push_back(canonical_form(g));
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      ASSERT_EQ(forms[i] == forms[j], isomorphic(graphs[i], graphs[j])) << forms[i] << " vs " << forms[j];
    }
  }
}

TEST(CanonicalForm, SymmetricCagesTerminate) {
  // Cubane and adamantane exercise deep individualization on symmetric cells.
  EXPECT_FALSE(canonical_form(parse_smiles("C12C3C4C1C5C2C3C45")).empty());
  const std::string tbu = canonical_form(parse_smiles("CC(C)(C)C(C(C)(C)C)(C(C)(C)C)C(C)(C)C"));
  EXPECT_EQ(canonical_form(parse_smiles(tbu)), tbu);
}

TEST(CanonicalForm, EmptyGraph) { EXPECT_EQ(canonical_form(MoleculeGraph{}), ""); }

// ---- murcko_scaffold ----

TEST(MurckoScaffold, BenzeneIsItsOwnScaffold) {
  EXPECT_EQ(murcko_scaffold(parse_smiles("c1ccccc1")), canonical_form(parse_smiles("c1ccccc1")));
}

TEST(MurckoScaffold, TolueneMatchesBenzene) {
  EXPECT_EQ(murcko_scaffold(parse_smiles("Cc1ccccc1")), murcko_scaffold(parse_smiles("c1ccccc1")));
}

TEST(MurckoScaffold, AcyclicIsEmpty) {
  EXPECT_EQ(murcko_scaffold(parse_smiles("CCO")), "");
  EXPECT_EQ(murcko_scaffold(parse_smiles("C")), "");
  EXPECT_EQ(murcko_scaffold(parse_smiles("[Na+].[Cl-]")), "");
}

TEST(MurckoScaffold, KeepsLinkersBetweenRings) {
  EXPECT_EQ(murcko_scaffold(parse_smiles("Oc1ccc(CCc2ccccc2)cc1N")), canonical_form(parse_smiles("c1ccc(CCc2ccccc2)cc1")));
  EXPECT_EQ(murcko_scaffold(parse_smiles("CC(=O)Oc1ccccc1C(=O)O")), canonical_form(parse_smiles("c1ccccc1")));
}

TEST(MurckoScaffold, DropsAcyclicFragments) {
  EXPECT_EQ(murcko_scaffold(parse_smiles("c1ccccc1O.[Na+]")), canonical_form(parse_smiles("c1ccccc1")));
}

TEST(MurckoScaffold, Idempotent) {
  for (const auto& s : kCorpus) {
    const std::string key = murcko_scaffold(parse_smiles(s));
    if (key.empty()) continue;
    EXPECT_EQ(murcko_scaffold(parse_smiles(key)), key) << s;
  }
}

// ---- scaffold_split ----

void expect_partition(const ScaffoldSplit& split, std::size_t n) {
  std::vector<int> owner(n, -1);
  int set_id = 0;
  for (const auto* set : {&split.train, &split.valid, &split.test}) {
    for (std::size_t i : *set) {
      ASSERT_LT(i, n);
      ASSERT_EQ(owner[i], -1) << "index " << i << " in two sets";
      owner[i] = set_id;
    }
    ++set_id;
  }
  for (int o : owner) EXPECT_NE(o, -1);
  std::map<std::string, int> key_owner;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [it, inserted] = key_owner.emplace(split.keys[i], owner[i]);
    EXPECT_EQ(it->second, owner[i]) << "scaffold '" << split.keys[i] << "' straddles sets";
  }
  EXPECT_GE(split.train.size(), split.valid.size());
}

TEST(ScaffoldSplit, DistinctScaffoldsFollowQuota) {
  std::vector<std::string> keys;
  for (int i = 0; i < 10; ++i) keys.push_back("k" + std::to_string(i));
  for (std::uint64_t seed : {0u, 1u, 17u}) {
    const ScaffoldSplit split = scaffold_split(keys, {0.8, 0.1, 0.1}, seed);
    EXPECT_EQ(split.train.size(), 8u);
    EXPECT_EQ(split.valid.size(), 1u);
    EXPECT_EQ(split.test.size(), 1u);
    expect_partition(split, keys.size());
    EXPECT_TRUE(split.warnings.empty());
  }
}

TEST(ScaffoldSplit, SingleScaffoldGoesToTrainWithWarning) {
  const std::vector<std::string> keys(7, "c1ccccc1");
  const ScaffoldSplit split = scaffold_split(keys, {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(split.train.size(), 7u);
  EXPECT_TRUE(split.valid.empty());
  EXPECT_TRUE(split.test.empty());
  EXPECT_FALSE(split.warnings.empty());
}

TEST(ScaffoldSplit, QuotaArithmetic) {
  const std::vector<std::string> keys(1513, "");
  std::vector<std::string> distinct_keys;
  for (int i = 0; i < 1513; ++i) distinct_keys.push_back(std::to_string(i));
  const ScaffoldSplit split = scaffold_split(distinct_keys, {0.8, 0.1, 0.1}, 0);
  EXPECT_EQ(split.quotas, (std::array<std::size_t, 3>{1210, 151, 152}));
  EXPECT_EQ(split.train.size(), 1210u);
  EXPECT_EQ(split.valid.size(), 151u);
  EXPECT_EQ(split.test.size(), 152u);
}

TEST(ScaffoldSplit, SeedChangesMembershipNotProperties) {
  std::mt19937_64 rng(5);
  std::vector<std::string> keys;
  for (int i = 0; i < 400; ++i) keys.push_back("s" + std::to_string(rng() % 120));
  const ScaffoldSplit a = scaffold_split(keys, {0.8, 0.1, 0.1}, 1);
  const ScaffoldSplit b = scaffold_split(keys, {0.8, 0.1, 0.1}, 2);
  const ScaffoldSplit a2 = scaffold_split(keys, {0.8, 0.1, 0.1}, 1);
  expect_partition(a, keys.size());
  expect_partition(b, keys.size());
  EXPECT_EQ(a.train, a2.train);
  EXPECT_EQ(a.test, a2.test);
  EXPECT_NE(a.test, b.test);
  std::map<std::string, std::size_t> group_size;
  for (const auto& k : keys) ++group_size[k];
  std::size_t largest = 0;
  for (const auto& [k, s] : group_size) largest = std::max(largest, s);
  for (const auto* s : {&a, &b}) {
    for (std::size_t set = 0; set < 3; ++set) {
      const std::size_t size = set == 0 ? s->train.size() : set == 1 ? s->valid.size() : s->test.size();
      EXPECT_LE(size, s->quotas[set] + largest);
      EXPECT_GE(size + largest, s->quotas[set]);
    }
  }
}

TEST(ScaffoldSplit, RejectsBadRatios) {
  EXPECT_THROW(scaffold_split(std::vector<std::string>{"a"}, {0.5, 0.1, 0.1}, 0), ConfigError);
  EXPECT_THROW(scaffold_split(std::vector<std::string>{}, {0.8, 0.1, 0.1}, 0), DataError);
}

TEST(ScaffoldSplit, ManifestRoundTrip) {
  std::vector<std::string> keys;
  for (int i = 0; i < 30; ++i) keys.push_back("g" + std::to_string(i % 9));
  const ScaffoldSplit split = scaffold_split(keys, {0.8, 0.1, 0.1}, 11);
  const nlohmann::json manifest = split_manifest(split);
  const ScaffoldSplit back = split_from_manifest(nlohmann::json::parse(manifest.dump()));
  EXPECT_EQ(back.train, split.train);
  EXPECT_EQ(back.valid, split.valid);
  EXPECT_EQ(back.test, split.test);
  EXPECT_EQ(back.keys, split.keys);
  EXPECT_EQ(back.seed, 11u);
  nlohmann::json broken = manifest;
  broken["test"].push_back(0);
  EXPECT_THROW(split_from_manifest(broken), DataError);
}

// ---- CSV and dataset loading ----

TEST(Csv, QuotedFieldsAndCrlf) {
  const CsvTable t = parse_csv("a,b,c\r\n\"x,1\",\"he said \"\"hi\"\"\",\r\n\n3,\"multi\nline\",z");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.rows[0][2], "");
  EXPECT_EQ(t.rows[1][1], "multi\nline");
  EXPECT_EQ(t.row_lines[1], 4u);
  EXPECT_EQ(t.column("c"), 2u);
  EXPECT_THROW(t.column("d"), DataError);
}

TEST(Csv, Malformed) {
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), DataError);
  EXPECT_THROW(parse_csv("a,b\n\"1,2\n"), ParseError);
  EXPECT_THROW(parse_csv(""), DataError);
}

TEST(Dataset, MissingLabelsKeepRow) {
  const DatasetSpec spec = dataset_preset("tox21");
  std::string csv = "";
  for (const auto& t : spec.label_columns) csv += t + ",";
  csv += "mol_id,smiles\n";
  csv += "0,,1,0,0,0,0,0,0,0,0,1,TOX1,CCO\n";
  csv += ",,,,,,,,,,,,TOX2,CCN\n";
  csv += "1,1,1,1,1,1,1,1,1,1,1,1,TOX3,C1CC\n";
  LoadReport report;
  const LabeledDataset ds = parse_dataset(csv, spec, &report);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.task_count(), 12u);
  EXPECT_EQ(ds.records[0].labels[1], kMissingLabel);
  EXPECT_EQ(ds.records[0].labels[2], 1);
  EXPECT_EQ(report.rows_read, 3u);
  EXPECT_EQ(report.dropped_unlabeled, 1u);
  EXPECT_EQ(report.dropped_unparseable, 1u);
  EXPECT_EQ(report.missing[1], 1u);
  EXPECT_EQ(report.positives[2], 1u);
}

TEST(Dataset, PresetsAndErrors) {
  EXPECT_EQ(dataset_preset("bace").smiles_column, "mol");
  EXPECT_EQ(dataset_preset("bbbp").label_columns, std::vector<std::string>{"p_np"});
  EXPECT_THROW(dataset_preset("qm9"), ConfigError);
  const DatasetSpec bbbp = dataset_preset("bbbp");
  EXPECT_THROW(parse_dataset("name,smiles\nx,C\n", bbbp), DataError);
  EXPECT_THROW(parse_dataset("smiles,p_np\nC,2\n", bbbp), DataError);
  EXPECT_THROW(load_dataset("/nonexistent/bbbp.csv", bbbp), DataError);
  const LabeledDataset ok = parse_dataset("num,name,p_np,smiles\n1,a,1.0,CC\n2,b,0,c1ccccc1\n", bbbp);
  EXPECT_EQ(ok.records[0].labels[0], 1);
  EXPECT_EQ(ok.records[1].labels[0], 0);
}

}  // namespace
}  // namespace molrel::chem
