#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "moltext/molgraph.hpp"

namespace moltext {

// EFG-style decomposition output. Fragment identifiers are canonical
// strings; functional-group counts are multiset counts (CH-only
// fragments excluded from fg_counts by construction).
struct FragmentSet {
  std::set<std::string> fragments;       // all fragment ids (FG + CH)
  std::map<std::string, int> fg_counts;  // functional-group id -> count
  std::set<std::string> ch_only;         // hydrocarbon fragment ids
};

// Functional atoms are heteroatoms, carbons multiply bonded to a
// heteroatom, and every atom of an aromatic ring that contains a
// heteroatom (the ring becomes a single fragment). The remaining carbon
// skeleton splits into CH-only fragments of adjacent same-type carbons.
FragmentSet decompose(const MolGraph& g);

// 0.5 * Jaccard + 0.5 * recall over fragment-identifier sets. Empty
// reference: 1.0 if pred is empty too, else 0.0.
double frag_sim(const FragmentSet& pred, const FragmentSet& ref);

// (Jaccard, recall) — the two addends of frag_sim before weighting.
std::pair<double, double> frag_metrics(const FragmentSet& pred,
                                       const FragmentSet& ref);

// exp(-sum_k |pred(k)-ref(k)| / (sum_k ref(k) + eps)), eps = 1e-5, k over
// the union of functional-group ids.
double fg_match(const FragmentSet& pred, const FragmentSet& ref);

// Debug dump: one line per fragment — kind (FG|CH), id, count.
std::string dump_fragments(const FragmentSet& fs);

}  // namespace moltext
