#pragma once

#include <optional>
#include <string>
#include <vector>

namespace moltext {

// Bond orders are 1..3; aromaticity is a perceived property, not a bond
// order produced by decoding.
struct Atom {
  std::string element;
  int charge = 0;
  int implicit_h = 0;
  bool aromatic = false;
  std::string stereo;  // "@" / "@@", preserved but ignored by identity
};

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;
  bool in_aromatic_ring = false;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string provenance;  // source SELFIES text, when decoded

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }
  bool empty() const { return atoms.empty(); }

  // -1 when no such bond
  int find_bond(int a, int b) const;
  // sum of bond orders at atom i (aromatic ring bonds count at their
  // kekulé order)
  int bond_order_sum(int i) const;
  int heavy_degree(int i) const;
  std::vector<int> neighbors(int i) const;
  int net_charge() const;
};

// Allowed valence states for (element, formal charge), smallest first.
// Empty result means the element is unsupported.
std::vector<int> allowed_valences(const std::string& element, int charge);
int max_allowed_valence(const std::string& element, int charge);

// Standard atomic weight, or 0 for unknown elements.
double atomic_mass(const std::string& element);

bool is_supported_element(const std::string& element);

struct StructuralInfo {
  int num_rings = 0;
  int num_aromatic_rings = 0;
  double molecular_weight = 0.0;
};

struct RingInfo {
  std::vector<std::vector<int>> rings;  // atom index cycles, SSSR-style
  std::vector<bool> ring_aromatic;      // parallel to rings
  int num_rings = 0;                    // cyclomatic number
  int num_aromatic_rings = 0;
};

// Heavy atoms plus implicit hydrogens; charge electron mass ignored.
double molecular_weight(const MolGraph& g);

// Ring count is the cyclomatic number; aromaticity per SSSR cycle uses a
// 4n+2 pi-electron count over sp2-capable ring atoms.
RingInfo ring_info(const MolGraph& g);

// Sets Atom::aromatic and Bond::in_aromatic_ring from ring_info. Returns
// the ring info it computed.
RingInfo perceive(MolGraph& g);

StructuralInfo structural_info(const MolGraph& g);

// Prompt-facing rendering of StructuralInfo (fixed sentence forms, weight
// with 2 decimals).
std::string render_ring_sentence(const StructuralInfo& info);
std::string render_weight_sentence(const StructuralInfo& info);

// Stereo-agnostic canonical serialization. Equal strings iff isomorphic
// within the supported feature set. Aromatic rings serialize with ':'
// bonds so kekulé variants of the same ring compare equal.
std::string canonical_form(const MolGraph& g);

bool exact_match(const MolGraph& a, const MolGraph& b);

// Induced subgraph on `atom_ids`. When recompute_h is set, implicit
// hydrogens are refilled from the valence table (attachment erased);
// otherwise parent values are kept.
MolGraph subgraph(const MolGraph& g, const std::vector<int>& atom_ids,
                  bool recompute_h);

int connected_components(const MolGraph& g);

}  // namespace moltext
