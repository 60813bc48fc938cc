#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "moltext/molgraph.hpp"

namespace moltext {

enum class FpFamily { Circular, Path, Keys };

struct Fingerprint {
  FpFamily family = FpFamily::Circular;
  std::vector<bool> bits;

  int nbits() const { return static_cast<int>(bits.size()); }
  int popcount() const;
};

struct FamilyMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Atom-centered environments: for every atom and every r <= radius, the
// canonical form of the induced r-neighborhood hashes to one bit.
Fingerprint circular_fp(const MolGraph& g, int radius = 2, int nbits = 2048);

// Simple bond paths of min_len..max_len bonds; the element/bond sequence
// (smaller direction) hashes to one bit.
Fingerprint path_fp(const MolGraph& g, int min_len = 1, int max_len = 7,
                    int nbits = 2048);

// 166 structural-key predicates loaded from the versioned key file.
Fingerprint key_fp(const MolGraph& g);

struct KeyDef {
  int id = 0;
  std::string pattern;
  std::string description;
};

// Parses a key-definition file (one predicate per line:
// id<TAB>pattern<TAB>description; '#' comments).
std::vector<KeyDef> load_key_defs(const std::string& path);
const std::vector<KeyDef>& default_key_defs();

bool eval_key(const MolGraph& g, const RingInfo& rings,
              const std::string& pattern);

// |a&b| / |a|b|; 1.0 when both empty, 0.0 when exactly one is empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Mean Tanimoto over the circular, path and keys families.
double fp_sim(const MolGraph& pred, const MolGraph& ref);

}  // namespace moltext
