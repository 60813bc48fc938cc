#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "moltext/molgraph.hpp"

namespace moltext {

enum class TokenKind { Atom, Branch, Ring };

struct SelfiesToken {
  TokenKind kind = TokenKind::Atom;
  std::string element;   // atom tokens only
  int bond_order = 1;    // 1..3, from the =/# prefix
  int charge = 0;        // -2..+2
  std::string stereo;    // "@" / "@@" if present
  int explicit_h = 0;    // the H1 in [C@H1]
  int size_digits = 1;   // branch/ring tokens: 1..3 index symbols follow
  std::string raw;       // exact bracketed source text
};

struct SelfiesError : std::runtime_error {
  enum class Kind { UnbracketedText, UnknownSymbol, EmptyMolecule };
  Kind kind;
  std::size_t offset;
  SelfiesError(Kind k, std::size_t off, const std::string& what)
      : std::runtime_error(what), kind(k), offset(off) {}
};

// Splits a SELFIES string into tokens. Surrounding whitespace is ignored;
// anything else outside brackets raises UnbracketedText, unknown bracket
// contents raise UnknownSymbol. Concatenating `raw` fields reproduces the
// trimmed input.
std::vector<SelfiesToken> tokenize(const std::string& text);

// Index value of a token under the 16-symbol index alphabet; tokens
// outside the alphabet count as 0.
int index_value(const SelfiesToken& tok);

// Total derivation: every token sequence with at least one atom token
// decodes to a valence-valid graph. Overlong branch lengths, ring offsets
// and bond orders are clamped to what the derivation state permits.
// Throws SelfiesError(EmptyMolecule) when no atom token is present.
MolGraph decode(const std::vector<SelfiesToken>& tokens);

MolGraph decode_string(const std::string& text);

// Deterministic encoder; decode(encode(g)) is isomorphic to g for any
// connected valence-valid graph.
std::string encode(const MolGraph& g);

// Renders a token back to its bracketed text (== raw for parsed tokens).
std::string render_token(const SelfiesToken& tok);

}  // namespace moltext
