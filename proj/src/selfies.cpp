#include "moltext/selfies.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>

namespace moltext {

namespace {

// 16-symbol index alphabet, [C]=0 .. [P]=15.
const std::array<const char*, 16> kIndexAlphabet = {
    "[C]",        "[Ring1]",    "[Ring2]",    "[Branch1]",
    "[=Branch1]", "[#Branch1]", "[Branch2]",  "[=Branch2]",
    "[#Branch2]", "[O]",        "[N]",        "[=N]",
    "[=C]",       "[#C]",       "[S]",        "[P]",
};

int bond_prefix_order(char c) {
  if (c == '=') return 2;
  if (c == '#') return 3;
  return 1;
}

// Parses the contents between brackets of an atom token. Returns false
// when the body is not a valid atom symbol.
bool parse_atom_body(const std::string& body, SelfiesToken& tok) {
  std::size_t i = 0;
  if (i < body.size() && (body[i] == '=' || body[i] == '#')) {
    tok.bond_order = bond_prefix_order(body[i]);
    ++i;
  }
  if (i >= body.size() || !std::isupper(static_cast<unsigned char>(body[i])))
    return false;
  std::string el(1, body[i++]);
  if (i < body.size() && std::islower(static_cast<unsigned char>(body[i])))
    el += body[i++];
  if (!is_supported_element(el)) return false;
  tok.element = el;
  while (i < body.size() && body[i] == '@') {
    tok.stereo += '@';
    ++i;
    if (tok.stereo.size() > 2) return false;
  }
  if (i < body.size() && body[i] == 'H') {
    ++i;
    if (i >= body.size() || !std::isdigit(static_cast<unsigned char>(body[i])))
      return false;
    tok.explicit_h = body[i++] - '0';
  }
  if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
    char sign = body[i++];
    if (i >= body.size() || !std::isdigit(static_cast<unsigned char>(body[i])))
      return false;
    int mag = body[i++] - '0';
    tok.charge = sign == '+' ? mag : -mag;
    if (tok.charge < -2 || tok.charge > 2) return false;
  }
  return i == body.size();
}

bool parse_struct_body(const std::string& body, SelfiesToken& tok) {
  std::string rest = body;
  int order = 1;
  if (!rest.empty() && (rest[0] == '=' || rest[0] == '#')) {
    order = bond_prefix_order(rest[0]);
    rest = rest.substr(1);
  }
  auto tail_digit = [&](const std::string& prefix) -> int {
    if (rest.size() == prefix.size() + 1 && rest.rfind(prefix, 0) == 0 &&
        rest.back() >= '1' && rest.back() <= '3')
      return rest.back() - '0';
    return 0;
  };
  if (int d = tail_digit("Branch")) {
    tok.kind = TokenKind::Branch;
    tok.bond_order = order;
    tok.size_digits = d;
    return true;
  }
  if (int d = tail_digit("Ring")) {
    tok.kind = TokenKind::Ring;
    tok.bond_order = order;
    tok.size_digits = d;
    return true;
  }
  return false;
}

}  // namespace

std::vector<SelfiesToken> tokenize(const std::string& text) {
  std::vector<SelfiesToken> tokens;
  std::size_t begin = 0, end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin])))
    ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1])))
    --end;

  std::size_t i = begin;
  while (i < end) {
    if (text[i] != '[')
      throw SelfiesError(SelfiesError::Kind::UnbracketedText, i - begin,
                         "stray character outside brackets at offset " +
                             std::to_string(i - begin));
    std::size_t close = text.find(']', i);
    if (close == std::string::npos || close >= end)
      throw SelfiesError(SelfiesError::Kind::UnbracketedText, i - begin,
                         "unterminated bracket at offset " +
                             std::to_string(i - begin));
    std::string body = text.substr(i + 1, close - i - 1);
    SelfiesToken tok;
    tok.raw = text.substr(i, close - i + 1);
    if (parse_struct_body(body, tok)) {
      tokens.push_back(tok);
    } else if (parse_atom_body(body, tok)) {
      tok.kind = TokenKind::Atom;
      tokens.push_back(tok);
    } else {
      throw SelfiesError(SelfiesError::Kind::UnknownSymbol, i - begin,
                         "unknown symbol " + tok.raw + " at offset " +
                             std::to_string(i - begin));
    }
    i = close + 1;
  }
  return tokens;
}

int index_value(const SelfiesToken& tok) {
  for (int i = 0; i < 16; ++i)
    if (tok.raw == kIndexAlphabet[i]) return i;
  return 0;
}

std::string render_token(const SelfiesToken& tok) { return tok.raw; }

// ---------------------------------------------------------------------------
// Decoder

namespace {

struct Decoder {
  const std::vector<SelfiesToken>& tokens;
  MolGraph graph;
  std::vector<int> used;  // bond order sums during derivation

  explicit Decoder(const std::vector<SelfiesToken>& t) : tokens(t) {}

  int free_valence(int atom) const {
    const Atom& a = graph.atoms[atom];
    int cap = max_allowed_valence(a.element, a.charge);
    return cap - used[atom];
  }

  int read_index(std::size_t& pos, std::size_t end, int digits) {
    int q = 0;
    for (int d = 0; d < digits; ++d) {
      int v = 0;
      if (pos < end) v = index_value(tokens[pos++]);
      q = q * 16 + v;
    }
    return q;
  }

  void add_atom(const SelfiesToken& tok, int attach, int cap_order) {
    Atom a;
    a.element = tok.element;
    a.charge = tok.charge;
    a.stereo = tok.stereo;
    int id = graph.num_atoms();
    graph.atoms.push_back(a);
    used.push_back(tok.explicit_h);  // explicit H reserves valence
    if (attach >= 0) {
      int o = std::min({tok.bond_order, cap_order, free_valence(attach),
                        free_valence(id)});
      if (o >= 1) {
        graph.bonds.push_back({attach, id, o, false});
        used[attach] += o;
        used[id] += o;
      }
    }
  }

  // Derives tokens in [pos, end). `attach` is the branch parent (-1 for a
  // fresh chain); `first_cap` caps the first bond order (branch prefix).
  void derive(std::size_t& pos, std::size_t end, int attach, int first_cap) {
    int current = attach;
    bool first = attach >= 0;
    while (pos < end) {
      const SelfiesToken& tok = tokens[pos];
      switch (tok.kind) {
        case TokenKind::Atom: {
          ++pos;
          if (current >= 0 && free_valence(current) <= 0) {
            pos = end;  // saturated chain terminates this scope
            break;
          }
          int id = graph.num_atoms();
          add_atom(tok, current, first ? first_cap : 3);
          first = false;
          current = id;
          break;
        }
        case TokenKind::Branch: {
          ++pos;
          int q = read_index(pos, end, tok.size_digits);
          if (current < 0 || free_valence(current) < 2) {
            // No capacity for a branch: index symbols are consumed, the
            // body continues in the current chain.
            break;
          }
          std::size_t body_end = std::min(pos + static_cast<std::size_t>(q) + 1,
                                          end);
          derive(pos, body_end, current, tok.bond_order);
          break;
        }
        case TokenKind::Ring: {
          ++pos;
          int q = read_index(pos, end, tok.size_digits);
          if (current < 0) break;
          int offset = q + 1;
          int target = current - offset;
          if (target < 0) target = 0;  // clamp to available history
          if (target == current) break;
          if (graph.find_bond(current, target) >= 0) break;
          int o = std::min({tok.bond_order, free_valence(current),
                            free_valence(target)});
          if (o >= 1) {
            graph.bonds.push_back({target, current, o, false});
            used[current] += o;
            used[target] += o;
          }
          break;
        }
      }
    }
  }

  // Hydrogen saturation: smallest allowed valence covering the used
  // valence; implicit hydrogens fill the gap (explicit H from the token
  // is part of `used`, so it survives as hydrogen).
  void saturate() {
    for (int i = 0; i < graph.num_atoms(); ++i) {
      Atom& a = graph.atoms[i];
      int bond_sum = graph.bond_order_sum(i);
      int h = 0;
      for (int v : allowed_valences(a.element, a.charge)) {
        if (v >= used[i]) {
          h = v - bond_sum;
          break;
        }
      }
      a.implicit_h = std::max(h, 0);
    }
  }
};

}  // namespace

MolGraph decode(const std::vector<SelfiesToken>& tokens) {
  bool has_atom = std::any_of(tokens.begin(), tokens.end(), [](const auto& t) {
    return t.kind == TokenKind::Atom;
  });
  if (!has_atom)
    throw SelfiesError(SelfiesError::Kind::EmptyMolecule, 0,
                       "no atom tokens in SELFIES");
  Decoder dec(tokens);
  std::size_t pos = 0;
  dec.derive(pos, tokens.size(), -1, 3);
  // an atom token can still be swallowed as an index symbol
  if (dec.graph.empty())
    throw SelfiesError(SelfiesError::Kind::EmptyMolecule, 0,
                       "derivation produced no atoms");
  dec.saturate();
  MolGraph g = std::move(dec.graph);
  for (const auto& t : tokens) g.provenance += t.raw;
  return g;
}

MolGraph decode_string(const std::string& text) {
  return decode(tokenize(text));
}

// ---------------------------------------------------------------------------
// Encoder: DFS spanning tree, branches for all but the last child, ring
// tokens for back edges. Emission order equals decode creation order, so
// ring offsets are plain position differences.

namespace {

std::string bond_prefix(int order) {
  if (order == 2) return "=";
  if (order == 3) return "#";
  return "";
}

std::string atom_token(const Atom& a, int bond_order) {
  std::string s = "[" + bond_prefix(bond_order) + a.element;
  s += a.stereo;
  if (a.charge > 0) s += "+" + std::to_string(a.charge);
  if (a.charge < 0) s += "-" + std::to_string(-a.charge);
  s += "]";
  return s;
}

std::vector<std::string> index_digits(int q) {
  std::vector<std::string> digits;
  if (q == 0) digits.push_back(kIndexAlphabet[0]);
  while (q > 0) {
    digits.insert(digits.begin(), kIndexAlphabet[q % 16]);
    q /= 16;
  }
  return digits;
}

struct Encoder {
  const MolGraph& g;
  std::vector<bool> visited;
  std::vector<bool> bond_done;
  std::vector<int> emit_index;  // atom -> position in emission order
  int emitted = 0;

  explicit Encoder(const MolGraph& graph)
      : g(graph),
        visited(graph.num_atoms(), false),
        bond_done(graph.num_bonds(), false),
        emit_index(graph.num_atoms(), -1) {}

  // Emits atom u (entered via bond of `in_order`) and its subtree.
  std::vector<std::string> emit(int u, int in_order) {
    std::vector<std::string> out;
    visited[u] = true;
    emit_index[u] = emitted++;
    out.push_back(atom_token(g.atoms[u], in_order));

    // ring closures to already-emitted atoms
    std::vector<std::pair<int, int>> closures;  // (neighbor, bond idx)
    std::vector<std::pair<int, int>> children;
    for (int bi = 0; bi < g.num_bonds(); ++bi) {
      if (bond_done[bi]) continue;
      const Bond& b = g.bonds[bi];
      int v = -1;
      if (b.a == u)
        v = b.b;
      else if (b.b == u)
        v = b.a;
      else
        continue;
      if (visited[v])
        closures.push_back({v, bi});
      else
        children.push_back({v, bi});
    }
    for (auto [v, bi] : closures) {
      bond_done[bi] = true;
      int offset = emit_index[u] - emit_index[v];
      auto digits = index_digits(offset - 1);
      out.push_back("[" + bond_prefix(g.bonds[bi].order) + "Ring" +
                    std::to_string(digits.size()) + "]");
      for (auto& d : digits) out.push_back(d);
    }
    // children: all but the last wrapped in a branch
    for (std::size_t k = 0; k < children.size(); ++k) {
      auto [v, bi] = children[k];
      if (visited[v] || bond_done[bi]) continue;
      bond_done[bi] = true;
      bool more_after = false;
      for (std::size_t m = k + 1; m < children.size(); ++m)
        if (!visited[children[m].first] && !bond_done[children[m].second])
          more_after = true;
      std::vector<std::string> body = emit(v, g.bonds[bi].order);
      if (more_after) {
        auto digits = index_digits(static_cast<int>(body.size()) - 1);
        out.push_back("[" + bond_prefix(g.bonds[bi].order) + "Branch" +
                      std::to_string(digits.size()) + "]");
        for (auto& d : digits) out.push_back(d);
      }
      out.insert(out.end(), body.begin(), body.end());
    }
    return out;
  }
};

}  // namespace

std::string encode(const MolGraph& g) {
  if (g.empty()) return "";
  Encoder enc(g);
  std::string out;
  for (int s = 0; s < g.num_atoms(); ++s) {
    if (enc.visited[s]) continue;
    auto toks = enc.emit(s, 1);
    for (auto& t : toks) out += t;
  }
  return out;
}

}  // namespace moltext
