#include "moltext/molgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace moltext {

namespace {

struct ElementData {
  const char* symbol;
  double mass;
  int base_valence;
};

// IUPAC standard atomic weights, 3 decimals.
constexpr ElementData kElements[] = {
    {"H", 1.008, 1},   {"B", 10.811, 3},  {"C", 12.011, 4},
    {"N", 14.007, 3},  {"O", 15.999, 2},  {"F", 18.998, 1},
    {"P", 30.974, 3},  {"S", 32.060, 2},  {"Cl", 35.453, 1},
    {"Br", 79.904, 1}, {"I", 126.904, 1},
};

const ElementData* lookup(const std::string& el) {
  for (const auto& e : kElements)
    if (el == e.symbol) return &e;
  return nullptr;
}

}  // namespace

int MolGraph::find_bond(int a, int b) const {
  for (int i = 0; i < num_bonds(); ++i) {
    const Bond& bd = bonds[i];
    if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) return i;
  }
  return -1;
}

int MolGraph::bond_order_sum(int i) const {
  int s = 0;
  for (const Bond& bd : bonds)
    if (bd.a == i || bd.b == i) s += bd.order;
  return s;
}

int MolGraph::heavy_degree(int i) const {
  int d = 0;
  for (const Bond& bd : bonds)
    if (bd.a == i || bd.b == i) ++d;
  return d;
}

std::vector<int> MolGraph::neighbors(int i) const {
  std::vector<int> out;
  for (const Bond& bd : bonds) {
    if (bd.a == i) out.push_back(bd.b);
    if (bd.b == i) out.push_back(bd.a);
  }
  return out;
}

int MolGraph::net_charge() const {
  int q = 0;
  for (const Atom& a : atoms) q += a.charge;
  return q;
}

bool is_supported_element(const std::string& element) {
  return lookup(element) != nullptr;
}

std::vector<int> allowed_valences(const std::string& element, int charge) {
  const ElementData* e = lookup(element);
  if (!e || charge < -2 || charge > 2) return {};
  const std::string& el = element;
  if (charge == 0) {
    if (el == "S") return {2, 4, 6};
    if (el == "P") return {3, 5};
    return {e->base_valence};
  }
  // Charge shifts: N/P/O/S gain capacity when positive, boron gains when
  // negative (borate), everything else loses |charge|.
  int base = e->base_valence;
  int v;
  if (charge > 0) {
    if (el == "N" || el == "P" || el == "O" || el == "S")
      v = base + charge;
    else
      v = base - charge;
  } else {
    if (el == "B")
      v = base - charge;  // charge negative: base + |charge|
    else
      v = base + charge;
  }
  if (v < 0) v = 0;
  if (el == "S" && charge == 0) return {2, 4, 6};
  if (el == "S" && v >= 2) return {v, v + 2, v + 4};
  return {v};
}

int max_allowed_valence(const std::string& element, int charge) {
  auto vs = allowed_valences(element, charge);
  if (vs.empty()) return 0;
  return vs.back();
}

double atomic_mass(const std::string& element) {
  const ElementData* e = lookup(element);
  return e ? e->mass : 0.0;
}

double molecular_weight(const MolGraph& g) {
  double w = 0.0;
  for (const Atom& a : g.atoms)
    w += atomic_mass(a.element) + a.implicit_h * atomic_mass("H");
  return w;
}

int connected_components(const MolGraph& g) {
  int n = g.num_atoms();
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::deque<int> q{s};
    comp[s] = ncomp;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : g.neighbors(u))
        if (comp[v] < 0) {
          comp[v] = ncomp;
          q.push_back(v);
        }
    }
    ++ncomp;
  }
  return ncomp;
}

namespace {

// Shortest cycle through a non-tree edge: BFS between its endpoints with
// the edge removed.
std::vector<int> smallest_cycle_through(const MolGraph& g, int skip_bond) {
  int u = g.bonds[skip_bond].a, v = g.bonds[skip_bond].b;
  int n = g.num_atoms();
  std::vector<int> prev(n, -2);
  std::deque<int> q{u};
  prev[u] = -1;
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    if (x == v) break;
    for (int bi = 0; bi < g.num_bonds(); ++bi) {
      if (bi == skip_bond) continue;
      const Bond& bd = g.bonds[bi];
      int y = -1;
      if (bd.a == x)
        y = bd.b;
      else if (bd.b == x)
        y = bd.a;
      else
        continue;
      if (prev[y] == -2) {
        prev[y] = x;
        q.push_back(y);
      }
    }
  }
  if (prev[v] == -2) return {};
  std::vector<int> cycle;
  for (int x = v; x != -1; x = prev[x]) cycle.push_back(x);
  return cycle;
}

bool has_exocyclic_multiple_bond(const MolGraph& g, int atom,
                                 const std::set<int>& ring) {
  for (const Bond& bd : g.bonds) {
    if (bd.order < 2) continue;
    int other = -1;
    if (bd.a == atom)
      other = bd.b;
    else if (bd.b == atom)
      other = bd.a;
    else
      continue;
    if (!ring.count(other)) return true;
  }
  return false;
}

// 4n+2 test with the usual per-atom contributions: atoms in an in-ring
// double bond give 1 pi electron each, saturated N/O/S give a lone pair
// (2), carbons with only an exocyclic double bond give 0 and stay sp2.
bool ring_is_aromatic(const MolGraph& g, const std::vector<int>& cycle) {
  std::set<int> ring(cycle.begin(), cycle.end());
  int pi = 0;
  for (int a : cycle) {
    const std::string& el = g.atoms[a].element;
    if (el != "C" && el != "N" && el != "O" && el != "S") return false;
    bool in_ring_double = false;
    for (const Bond& bd : g.bonds) {
      if (bd.a != a && bd.b != a) continue;
      int other = bd.a == a ? bd.b : bd.a;
      if (bd.order == 3) return false;
      if (bd.order == 2 && ring.count(other)) in_ring_double = true;
    }
    if (in_ring_double) {
      pi += 1;
    } else if (el == "N" || el == "O" || el == "S") {
      pi += 2;
    } else if (has_exocyclic_multiple_bond(g, a, ring)) {
      pi += 0;
    } else {
      return false;  // saturated carbon breaks conjugation
    }
  }
  return pi >= 2 && (pi - 2) % 4 == 0;
}

}  // namespace

RingInfo ring_info(const MolGraph& g) {
  RingInfo info;
  int ncomp = connected_components(g);
  info.num_rings = g.num_bonds() - g.num_atoms() + ncomp;

  // Spanning forest; each non-tree edge yields its smallest cycle.
  int n = g.num_atoms();
  std::vector<bool> visited(n, false);
  std::vector<bool> tree_bond(g.num_bonds(), false);
  for (int s = 0; s < n; ++s) {
    if (visited[s]) continue;
    std::deque<int> q{s};
    visited[s] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int bi = 0; bi < g.num_bonds(); ++bi) {
        const Bond& bd = g.bonds[bi];
        int v = -1;
        if (bd.a == u)
          v = bd.b;
        else if (bd.b == u)
          v = bd.a;
        else
          continue;
        if (!visited[v]) {
          visited[v] = true;
          tree_bond[bi] = true;
          q.push_back(v);
        }
      }
    }
  }
  std::set<std::set<int>> seen;
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    if (tree_bond[bi]) continue;
    std::vector<int> cycle = smallest_cycle_through(g, bi);
    if (cycle.empty()) continue;
    std::set<int> key(cycle.begin(), cycle.end());
    if (!seen.insert(key).second) continue;
    info.ring_aromatic.push_back(ring_is_aromatic(g, cycle));
    info.rings.push_back(std::move(cycle));
  }
  for (bool a : info.ring_aromatic)
    if (a) ++info.num_aromatic_rings;
  return info;
}

RingInfo perceive(MolGraph& g) {
  for (Atom& a : g.atoms) a.aromatic = false;
  for (Bond& b : g.bonds) b.in_aromatic_ring = false;
  RingInfo info = ring_info(g);
  for (std::size_t r = 0; r < info.rings.size(); ++r) {
    if (!info.ring_aromatic[r]) continue;
    std::set<int> ring(info.rings[r].begin(), info.rings[r].end());
    for (int a : ring) g.atoms[a].aromatic = true;
    for (Bond& b : g.bonds)
      if (ring.count(b.a) && ring.count(b.b)) b.in_aromatic_ring = true;
  }
  return info;
}

StructuralInfo structural_info(const MolGraph& g) {
  MolGraph copy = g;
  RingInfo ri = perceive(copy);
  StructuralInfo info;
  info.num_rings = ri.num_rings;
  info.num_aromatic_rings = ri.num_aromatic_rings;
  info.molecular_weight = molecular_weight(g);
  return info;
}

std::string render_ring_sentence(const StructuralInfo& info) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "The molecule has %d ring(s), including %d aromatic ring(s).",
                info.num_rings, info.num_aromatic_rings);
  return buf;
}

std::string render_weight_sentence(const StructuralInfo& info) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "The molecular weight is approximately %.2f g/mol.",
                info.molecular_weight);
  return buf;
}

// ---------------------------------------------------------------------------
// Canonicalization: Weisfeiler-Lehman refinement to a stable partition,
// then exhaustive tie-splitting with a lexicographically smallest DFS
// serialization. Exponential only in the size of residual symmetry
// classes, which stays tiny for molecules at this scale.

namespace {

struct CanonCtx {
  const MolGraph* g;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, bondidx)
};

char bond_char(const Bond& b) {
  if (b.in_aromatic_ring) return ':';
  switch (b.order) {
    case 2: return '=';
    case 3: return '#';
    default: return '-';
  }
}

std::string atom_label(const Atom& a) {
  std::string s = a.element;
  if (a.aromatic) s += "ar";
  if (a.charge > 0) s += "+" + std::to_string(a.charge);
  if (a.charge < 0) s += std::to_string(a.charge);
  s += "H" + std::to_string(a.implicit_h);
  return s;
}

std::vector<int> refine(const CanonCtx& ctx, std::vector<int> cls) {
  int n = static_cast<int>(cls.size());
  for (int iter = 0; iter < n + 2; ++iter) {
    std::vector<std::string> sig(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> nb;
      for (auto [j, bi] : ctx.adj[i]) {
        nb.push_back(std::string(1, bond_char(ctx.g->bonds[bi])) +
                     std::to_string(cls[j]));
      }
      std::sort(nb.begin(), nb.end());
      sig[i] = std::to_string(cls[i]) + "|";
      for (const auto& s : nb) sig[i] += s + ",";
    }
    std::vector<std::string> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> next(n);
    for (int i = 0; i < n; ++i)
      next[i] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), sig[i]) -
          sorted.begin());
    if (next == cls) break;
    cls = next;
  }
  return cls;
}

// Serialization under a discrete partition: atoms in class order, then
// the edge list keyed by class indices. Injective, so equal strings mean
// isomorphic graphs.
std::string serialize_discrete(const CanonCtx& ctx,
                               const std::vector<int>& cls) {
  int n = static_cast<int>(cls.size());
  const MolGraph& g = *ctx.g;
  std::vector<int> atom_of_class(n);
  for (int i = 0; i < n; ++i) atom_of_class[cls[i]] = i;

  std::string out;
  for (int c = 0; c < n; ++c) {
    out += atom_label(g.atoms[atom_of_class[c]]);
    out += ";";
  }
  std::vector<std::string> edges;
  for (const Bond& b : g.bonds) {
    int ca = cls[b.a], cb = cls[b.b];
    if (ca > cb) std::swap(ca, cb);
    edges.push_back(std::to_string(ca) + bond_char(b) + std::to_string(cb));
  }
  std::sort(edges.begin(), edges.end());
  out += "|";
  for (const auto& e : edges) out += e + ",";
  return out;
}

std::string canon_rec(const CanonCtx& ctx, std::vector<int> cls, int depth) {
  cls = refine(ctx, cls);
  int n = static_cast<int>(cls.size());
  std::vector<int> count(n, 0);
  for (int c : cls) ++count[c];
  int tie_class = -1;
  for (int c = 0; c < n; ++c)
    if (count[c] > 1) {
      tie_class = c;
      break;
    }
  // Every split strictly refines the partition, so depth is bounded by n.
  if (tie_class < 0) return serialize_discrete(ctx, cls);
  (void)depth;

  std::string best;
  for (int i = 0; i < n; ++i) {
    if (cls[i] != tie_class) continue;
    std::vector<int> split = cls;
    for (int j = 0; j < n; ++j)
      if (split[j] >= tie_class && j != i) split[j] += 1;
    std::string s = canon_rec(ctx, split, depth + 1);
    if (best.empty() || s < best) best = s;
  }
  return best;
}

}  // namespace

std::string canonical_form(const MolGraph& g) {
  if (g.empty()) return "";
  MolGraph copy = g;
  perceive(copy);
  CanonCtx ctx;
  ctx.g = &copy;
  ctx.adj.resize(copy.num_atoms());
  for (int bi = 0; bi < copy.num_bonds(); ++bi) {
    ctx.adj[copy.bonds[bi].a].push_back({copy.bonds[bi].b, bi});
    ctx.adj[copy.bonds[bi].b].push_back({copy.bonds[bi].a, bi});
  }
  // initial classes from atom labels + degree
  std::vector<std::string> labels(copy.num_atoms());
  for (int i = 0; i < copy.num_atoms(); ++i)
    labels[i] =
        atom_label(copy.atoms[i]) + "/" + std::to_string(copy.heavy_degree(i));
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> cls(copy.num_atoms());
  for (int i = 0; i < copy.num_atoms(); ++i)
    cls[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), labels[i]) -
        sorted.begin());
  return canon_rec(ctx, cls, 0);
}

bool exact_match(const MolGraph& a, const MolGraph& b) {
  return canonical_form(a) == canonical_form(b);
}

MolGraph subgraph(const MolGraph& g, const std::vector<int>& atom_ids,
                  bool recompute_h) {
  MolGraph out;
  std::unordered_map<int, int> remap;
  for (int id : atom_ids) {
    remap[id] = out.num_atoms();
    out.atoms.push_back(g.atoms[id]);
  }
  for (const Bond& b : g.bonds) {
    auto ia = remap.find(b.a), ib = remap.find(b.b);
    if (ia == remap.end() || ib == remap.end()) continue;
    Bond nb = b;
    nb.a = ia->second;
    nb.b = ib->second;
    nb.in_aromatic_ring = false;
    out.bonds.push_back(nb);
  }
  if (recompute_h) {
    for (int i = 0; i < out.num_atoms(); ++i) {
      Atom& a = out.atoms[i];
      int used = out.bond_order_sum(i);
      a.implicit_h = 0;
      for (int v : allowed_valences(a.element, a.charge)) {
        if (v >= used) {
          a.implicit_h = v - used;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace moltext
