#include "moltext/fingerprints.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "moltext/hash.hpp"

namespace moltext {

int Fingerprint::popcount() const {
  int n = 0;
  for (bool b : bits) n += b;
  return n;
}

namespace {

void set_hash_bit(Fingerprint& fp, const std::string& key) {
  fp.bits[fnv1a64(key) % fp.bits.size()] = true;
}

}  // namespace

Fingerprint circular_fp(const MolGraph& g, int radius, int nbits) {
  Fingerprint fp;
  fp.family = FpFamily::Circular;
  fp.bits.assign(nbits, false);
  int n = g.num_atoms();
  for (int a = 0; a < n; ++a) {
    // BFS distances from a
    std::vector<int> dist(n, -1);
    std::deque<int> q{a};
    dist[a] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      if (dist[u] >= radius) continue;
      for (int v : g.neighbors(u))
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push_back(v);
        }
    }
    for (int r = 0; r <= radius; ++r) {
      std::vector<int> shell;
      for (int i = 0; i < n; ++i)
        if (dist[i] >= 0 && dist[i] <= r) shell.push_back(i);
      // no radius tag: a saturated environment that stops growing maps to
      // the same bit at every larger radius
      MolGraph env = subgraph(g, shell, /*recompute_h=*/false);
      set_hash_bit(fp, "env:" + canonical_form(env));
    }
  }
  return fp;
}

Fingerprint path_fp(const MolGraph& g, int min_len, int max_len, int nbits) {
  Fingerprint fp;
  fp.family = FpFamily::Path;
  fp.bits.assign(nbits, false);

  std::set<std::string> paths;
  int n = g.num_atoms();
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int bi = 0; bi < g.num_bonds(); ++bi) {
    adj[g.bonds[bi].a].push_back({g.bonds[bi].b, bi});
    adj[g.bonds[bi].b].push_back({g.bonds[bi].a, bi});
  }

  auto atom_tag = [&](int i) {
    const Atom& a = g.atoms[i];
    std::string t = a.element;
    if (a.charge) t += (a.charge > 0 ? "+" : "") + std::to_string(a.charge);
    return t;
  };

  std::vector<int> path_atoms;
  std::vector<char> on_path(n, 0);
  std::string fwd, rev;

  std::function<void(int)> walk = [&](int u) {
    int len = static_cast<int>(path_atoms.size()) - 1;
    if (len >= min_len) {
      fwd.clear();
      rev.clear();
      for (std::size_t i = 0; i < path_atoms.size(); ++i) {
        if (i) {
          int bi = g.find_bond(path_atoms[i - 1], path_atoms[i]);
          fwd += '0' + g.bonds[bi].order;
        }
        fwd += atom_tag(path_atoms[i]);
      }
      for (std::size_t i = path_atoms.size(); i-- > 0;) {
        if (i + 1 < path_atoms.size()) {
          int bi = g.find_bond(path_atoms[i], path_atoms[i + 1]);
          rev += '0' + g.bonds[bi].order;
        }
        rev += atom_tag(path_atoms[i]);
      }
      paths.insert(std::min(fwd, rev));
    }
    if (len >= max_len) return;
    for (auto [v, bi] : adj[u]) {
      if (on_path[v]) continue;
      on_path[v] = 1;
      path_atoms.push_back(v);
      walk(v);
      path_atoms.pop_back();
      on_path[v] = 0;
    }
  };

  for (int a = 0; a < n; ++a) {
    on_path[a] = 1;
    path_atoms = {a};
    walk(a);
    on_path[a] = 0;
  }
  for (const auto& p : paths) set_hash_bit(fp, "path:" + p);
  return fp;
}

// ---------------------------------------------------------------------------
// Structural keys

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int count_element(const MolGraph& g, const std::string& el) {
  int c = 0;
  for (const Atom& a : g.atoms)
    if (a.element == el) ++c;
  if (el == "H") {
    for (const Atom& a : g.atoms) c += a.implicit_h;
  }
  return c;
}

bool is_halogen(const std::string& el) {
  return el == "F" || el == "Cl" || el == "Br" || el == "I";
}

bool is_hetero(const Atom& a) { return a.element != "C" && a.element != "H"; }

int bond_matches(const MolGraph& g, const std::string& ela, char op,
                 const std::string& elb) {
  int c = 0;
  for (const Bond& b : g.bonds) {
    const std::string& x = g.atoms[b.a].element;
    const std::string& y = g.atoms[b.b].element;
    bool pair = (x == ela && y == elb) || (x == elb && y == ela);
    if (ela == "X")  // hetero wildcard
      pair = (is_hetero(g.atoms[b.a]) && y == elb) ||
             (is_hetero(g.atoms[b.b]) && x == elb) ||
             (elb == "X" && is_hetero(g.atoms[b.a]) && is_hetero(g.atoms[b.b]));
    bool order_ok = false;
    switch (op) {
      case '-': order_ok = b.order == 1 && !b.in_aromatic_ring; break;
      case '=': order_ok = b.order == 2 && !b.in_aromatic_ring; break;
      case '#': order_ok = b.order == 3; break;
      case ':': order_ok = b.in_aromatic_ring; break;
      case '~': order_ok = true; break;
      default: break;
    }
    if (pair && order_ok) ++c;
  }
  return c;
}

bool ring_has_hetero(const MolGraph& g, const std::vector<int>& ring) {
  for (int a : ring)
    if (is_hetero(g.atoms[a])) return true;
  return false;
}

// longest simple carbon chain at least n atoms
bool carbon_path_at_least(const MolGraph& g, int n) {
  int na = g.num_atoms();
  std::vector<char> on_path(na, 0);
  int best = 0;
  std::function<void(int, int)> walk = [&](int u, int len) {
    best = std::max(best, len);
    if (best >= n) return;
    for (int v : g.neighbors(u)) {
      if (on_path[v] || g.atoms[v].element != "C") continue;
      on_path[v] = 1;
      walk(v, len + 1);
      on_path[v] = 0;
    }
  };
  for (int a = 0; a < na; ++a) {
    if (g.atoms[a].element != "C") continue;
    on_path[a] = 1;
    walk(a, 1);
    on_path[a] = 0;
    if (best >= n) return true;
  }
  return false;
}

}  // namespace

bool eval_key(const MolGraph& g, const RingInfo& rings,
              const std::string& pattern) {
  auto parts = split(pattern, ':');
  const std::string& kind = parts[0];

  if (kind == "elem") {
    return count_element(g, parts[1]) >= std::stoi(parts[2]);
  }
  if (kind == "bond" || kind == "count_bond") {
    // bond:C=O  /  count_bond:C=O:2
    const std::string& expr = parts[1];
    std::size_t oppos = expr.find_first_of("-=#~;");
    std::string ela = expr.substr(0, oppos);
    char op = expr[oppos] == ';' ? ':' : expr[oppos];  // ';' escapes ':'
    std::string elb = expr.substr(oppos + 1);
    int need = kind == "count_bond" ? std::stoi(parts[2]) : 1;
    return bond_matches(g, ela, op, elb) >= need;
  }
  if (kind == "hdeg") {
    int need = std::stoi(parts[2]);
    for (int i = 0; i < g.num_atoms(); ++i)
      if (g.atoms[i].element == parts[1] && g.atoms[i].implicit_h >= need)
        return true;
    return false;
  }
  if (kind == "deg") {
    int need = std::stoi(parts[2]);
    for (int i = 0; i < g.num_atoms(); ++i)
      if (g.atoms[i].element == parts[1] && g.heavy_degree(i) >= need)
        return true;
    return false;
  }
  if (kind == "count_deg") {
    int degree = std::stoi(parts[2]), need = std::stoi(parts[3]);
    int c = 0;
    for (int i = 0; i < g.num_atoms(); ++i)
      if (g.atoms[i].element == parts[1] && g.heavy_degree(i) >= degree) ++c;
    return c >= need;
  }
  if (kind == "count_hdeg") {
    int hs = std::stoi(parts[2]), need = std::stoi(parts[3]);
    int c = 0;
    for (int i = 0; i < g.num_atoms(); ++i)
      if (g.atoms[i].element == parts[1] && g.atoms[i].implicit_h >= hs) ++c;
    return c >= need;
  }
  if (kind == "ring") {
    int size = std::stoi(parts[1]);
    for (const auto& r : rings.rings)
      if (static_cast<int>(r.size()) == size) return true;
    return false;
  }
  if (kind == "ring_min") {
    int size = std::stoi(parts[1]);
    for (const auto& r : rings.rings)
      if (static_cast<int>(r.size()) >= size) return true;
    return false;
  }
  if (kind == "rings") return rings.num_rings >= std::stoi(parts[1]);
  if (kind == "ring_any") return rings.num_rings >= 1;
  if (kind == "arom_ring") return rings.num_aromatic_rings >= 1;
  if (kind == "arom_ring_size") {
    int size = std::stoi(parts[1]);
    for (std::size_t i = 0; i < rings.rings.size(); ++i)
      if (rings.ring_aromatic[i] &&
          static_cast<int>(rings.rings[i].size()) == size)
        return true;
    return false;
  }
  if (kind == "het_ring" || kind == "het_arom_ring" ||
      kind == "het_ring_size") {
    int size = parts.size() > 1 ? std::stoi(parts[1]) : -1;
    for (std::size_t i = 0; i < rings.rings.size(); ++i) {
      if (!ring_has_hetero(g, rings.rings[i])) continue;
      if (kind == "het_arom_ring" && !rings.ring_aromatic[i]) continue;
      if (size > 0 && static_cast<int>(rings.rings[i].size()) != size)
        continue;
      return true;
    }
    return false;
  }
  if (kind == "elem_in_ring" || kind == "elem_acyclic") {
    std::set<int> in_ring;
    for (const auto& r : rings.rings) in_ring.insert(r.begin(), r.end());
    for (int i = 0; i < g.num_atoms(); ++i) {
      if (g.atoms[i].element != parts[1]) continue;
      bool cyc = in_ring.count(i) > 0;
      if (kind == "elem_in_ring" ? cyc : !cyc) return true;
    }
    return false;
  }
  if (kind == "charge") {
    if (parts[1] == "pos") {
      for (const Atom& a : g.atoms)
        if (a.charge > 0) return true;
      return false;
    }
    if (parts[1] == "neg") {
      for (const Atom& a : g.atoms)
        if (a.charge < 0) return true;
      return false;
    }
    if (parts[1] == "any") {
      for (const Atom& a : g.atoms)
        if (a.charge != 0) return true;
      return false;
    }
    if (parts[1] == "net_pos") return g.net_charge() > 0;
    if (parts[1] == "net_neg") return g.net_charge() < 0;
  }
  if (kind == "elem_charge") {
    int sign = parts[2] == "pos" ? 1 : -1;
    for (const Atom& a : g.atoms)
      if (a.element == parts[1] && a.charge * sign > 0) return true;
    return false;
  }
  if (kind == "terminal") {
    for (int i = 0; i < g.num_atoms(); ++i) {
      bool el_ok = parts[1] == "X" ? is_halogen(g.atoms[i].element)
                                   : g.atoms[i].element == parts[1];
      if (el_ok && g.heavy_degree(i) <= 1) return true;
    }
    return false;
  }
  if (kind == "elem_pair") {
    if (parts[1] == "XX") {  // two distinct halogen elements
      std::set<std::string> seen;
      for (const Atom& a : g.atoms)
        if (is_halogen(a.element)) seen.insert(a.element);
      return seen.size() >= 2;
    }
    return count_element(g, parts[1]) >= 1 && count_element(g, parts[2]) >= 1;
  }
  if (kind == "halogen") {
    for (const Atom& a : g.atoms)
      if (is_halogen(a.element)) return true;
    return false;
  }
  if (kind == "double_bonds") {
    int c = 0;
    for (const Bond& b : g.bonds)
      if (b.order == 2) ++c;
    return c >= std::stoi(parts[1]);
  }
  if (kind == "triple_bond") {
    for (const Bond& b : g.bonds)
      if (b.order == 3) return true;
    return false;
  }
  if (kind == "arom_bond") {
    for (const Bond& b : g.bonds)
      if (b.in_aromatic_ring) return true;
    return false;
  }
  if (kind == "cumulated") {
    for (int i = 0; i < g.num_atoms(); ++i) {
      int doubles = 0;
      for (const Bond& b : g.bonds)
        if ((b.a == i || b.b == i) && b.order == 2) ++doubles;
      if (doubles >= 2) return true;
    }
    return false;
  }
  if (kind == "fused_rings") {
    for (std::size_t i = 0; i < rings.rings.size(); ++i)
      for (std::size_t j = i + 1; j < rings.rings.size(); ++j) {
        std::set<int> a(rings.rings[i].begin(), rings.rings[i].end());
        int shared = 0;
        for (int x : rings.rings[j]) shared += a.count(x);
        if (shared >= 2) return true;
      }
    return false;
  }
  if (kind == "cpath") return carbon_path_at_least(g, std::stoi(parts[1]));
  if (kind == "isolated_atom") {
    for (int i = 0; i < g.num_atoms(); ++i)
      if (g.heavy_degree(i) == 0) return true;
    return false;
  }
  return false;
}

std::vector<KeyDef> load_key_defs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open key file: " + path);
  std::vector<KeyDef> defs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2) continue;
    KeyDef d;
    d.id = std::stoi(cols[0]);
    d.pattern = cols[1];
    d.description = cols.size() > 2 ? cols[2] : "";
    defs.push_back(d);
  }
  return defs;
}

const std::vector<KeyDef>& default_key_defs() {
  static const std::vector<KeyDef> defs =
      load_key_defs(std::string(MOLTEXT_DATA_DIR) + "/structural_keys.tsv");
  return defs;
}

Fingerprint key_fp(const MolGraph& g) {
  const auto& defs = default_key_defs();
  Fingerprint fp;
  fp.family = FpFamily::Keys;
  fp.bits.assign(defs.size(), false);
  if (g.empty()) return fp;
  MolGraph copy = g;
  RingInfo rings = perceive(copy);
  for (std::size_t i = 0; i < defs.size(); ++i)
    fp.bits[i] = eval_key(copy, rings, defs[i].pattern);
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.family != b.family || a.nbits() != b.nbits())
    throw FamilyMismatch("tanimoto: fingerprint family/size mismatch");
  int both = 0, any = 0;
  for (int i = 0; i < a.nbits(); ++i) {
    if (a.bits[i] && b.bits[i]) ++both;
    if (a.bits[i] || b.bits[i]) ++any;
  }
  if (any == 0) return 1.0;  // both all-zero
  return static_cast<double>(both) / any;
}

double fp_sim(const MolGraph& pred, const MolGraph& ref) {
  double s = tanimoto(circular_fp(pred), circular_fp(ref)) +
             tanimoto(path_fp(pred), path_fp(ref)) +
             tanimoto(key_fp(pred), key_fp(ref));
  return s / 3.0;
}

}  // namespace moltext
