#include "moltext/fragments.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace moltext {

namespace {

constexpr double kEps = 1e-5;

bool is_hetero(const Atom& a) { return a.element != "C" && a.element != "H"; }

// CH carbons group with adjacent carbons of the same local type.
struct CarbonType {
  int implicit_h;
  int heavy_degree;
  bool in_ring;
  bool unsaturated;
  bool operator==(const CarbonType&) const = default;
};

}  // namespace

FragmentSet decompose(const MolGraph& g) {
  FragmentSet fs;
  if (g.empty()) return fs;

  MolGraph mol = g;
  RingInfo rings = perceive(mol);
  int n = mol.num_atoms();

  // aromatic heteroatom rings become single fragments
  std::vector<int> arom_het_ring(n, -1);
  int ring_frag = 0;
  for (std::size_t r = 0; r < rings.rings.size(); ++r) {
    if (!rings.ring_aromatic[r]) continue;
    bool het = false;
    for (int a : rings.rings[r]) het |= is_hetero(mol.atoms[a]);
    if (!het) continue;
    for (int a : rings.rings[r])
      if (arom_het_ring[a] < 0) arom_het_ring[a] = ring_frag;
    ++ring_frag;
  }

  std::vector<bool> functional(n, false);
  for (int i = 0; i < n; ++i) {
    if (is_hetero(mol.atoms[i]) || arom_het_ring[i] >= 0) {
      functional[i] = true;
      continue;
    }
    for (const Bond& b : mol.bonds) {
      if (b.order < 2) continue;
      int other = -1;
      if (b.a == i)
        other = b.b;
      else if (b.b == i)
        other = b.a;
      else
        continue;
      if (is_hetero(mol.atoms[other])) functional[i] = true;
    }
  }

  auto add_fg = [&](const std::vector<int>& atoms) {
    std::string id = canonical_form(subgraph(mol, atoms, /*recompute_h=*/true));
    fs.fragments.insert(id);
    fs.fg_counts[id] += 1;
  };

  // ring fragments first
  for (int rf = 0; rf < ring_frag; ++rf) {
    std::vector<int> atoms;
    for (int i = 0; i < n; ++i)
      if (arom_het_ring[i] == rf) atoms.push_back(i);
    add_fg(atoms);
  }

  // remaining functional components (heteroaromatic ring atoms excluded)
  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    if (seen[s] || !functional[s] || arom_het_ring[s] >= 0) continue;
    std::vector<int> comp;
    std::deque<int> q{s};
    seen[s] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      comp.push_back(u);
      for (int v : mol.neighbors(u)) {
        if (seen[v] || !functional[v] || arom_het_ring[v] >= 0) continue;
        seen[v] = true;
        q.push_back(v);
      }
    }
    add_fg(comp);
  }

  // CH-only skeleton: group adjacent carbons of equal local type
  std::vector<bool> in_ring(n, false);
  for (const auto& r : rings.rings)
    for (int a : r) in_ring[a] = true;
  auto ctype = [&](int i) {
    bool unsat = false;
    for (const Bond& b : mol.bonds)
      if ((b.a == i || b.b == i) && b.order >= 2) unsat = true;
    return CarbonType{mol.atoms[i].implicit_h, mol.heavy_degree(i), in_ring[i],
                      unsat};
  };

  std::vector<bool> done(n, false);
  for (int s = 0; s < n; ++s) {
    if (done[s] || functional[s] || mol.atoms[s].element != "C") continue;
    CarbonType t = ctype(s);
    std::vector<int> comp;
    std::deque<int> q{s};
    done[s] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      comp.push_back(u);
      for (int v : mol.neighbors(u)) {
        if (done[v] || functional[v] || mol.atoms[v].element != "C") continue;
        if (!(ctype(v) == t)) continue;
        done[v] = true;
        q.push_back(v);
      }
    }
    std::ostringstream id;
    id << "CH:n" << comp.size() << ":h" << t.implicit_h << ":d"
       << t.heavy_degree << (t.in_ring ? ":r" : ":a")
       << (t.unsaturated ? ":u" : ":s");
    fs.fragments.insert(id.str());
    fs.ch_only.insert(id.str());
  }
  return fs;
}

std::pair<double, double> frag_metrics(const FragmentSet& pred,
                                       const FragmentSet& ref) {
  if (ref.fragments.empty()) {
    double v = pred.fragments.empty() ? 1.0 : 0.0;
    return {v, v};
  }
  int inter = 0;
  for (const auto& f : pred.fragments) inter += ref.fragments.count(f);
  int uni = static_cast<int>(pred.fragments.size() + ref.fragments.size()) -
            inter;
  double jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
  double recall = static_cast<double>(inter) / ref.fragments.size();
  return {jaccard, recall};
}

double frag_sim(const FragmentSet& pred, const FragmentSet& ref) {
  auto [j, r] = frag_metrics(pred, ref);
  return 0.5 * j + 0.5 * r;
}

double fg_match(const FragmentSet& pred, const FragmentSet& ref) {
  double diff = 0.0, total = 0.0;
  std::set<std::string> keys;
  for (const auto& [k, v] : pred.fg_counts) keys.insert(k);
  for (const auto& [k, v] : ref.fg_counts) keys.insert(k);
  for (const auto& k : keys) {
    auto p = pred.fg_counts.find(k);
    auto r = ref.fg_counts.find(k);
    int cp = p == pred.fg_counts.end() ? 0 : p->second;
    int cr = r == ref.fg_counts.end() ? 0 : r->second;
    diff += std::abs(cp - cr);
    total += cr;
  }
  return std::exp(-diff / (total + kEps));
}

std::string dump_fragments(const FragmentSet& fs) {
  std::ostringstream out;
  for (const auto& [id, count] : fs.fg_counts)
    out << "FG\t" << id << "\t" << count << "\n";
  for (const auto& id : fs.ch_only) out << "CH\t" << id << "\t1\n";
  return out.str();
}

}  // namespace moltext
