#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "moltext/fingerprints.hpp"
#include "moltext/selfies.hpp"

using namespace moltext;

namespace {

const char* kDisulfideAnion =
    "[O][=C][Branch1][C][O-1][C][C][S][S][C][Ring1][Branch1]";
const char* kThiopheneAldehyde = "[O][=C][C][=C][C][=C][S][Ring1][Branch1]";

MolGraph permuted(const MolGraph& g, std::mt19937_64& rng) {
  std::vector<int> perm(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  MolGraph out;
  out.atoms.resize(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i) out.atoms[perm[i]] = g.atoms[i];
  for (const Bond& b : g.bonds) {
    Bond nb = b;
    nb.a = perm[b.a];
    nb.b = perm[b.b];
    out.bonds.push_back(nb);
  }
  return out;
}

Fingerprint from_bits(FpFamily fam, int nbits, std::vector<int> set_bits) {
  Fingerprint fp;
  fp.family = fam;
  fp.bits.assign(nbits, false);
  for (int b : set_bits) fp.bits[b] = true;
  return fp;
}

}  // namespace

TEST_CASE("methane has exactly one circular environment") {
  MolGraph methane = decode_string("[C]");
  Fingerprint fp = circular_fp(methane);
  CHECK(fp.nbits() == 2048);
  CHECK(fp.popcount() == 1);
}

TEST_CASE("circular fingerprints are deterministic and permutation invariant") {
  MolGraph g = decode_string(kDisulfideAnion);
  Fingerprint a = circular_fp(g);
  Fingerprint b = circular_fp(g);
  CHECK(a.bits == b.bits);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    MolGraph p = permuted(g, rng);
    CHECK(circular_fp(p).bits == a.bits);
  }
}

TEST_CASE("single bond gives one path bit, propane gives two") {
  MolGraph ethane = decode_string("[C][C]");
  CHECK(path_fp(ethane).popcount() == 1);
  MolGraph propane = decode_string("[C][C][C]");
  // paths: C-C (twice, identical) and C-C-C
  CHECK(path_fp(propane).popcount() == 2);
}

TEST_CASE("path fingerprint is invariant under atom reordering") {
  MolGraph benzene = decode_string("[C][=C][C][=C][C][=C][Ring1][=Branch1]");
  Fingerprint base = path_fp(benzene);
  CHECK(base.popcount() > 0);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial)
    CHECK(path_fp(permuted(benzene, rng)).bits == base.bits);
}

TEST_CASE("key fingerprint uses the 166 shipped predicates") {
  const auto& defs = default_key_defs();
  CHECK(defs.size() == 166);
  // ids unique and within range
  std::set<int> ids;
  for (const KeyDef& d : defs) {
    CHECK(d.id >= 1);
    CHECK(d.id <= 166);
    CHECK(!d.pattern.empty());
    ids.insert(d.id);
  }
  CHECK(ids.size() == 166);

  MolGraph methane = decode_string("[C]");
  CHECK(key_fp(methane).nbits() == 166);
}

TEST_CASE("structural keys flag the expected features of the disulfide anion") {
  MolGraph g = decode_string(kDisulfideAnion);
  Fingerprint fp = key_fp(g);
  const auto& defs = default_key_defs();
  auto bit_for = [&](const std::string& pattern) -> bool {
    for (std::size_t i = 0; i < defs.size(); ++i)
      if (defs[i].pattern == pattern) return fp.bits[i];
    FAIL("pattern not shipped: " << pattern);
    return false;
  };
  CHECK(bit_for("bond:S-S"));               // disulfide bridge
  CHECK(bit_for("elem_charge:O:neg"));      // carboxylate oxygen
  CHECK_FALSE(bit_for("arom_ring"));        // saturated ring only
  CHECK(bit_for("ring:5"));

  MolGraph methane = decode_string("[C]");
  Fingerprint mfp = key_fp(methane);
  for (std::size_t i = 0; i < defs.size(); ++i)
    if (defs[i].pattern.rfind("elem:S", 0) == 0) CHECK_FALSE(mfp.bits[i]);
}

TEST_CASE("tanimoto set arithmetic") {
  auto a = from_bits(FpFamily::Circular, 16, {1, 2, 3});
  auto b = from_bits(FpFamily::Circular, 16, {2, 3, 4});
  CHECK(tanimoto(a, b) == doctest::Approx(0.5));
  CHECK(tanimoto(a, a) == doctest::Approx(1.0));
  CHECK(tanimoto(b, a) == doctest::Approx(0.5));

  auto disjoint = from_bits(FpFamily::Circular, 16, {8, 9});
  CHECK(tanimoto(a, disjoint) == doctest::Approx(0.0));

  auto zero = from_bits(FpFamily::Circular, 16, {});
  CHECK(tanimoto(zero, zero) == doctest::Approx(1.0));
  CHECK(tanimoto(a, zero) == doctest::Approx(0.0));

  auto other_family = from_bits(FpFamily::Path, 16, {1});
  CHECK_THROWS_AS(tanimoto(a, other_family), FamilyMismatch);
  auto other_size = from_bits(FpFamily::Circular, 8, {1});
  CHECK_THROWS_AS(tanimoto(a, other_size), FamilyMismatch);
}

TEST_CASE("tanimoto is symmetric and bounded on random bitsets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Fingerprint a, b;
    a.bits.resize(64);
    b.bits.resize(64);
    for (int i = 0; i < 64; ++i) {
      a.bits[i] = rng() & 1;
      b.bits[i] = rng() & 1;
    }
    double s = tanimoto(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == doctest::Approx(tanimoto(b, a)));
  }
}

TEST_CASE("fp_sim is reflexive-1 on corpus molecules") {
  const char* corpus[] = {
      "[C]", "[C][O]", kDisulfideAnion, kThiopheneAldehyde,
      "[C][=C][C][=C][C][=C][Ring1][=Branch1]",
      "[N][C][=Branch1][C][=O][O]"};
  for (const char* s : corpus) {
    MolGraph g = decode_string(s);
    CHECK(fp_sim(g, g) == doctest::Approx(1.0));
  }
}

TEST_CASE("fp_sim orders near and far molecules sensibly") {
  MolGraph aldehyde = decode_string(kThiopheneAldehyde);
  MolGraph thiophene = decode_string("[C][=C][C][=C][S][Ring1][Branch1]");
  MolGraph methane = decode_string("[C]");
  double near = fp_sim(aldehyde, thiophene);
  double far = fp_sim(aldehyde, methane);
  CHECK(near > 0.0);
  CHECK(near < 1.0);
  CHECK(near > far);
}
