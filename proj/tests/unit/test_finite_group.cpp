#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#include "doctest.h"
#include "robust_t/error.hpp"
#include "robust_t/finite_group.hpp"

using namespace robust_t;

namespace {

using Mat3 = std::array<std::uint32_t, 9>;

Mat3 heis_matrix(std::uint32_t q, Element e) {
  const std::uint32_t a = e / (q * q), b = (e / q) % q, c = e % q;
  return {1, a, c, 0, 1, b, 0, 0, 1};
}

Mat3 matmul(const Mat3& x, const Mat3& y, std::uint32_t q) {
  Mat3 z{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      std::uint32_t s = 0;
      for (int k = 0; k < 3; ++k) s += x[i * 3 + k] * y[k * 3 + j];
      z[i * 3 + j] = s % q;
    }
  return z;
}

std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("Heisenberg table matches 3x3 unitriangular matrix products") {
  for (std::uint32_t q : {2u, 3u, 5u}) {
    const auto g = build_heisenberg(q);
    REQUIRE(g->order() == q * q * q);
    for (Element a = 0; a < g->order(); ++a)
      for (Element b = 0; b < g->order(); ++b)
        CHECK(heis_matrix(q, g->mul(a, b)) == matmul(heis_matrix(q, a), heis_matrix(q, b), q));
    CHECK(g->element_order(g->generator("x")) == q);
    CHECK(g->element_order(g->generator("y")) == q);
  }
}

TEST_CASE("Heisenberg commutator of x and y is central and nontrivial") {
  const auto g = build_heisenberg(5);
  const Element x = g->generator("x"), y = g->generator("y");
  const Element z = g->mul(g->mul(x, y), g->mul(g->inv(x), g->inv(y)));
  CHECK(z != g->identity());
  for (Element a = 0; a < g->order(); ++a) CHECK(g->mul(a, z) == g->mul(z, a));
}

TEST_CASE("elementary abelian pair is commutative of order q^2") {
  const auto g = build_elementary_abelian_pair(3);
  CHECK(g->order() == 9);
  for (Element a = 0; a < 9; ++a)
    for (Element b = 0; b < 9; ++b) CHECK(g->mul(a, b) == g->mul(b, a));
}

TEST_CASE("symmetric and dihedral orders") {
  for (std::size_t n = 2; n <= 5; ++n) CHECK(build_symmetric(n)->order() == factorial(n));
  for (std::size_t n = 3; n <= 8; ++n) {
    const auto d = build_dihedral(n);
    CHECK(d->order() == 2 * n);
    CHECK(d->element_order(d->generator("r")) == n);
    CHECK(d->element_order(d->generator("s")) == 2);
    CHECK(d->element_order(d->generator("t")) == 2);
  }
}

TEST_CASE("every built table is associative") {
  for (const auto& g : {build_heisenberg(3), build_heisenberg(7), build_symmetric(4), build_dihedral(6),
                        build_elementary_abelian_pair(5)})
    CHECK(g->is_associative());
  // Above 512 elements the check samples 10^5 triples.
  CHECK(build_symmetric(6)->is_associative(7, 100000));
}

TEST_CASE("invalid tables are rejected") {
  CHECK_THROWS_AS(GroupTable(0, {}), Error);
  CHECK_THROWS_AS(GroupTable(2, {0, 1, 1, 1}), Error);
  CHECK_THROWS_AS(GroupTable(2, {1, 0, 0, 1}), Error);  // identity not at 0
  CHECK_THROWS_AS(build_heisenberg(4), Error);
  CHECK_THROWS_AS(build_symmetric(9), Error);
  CHECK_THROWS_AS(build_dihedral(2), Error);
  // Latin square that is not associative (a loop of order 5).
  const std::vector<Element> loop{0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 4, 0, 1, 3, 3, 2, 4, 0, 1, 4, 3, 1, 2, 0};
  CHECK_THROWS_AS(GroupTable(5, loop), Error);
}

TEST_CASE("closure is idempotent and cosets tile the group") {
  const auto g = build_symmetric(4);
  const Subgroup h = closure(g, {g->generator("s1"), g->generator("s3")});
  CHECK(h.size() == 4);
  CHECK(closure(g, h.elements()) == h);
  for (const auto& sub : {h, closure(g, {g->generator("s1"), g->generator("s2")}), closure(g, {g->identity()})}) {
    const RightCosetPartition part = right_cosets(sub);
    CHECK(part.cosets.size() * sub.size() == g->order());
    std::set<Element> seen;
    for (const auto& c : part.cosets) {
      CHECK(c.size() == sub.size());
      seen.insert(c.begin(), c.end());
      // K g: multiplying on the left by K stays inside the coset.
      for (Element k : sub.elements()) CHECK(std::binary_search(c.begin(), c.end(), g->mul(k, c.front())));
    }
    CHECK(seen.size() == g->order());
  }
}

TEST_CASE("intersection of subgroups") {
  const auto g = build_heisenberg(3);
  const auto pair = generated_pair(g, {"x"}, {"y"});
  CHECK(intersection(pair.k1, pair.k2).size() == 1);
  CHECK(intersection(pair.k1, pair.k1) == pair.k1);
  CHECK_THROWS_AS(Subgroup(g, {1}), Error);  // no identity
}

TEST_CASE("group JSON round trip keeps the fingerprint") {
  const auto g = build_dihedral(5);
  const GroupTable back = GroupTable::from_json(g->to_json());
  CHECK(back.fingerprint() == g->fingerprint());
  CHECK(back.generator("r") == g->generator("r"));
  CHECK_THROWS_AS(GroupTable::from_json(nlohmann::json{{"order", 2}}), Error);
}

TEST_CASE("is_prime") {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t n = 0; n < 60; ++n)
    if (is_prime(n)) primes.push_back(n);
  CHECK(primes == std::vector<std::uint64_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59});
  CHECK(is_prime(1031));
  CHECK_FALSE(is_prime(1033 * 1031ULL));
}
