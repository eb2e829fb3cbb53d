#include <cmath>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "robust_t/error.hpp"
#include "robust_t/expander_forge.hpp"
#include "robust_t/random.hpp"

using namespace robust_t;

TEST_CASE("truncated polynomial rings") {
  for (const auto& [q, k] : std::vector<std::pair<std::uint32_t, std::size_t>>{{2, 1}, {2, 3}, {3, 2}, {5, 4}, {251, 2}})
    CHECK(PolyRing(q, k).check_axioms(q * 31 + k, 500));
  const PolyRing r(3, 3);
  CHECK(r.size() == 27);
  const auto t = r.monomial(1, 1);
  CHECK(r.mul(t, r.mul(t, t)) == r.zero());  // t^3 = 0
  CHECK(r.to_string(r.add(r.one(), r.monomial(2, 1))) == "1+2t");
  CHECK(r.to_string(r.mul(t, t)) == "t^2");
  CHECK_THROWS_AS(PolyRing(4, 1), Error);
  CHECK_THROWS_AS(PolyRing(257, 1), Error);
  CHECK_THROWS_AS(PolyRing(3, 0), Error);
}

TEST_CASE("elementary matrices satisfy the Steinberg commutator relation") {
  const MatrixAlgebra alg(3, PolyRing(3, 2));
  const PolyRing& r = alg.ring();
  const auto a = r.add(r.one(), r.monomial(1, 1)), b = r.monomial(2, 1);
  const auto x = alg.elementary(1, 2, a), y = alg.elementary(2, 3, b);
  const auto xi = alg.elementary(1, 2, r.neg(a)), yi = alg.elementary(2, 3, r.neg(b));
  CHECK(alg.mul(alg.mul(x, y), alg.mul(xi, yi)) == alg.elementary(1, 3, r.mul(a, b)));
  CHECK(alg.mul(x, xi) == alg.identity());
  CHECK_THROWS_AS(alg.elementary(2, 2, a), Error);
  CHECK_THROWS_AS(MatrixAlgebra(1, PolyRing(2, 1)), Error);
}

TEST_CASE("generator sets") {
  const GeneratorSet g2 = root_generators(MatrixAlgebra(3, PolyRing(2, 2)));
  CHECK(g2.matrices.size() == 4);
  CHECK(g2.degenerate.empty());
  const GeneratorSet g1 = root_generators(MatrixAlgebra(3, PolyRing(2, 1)));
  CHECK(g1.matrices.size() == 3);
  CHECK(g1.degenerate.size() == 1);
  // Over F_3 every root subgroup contributes x(1) and x(2) = x(1)^{-1}.
  const MatrixAlgebra a3(3, PolyRing(3, 1));
  const GeneratorSet g3 = root_generators(a3);
  CHECK(g3.matrices.size() == 6);
  std::set<std::string> set(g3.matrices.begin(), g3.matrices.end());
  for (const auto& m : g3.matrices) {
    bool has_inverse = false;
    for (const auto& w : g3.matrices) has_inverse |= a3.mul(m, w) == a3.identity();
    CHECK(has_inverse);
  }
  CHECK(set.size() == g3.matrices.size());
}

TEST_CASE("generation by commutator closure") {
  for (std::size_t n = 3; n <= 5; ++n)
    for (std::size_t k = 1; k <= 4; ++k) CHECK(generates_elementary_group(n, k));
  // Without the t-generator nothing of positive degree is reached.
  CHECK_FALSE(generates_elementary_group(3, 2, false));
  CHECK(generates_elementary_group(3, 1, false));
}

TEST_CASE("quotient orders match |SL_n(F_q)| q^{(n^2-1)(k-1)}") {
  for (const auto& [n, q, k] : std::vector<std::tuple<std::size_t, std::uint32_t, std::size_t>>{
           {3, 2, 1}, {3, 3, 1}, {3, 2, 2}, {4, 2, 1}}) {
    const ElementaryQuotient eq = build_quotient(n, q, k);
    CHECK(eq.order() == oracle::sl_order(n, q, k));
    CHECK(std::is_sorted(eq.elements.begin(), eq.elements.end()));
    eq.graph.validate();
  }
  CHECK(build_quotient(3, 3, 1).order() == 5616);
  CHECK(build_quotient(4, 2, 1).order() == 20160);
  CHECK_THROWS_AS(build_quotient(3, 2, 2, 1000), Error);
  CHECK_THROWS_AS(build_quotient(3, 5, 1), Error);  // 372000 elements exceed the default cap
  CHECK_THROWS_AS(build_quotient(2, 2, 1), Error);
}

TEST_CASE("reduction map is a surjective homomorphism with equal fibers") {
  const ElementaryQuotient upper = build_quotient(3, 2, 2), lower = build_quotient(3, 2, 1);
  const std::vector<std::uint32_t> red = reduction_map(upper, lower);
  std::vector<std::size_t> fiber(lower.order(), 0);
  for (auto v : red) ++fiber[v];
  for (auto f : fiber) CHECK(f == 256);  // 2^{(n^2-1)(k-1)}
  auto rng = make_rng(17, 0);
  std::uniform_int_distribution<std::size_t> pick(0, upper.order() - 1);
  for (int i = 0; i < 200; ++i) {
    const std::size_t a = pick(rng), b = pick(rng);
    const auto prod = upper.algebra.mul(upper.elements[a], upper.elements[b]);
    const auto lhs = red[upper.index.at(prod)];
    const auto rhs = lower.index.at(lower.algebra.mul(lower.elements[red[a]], lower.elements[red[b]]));
    CHECK(lhs == rhs);
  }
  CHECK(red[upper.graph.identity] == lower.graph.identity);
}

TEST_CASE("left translations are graph automorphisms") {
  const ElementaryQuotient eq = build_quotient(3, 3, 1);
  auto rng = make_rng(19, 0);
  std::uniform_int_distribution<std::size_t> pick(0, eq.order() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto& h = eq.elements[pick(rng)];
    auto phi = [&](std::size_t v) { return eq.index.at(eq.algebra.mul(h, eq.elements[v])); };
    for (std::size_t v = 0; v < eq.order(); v += 37)
      for (std::size_t s = 0; s < eq.graph.valency; ++s) CHECK(phi(eq.graph.neighbor(v, s)) == eq.graph.neighbor(phi(v), s));
  }
}

TEST_CASE("spectral gap on closed forms") {
  for (std::size_t m : {5u, 8u, 13u}) {
    const SpectralGapResult k = spectral_gap(oracle::complete_graph(m));
    CHECK(k.gap == doctest::Approx(static_cast<double>(m) / static_cast<double>(m - 1)).epsilon(1e-9));
    const SpectralGapResult c = spectral_gap(oracle::cycle_graph(m));
    CHECK(c.gap == doctest::Approx(1.0 - std::cos(2.0 * std::numbers::pi / static_cast<double>(m))).epsilon(1e-9));
    CHECK(std::abs(c.eigenvector.sum()) <= 1e-9);
    CHECK(c.eigenvector.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("spectral gap against a dense solve") {
  const auto s5 = build_symmetric(5);
  const CayleyGraph transpositions =
      CayleyGraph::from_group(*s5, {s5->generator("s1"), s5->generator("s2"), s5->generator("s3"), s5->generator("s4")});
  for (const auto& g : {build_quotient(3, 2, 1).graph, transpositions}) {
    const SpectralGapResult r = spectral_gap(g);
    CHECK(std::abs(r.mu2 - oracle::dense_mu2(g)) <= 1e-8);
    CHECK(r.gap == doctest::Approx(1.0 - r.mu2));
    CHECK(r.gap > 0.0);
  }
}

TEST_CASE("scalar Poincare constant is 1/(valency gap)") {
  for (const auto& g : {oracle::complete_graph(6), oracle::cycle_graph(9), build_quotient(3, 2, 1).graph}) {
    PoincareOptions opt;
    opt.p_values = {2.0};
    opt.restarts = 8;
    const PoincareReport rep = poincare_constants(g, opt);
    CHECK(rep.c_l2 == doctest::Approx(oracle::scalar_poincare_dense(g)).epsilon(1e-8));
    // Heuristic maximisation in R^3 reaches the exact l^2 value.
    CHECK(rep.c_lp_lower.at(2.0) <= rep.c_l2 * (1 + 1e-9));
    CHECK(rep.c_lp_lower.at(2.0) >= 0.98 * rep.c_l2);
  }
  CHECK(poincare_constants(oracle::complete_graph(7)).c_l2 == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("Poincare ratio of any map bounds the lower estimate from below") {
  const CayleyGraph g = build_quotient(3, 2, 1).graph;
  auto rng = make_rng(23, 0);
  std::normal_distribution<double> nd;
  PoincareOptions opt;
  opt.p_values = {1.5, 3.0};
  opt.restarts = 4;
  const PoincareReport rep = poincare_constants(g, opt);
  for (double p : opt.p_values) {
    for (int i = 0; i < 5; ++i) {
      Eigen::MatrixXd phi(static_cast<Eigen::Index>(g.order), 3);
      for (Eigen::Index r = 0; r < phi.rows(); ++r)
        for (Eigen::Index c = 0; c < 3; ++c) phi(r, c) = nd(rng);
      CHECK(poincare_ratio(g, phi, p) <= rep.c_lp_lower.at(p) * (1 + 1e-9));
    }
  }
  CHECK_THROWS_AS(poincare_constants(g, PoincareOptions{{0.5}}), Error);
}

TEST_CASE("best translate in l^2 is the mean") {
  Eigen::MatrixXd phi(4, 2);
  phi << 0, 1, 2, 3, 4, 5, 6, 7;
  CHECK((best_translate(phi, 2.0) - Eigen::Vector2d(3, 4)).norm() <= 1e-9);
}

TEST_CASE("diameter") {
  CHECK(diameter(oracle::cycle_graph(9)) == 4);
  CHECK(diameter(oracle::complete_graph(5)) == 1);
  CHECK(diameter(build_quotient(3, 2, 1).graph) == 8);
}

TEST_CASE("graph exports") {
  const CayleyGraph c6 = oracle::cycle_graph(6);
  const std::string csv = export_csv(c6);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.substr(0, 4) == "0,1\n");

  const std::string dot = export_dot(c6);
  const std::regex node(R"(^  \d+ \[label=".*"\];$)"), edge(R"(^  (\d+) -- (\d+);$)");
  std::istringstream is(dot);
  std::string line;
  std::getline(is, line);
  CHECK(line == "graph cayley {");
  std::size_t nodes = 0, edges = 0;
  while (std::getline(is, line) && line != "}") {
    std::smatch m;
    if (std::regex_match(line, node)) ++nodes;
    else if (std::regex_match(line, m, edge)) {
      ++edges;
      CHECK(std::stoul(m[1]) < std::stoul(m[2]));
    } else FAIL("unexpected DOT line: " << line);
  }
  CHECK(nodes == 6);
  CHECK(edges == 6);

  const CayleyGraph q = build_quotient(3, 2, 1).graph;
  const CayleyGraph back = import_json(export_json(q));
  CHECK(back.neighbors == q.neighbors);
  CHECK(back.vertex_labels == q.vertex_labels);
  CHECK(back.generator_labels == q.generator_labels);
  nlohmann::json broken = export_json(q);
  broken["neighbors"][0][0] = 0;  // loop
  CHECK_THROWS_AS(import_json(broken), Error);
}

TEST_CASE("graph validation") {
  CayleyGraph g = oracle::cycle_graph(5);
  g.neighbors[0] = 2;  // 0 -> 2 without 2 -> 0
  CHECK_THROWS_AS(g.validate(), Error);
  CHECK_THROWS_AS(CayleyGraph{}.validate(), Error);
  const auto s3 = build_symmetric(3);
  const CayleyGraph cs = CayleyGraph::from_group(*s3, {s3->generator("s1"), s3->generator("s2")});
  CHECK(cs.order == 6);
  CHECK(cs.valency == 2);
  cs.validate();
  CHECK_THROWS_AS(CayleyGraph::from_group(*s3, {s3->generator("s1")}), Error);
}
