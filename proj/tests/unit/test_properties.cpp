// Randomised and exhaustive checks of the structural invariants.

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robust_t/coset_spectra.hpp"
#include "robust_t/criterion.hpp"
#include "robust_t/expander_forge.hpp"
#include "robust_t/group_algebra.hpp"
#include "robust_t/projection_lab.hpp"
#include "robust_t/random.hpp"

using namespace robust_t;

namespace {

std::vector<SubgroupPair> test_pairs() {
  return {generated_pair(build_symmetric(3), {"s1"}, {"s2"}),
          generated_pair(build_dihedral(4), {"s"}, {"t"}),
          generated_pair(build_heisenberg(3), {"x"}, {"y"}),
          generated_pair(build_heisenberg(5), {"x"}, {"y"}),
          generated_pair(build_elementary_abelian_pair(3), {"x"}, {"y"}),
          generated_pair(build_symmetric(4), {"s1", "s2"}, {"s3"}),
          generated_pair(build_symmetric(4), {"s1"}, {"s2", "s3"}),
          generated_pair(build_dihedral(7), {"s"}, {"t"})};
}

double binomial2(std::size_t n) { return static_cast<double>(n * (n - 1) / 2); }

}  // namespace

TEST_CASE("closure idempotence and coset counts over many subgroups") {
  for (const auto& g : {build_symmetric(4), build_heisenberg(3), build_dihedral(6)}) {
    for (Element a = 0; a < g->order(); a += 3)
      for (Element b = 1; b < g->order(); b += 5) {
        const Subgroup h = closure(g, {a, b});
        CHECK(closure(g, h.elements()) == h);
        CHECK(right_cosets(h).cosets.size() * h.size() == g->order());
      }
  }
}

TEST_CASE("lemma prediction equals the pair-sum oracle") {
  for (const auto& pair : test_pairs()) {
    const AngleReport rep = angle_report(pair.k1, pair.k2, {2.0});
    std::vector<double> oracle = oracle::pair_sum_singular_values(pair.k1, pair.k2);
    std::vector<double> predicted = rep.lemma_predicted;
    std::sort(oracle.begin(), oracle.end());
    std::sort(predicted.begin(), predicted.end());
    REQUIRE(oracle.size() == predicted.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(oracle[i] - predicted[i]) <= 1e-9);
  }
}

TEST_CASE("coset graph spectra are symmetric with the multiplicity floor at 1") {
  for (const auto& pair : test_pairs()) {
    const auto g = build_coset_graph(pair.k1, pair.k2);
    const LaplacianSpectrum sp = laplacian_spectrum(g);
    const Eigen::Index n = sp.eigenvalues.size();
    for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(sp.eigenvalues[i] + sp.eigenvalues[n - 1 - i] - 2.0) <= 1e-9);
    std::size_t ones = 0;
    for (Eigen::Index i = 0; i < n; ++i) ones += std::abs(sp.eigenvalues[i] - 1.0) <= 1e-9;
    const auto v1 = g.graph.v1_size, v2 = g.graph.v2_size;
    CHECK(ones >= (v1 > v2 ? v1 - v2 : v2 - v1));
  }
}

TEST_CASE("commuting pairs have identically zero k1 k2 - k12") {
  for (std::uint32_t q : {2u, 3u, 5u}) {
    const auto g = build_elementary_abelian_pair(q);
    const auto pair = generated_pair(g, {"x"}, {"y"});
    const auto k12 = closure(g, {g->generator("x"), g->generator("y")});
    const GroupFunction d = convolve(averaging_idempotent(pair.k1), averaging_idempotent(pair.k2)) - averaging_idempotent(k12);
    CHECK(d.max_abs() <= 1e-12);
    CHECK(angle_report(pair.k1, pair.k2, {2.0}).hilbert_cos <= 1e-12);
  }
}

TEST_CASE("projection families: decay, soundness and the limit projection") {
  constexpr std::uint64_t kSeed = 4242;
  for (std::size_t index = 0; index < 12; ++index) {
    const oracle::HypothesisFamily hf = oracle::hypothesis_family(kSeed, index);
    const ProjectionFamily& fam = hf.family;
    const double rp = hf.lemma.r_prime;
    CHECK(rp >= 0.0);
    CHECK(rp < 1.0);

    // E-decay against r' and against the norm of v.
    auto rng = make_rng(kSeed, 100 + index);
    std::normal_distribution<double> nd;
    const auto d = static_cast<Eigen::Index>(fam.dimension());
    const double e_scale = 2.0 * fam.beta() * binomial2(fam.size());
    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd v(d);
      for (Eigen::Index i = 0; i < d; ++i) v[i] = nd(rng);
      const double e0 = e_functional(fam, v), nv = fam.space().norm(v);
      Eigen::VectorXd w = v;
      double scale = 1.0;
      for (int n = 0; n <= 30; ++n) {
        const double en = e_functional(fam, w);
        CHECK(en <= scale * e0 * (1.0 + 1e-9) + 1e-300);
        CHECK(en <= e_scale * scale * nv * (1.0 + 1e-9));
        w = fam.averaged() * w;
        scale *= rp;
      }
    }

    const ConvergenceCertificate cert = iterate_averaged(fam);
    REQUIRE(cert.converged);
    CHECK(cert.certificate_mode);
    for (std::size_t n = 0; n < cert.distances.size(); ++n)
      CHECK(cert.distances[n] <= hf.lemma.c_prime * std::pow(rp, static_cast<double>(n)) + 1e-8);
    CHECK(cert.sound());
    CHECK(cert.idempotence_error <= 1e-8);
    CHECK(cert.containment_error <= 1e-8);
    CHECK(cert.fixed_vector_error <= 1e-8);
    CHECK(cert.rank_t_infinity == cert.intersection_dim);

    // Lemma bound on commutators wherever a meet exists and cos < 1.
    for (const auto& [key, ratio] : fam.ratios()) {
      const double c = fam.cosines().at(key);
      if (c < 1.0 && !ratio.infinite) CHECK(ratio.upper <= angle_bound_on_commutator(c, fam.beta()) + 1e-8);
    }
  }
}

TEST_CASE("common fixed vectors are fixed by every power") {
  auto rng = make_rng(99, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const oracle::RandomFamily rf = oracle::random_family(rng, 8, 3, 0.05, false);
    const ProjectionFamily fam(rf.space, rf.projections);
    const Eigen::VectorXd v = rf.common.col(0);
    REQUIRE(v.norm() > 1e-6);
    Eigen::VectorXd w = v;
    for (int n = 0; n < 50; ++n) {
      w = fam.averaged() * w;
      CHECK((w - v).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("criterion invariants over random schemes") {
  auto rng = make_rng(7, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t certified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
    LinkTable t;
    t.L = 0;
    t.eta = 2.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) {
        const double eta = 0.7 + 0.3 * unit(rng);
        t.entries.push_back({i, j, eta, 2 + static_cast<std::size_t>(trial % 5), 3, false});
        t.eta = std::min(t.eta, eta);
        t.L = std::max<std::size_t>(t.L, std::min<std::size_t>(t.entries.back().v1_size, 3));
      }
    const CriterionReport rep = evaluate(link_scheme(t));
    if (!rep.certified()) continue;
    ++certified;
    REQUIRE(rep.flp_exponent);
    CHECK(*rep.flp_exponent > 2.0);
    for (const auto& d : rep.class_params) {
      if (d.kind == BanachClassKind::theta_hilbertian)
        CHECK(std::abs(2.0 * std::pow(rep.cos_max_hilbert / 2.0, d.theta) - *rep.c_prime) <= 1e-12);
      if (d.kind == BanachClassKind::hilbert_bm_ball)
        CHECK(std::abs((1.0 + d.delta) * rep.cos_max_hilbert - *rep.c_prime) <= 1e-12);
    }
  }
  CHECK(certified > 20);
}

TEST_CASE("interpolation constant on 50 admissible triples") {
  auto rng = make_rng(8, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int done = 0;
  while (done < 50) {
    const double p1 = 1.05 + 0.95 * unit(rng), p2 = 2.0 + 6.0 * unit(rng), r = 2.0 + 6.0 * unit(rng);
    if (!(1.0 / p1 - 1.0 / p2 < 1.0 / r)) continue;
    const double x = std::exp2((r / (r - 1.0)) * (1.0 / p1 - 1.0 / p2 - 1.0 / r));
    if (x > 0.99995) continue;  // partial sums of 10^6 terms are not accurate to 1e-9 above this
    CHECK(std::abs(schatten_M(p1, p2, r) - oracle::schatten_M_partial(p1, p2, r, 1000000)) <= 1e-9);
    ++done;
  }
}

TEST_CASE("scalar Poincare inequality holds for random maps with equality at the eigenvector") {
  for (const auto& g : {build_quotient(3, 2, 1).graph, build_quotient(3, 3, 1).graph, oracle::cycle_graph(11)}) {
    const SpectralGapResult gap = spectral_gap(g);
    CHECK(gap.gap > 0.0);
    const PoincareReport rep = poincare_constants(g, {}, &gap);
    auto rng = make_rng(31, g.order);
    std::normal_distribution<double> nd;
    const auto n = static_cast<Eigen::Index>(g.order);
    const auto edges = g.edges();
    auto sides = [&](const Eigen::MatrixXd& phi) {
      const Eigen::RowVectorXd mean = phi.colwise().mean();
      double lhs = 0.0, rhs = 0.0;
      for (Eigen::Index v = 0; v < n; ++v) lhs += (phi.row(v) - mean).squaredNorm();
      for (const auto& [a, b] : edges) rhs += (phi.row(a) - phi.row(b)).squaredNorm();
      return std::pair{lhs, rhs};
    };
    for (int i = 0; i < 100; ++i) {
      Eigen::MatrixXd phi(n, 3);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < 3; ++c) phi(r, c) = nd(rng);
      const auto [lhs, rhs] = sides(phi);
      CHECK(lhs <= rep.c_l2 * rhs * (1 + 1e-12));
    }
    const auto [lhs, rhs] = sides(gap.eigenvector);
    CHECK(lhs == doctest::Approx(rep.c_l2 * rhs).epsilon(1e-6));
  }
}

TEST_CASE("gap positivity across the tower") {
  for (const auto& [n, q, k] : std::vector<std::tuple<std::size_t, std::uint32_t, std::size_t>>{
           {3, 2, 1}, {3, 2, 2}, {3, 3, 1}, {4, 2, 1}})
    CHECK(spectral_gap(build_quotient(n, q, k).graph).gap > 0.0);
}
