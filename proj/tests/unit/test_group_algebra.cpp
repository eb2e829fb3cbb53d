#include <random>

#include "doctest.h"
#include "robust_t/error.hpp"
#include "robust_t/group_algebra.hpp"
#include "robust_t/random.hpp"

using namespace robust_t;

namespace {

GroupFunction random_function(const GroupPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> v(g->order());
  for (auto& x : v) x = nd(rng);
  return GroupFunction(g, v);
}

}  // namespace

TEST_CASE("regular representation is a homomorphism") {
  for (const auto& g : {build_heisenberg(3), build_symmetric(4), build_dihedral(5)}) {
    auto rng = make_rng(11, g->order());
    for (int i = 0; i < 100; ++i) {
      const auto f = random_function(g, rng), h = random_function(g, rng);
      const Eigen::MatrixXd lhs = regular_rep(convolve(f, h)).matrix;
      const Eigen::MatrixXd rhs = regular_rep(f).matrix * regular_rep(h).matrix;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("averaging idempotents project onto left-invariant functions") {
  const auto g = build_symmetric(4);
  const Subgroup k = closure(g, {g->generator("s1"), g->generator("s2")});
  const GroupFunction kk = averaging_idempotent(k);
  CHECK(kk.mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kk.is_symmetric());
  const Eigen::MatrixXd p = regular_rep(kk).matrix;
  CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  // Basis of left-K-invariant functions: indicators of right cosets K g.
  const RightCosetPartition part = right_cosets(k);
  const auto n = static_cast<Eigen::Index>(g->order());
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(part.cosets.size()));
  for (std::size_t c = 0; c < part.cosets.size(); ++c)
    for (Element e : part.cosets[c]) basis(e, static_cast<Eigen::Index>(c)) = 1.0;
  CHECK((p * basis - basis).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(p.trace() == doctest::Approx(static_cast<double>(part.cosets.size())));
  // Each such function is invariant under left translation by K.
  for (Element a : k.elements()) CHECK(((left_translation(*g, a) * p) - p).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("convolution unit and involution adjoint") {
  const auto g = build_heisenberg(3);
  auto rng = make_rng(5, 0);
  const auto f = random_function(g, rng);
  const auto e = convolution_unit(g);
  CHECK((convolve(f, e) - f).max_abs() <= 1e-12);
  CHECK((convolve(e, f) - f).max_abs() <= 1e-12);
  CHECK((regular_rep(involution(f)).matrix - regular_rep(f).matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(regular_rep(e).matrix.isIdentity(1e-14));
}

TEST_CASE("Schatten norms of k1k2 - k12 and its adjoint agree") {
  const auto g = build_heisenberg(3);
  const auto pair = generated_pair(g, {"x"}, {"y"});
  const auto k12 = closure(g, {g->generator("x"), g->generator("y")});
  const auto a = averaging_idempotent(pair.k1), b = averaging_idempotent(pair.k2), c = averaging_idempotent(k12);
  const Eigen::MatrixXd m1 = regular_rep(convolve(a, b) - c).matrix;
  const Eigen::MatrixXd m2 = regular_rep(convolve(b, a) - c).matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> s1(m1), s2(m2);
  CHECK((s1.singularValues() - s2.singularValues()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("dense cap is enforced") {
  const auto big = build_heisenberg(17);  // 4913 elements
  CHECK_THROWS_AS(regular_rep(convolution_unit(big)), Error);
}

TEST_CASE("function JSON round trip") {
  const auto g = build_dihedral(4);
  const auto f = averaging_idempotent(closure(g, {g->generator("s")}));
  const auto back = GroupFunction::from_json(g, f.to_json());
  CHECK(back.values() == f.values());
}
