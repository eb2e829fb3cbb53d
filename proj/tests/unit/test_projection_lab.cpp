#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "robust_t/error.hpp"
#include "robust_t/projection_lab.hpp"
#include "robust_t/random.hpp"

using namespace robust_t;

namespace {

Eigen::MatrixXd line(double angle) {
  const Eigen::Vector2d u(std::cos(angle), std::sin(angle));
  return u * u.transpose();
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = nd(rng);
  return a;
}

// Friedrichs cosine from principal angles: largest cosine left after the
// directions shared by both subspaces (cosine 1) are removed.
double friedrichs_from_principal_angles(const Eigen::MatrixXd& b1, const Eigen::MatrixXd& b2) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> q1(b1), q2(b2);
  const Eigen::MatrixXd o1 = q1.householderQ() * Eigen::MatrixXd::Identity(b1.rows(), b1.cols());
  const Eigen::MatrixXd o2 = q2.householderQ() * Eigen::MatrixXd::Identity(b2.rows(), b2.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(o1.transpose() * o2);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] < 1.0 - 1e-9) return svd.singularValues()[i];
  return 0.0;
}

}  // namespace

TEST_CASE("operator norms against exact oracles") {
  auto rng = make_rng(3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_matrix(rng, 6, 6);
    const NormInterval n1 = op_norm(a, NormedSpace::lp(6, 1.0));
    CHECK(n1.exact());
    CHECK(n1.upper == doctest::Approx(oracle::column_l1_norm(a)).epsilon(1e-14));
    const NormInterval ninf = op_norm(a, NormedSpace::lp(6, INFINITY));
    CHECK(ninf.upper == doctest::Approx(oracle::sign_pattern_inf_norm(a)).epsilon(1e-14));
    const NormInterval n2 = op_norm(a, NormedSpace::euclidean(6));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    CHECK(n2.upper == doctest::Approx(svd.singularValues()[0]).epsilon(1e-12));
    for (double p : {1.5, 3.0, 4.0}) {
      const NormInterval np = op_norm(a, NormedSpace::lp(6, p), static_cast<std::uint64_t>(trial));
      CHECK(np.lower <= np.upper * (1 + 1e-12));
      // Any vector's ratio is a lower bound; the estimator must beat the all-ones start.
      const NormedSpace sp = NormedSpace::lp(6, p);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(6);
      CHECK(np.lower >= sp.norm(a * ones) / sp.norm(ones) * (1 - 1e-12));
    }
  }
}

TEST_CASE("weighted Hilbert norm equals the conjugated Euclidean norm") {
  auto rng = make_rng(4, 0);
  const Eigen::MatrixXd a = random_matrix(rng, 4, 4);
  const Eigen::VectorXd w = (Eigen::VectorXd(4) << 1.0, 2.0, 0.5, 3.0).finished();
  const Eigen::VectorXd s = w.cwiseSqrt();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.asDiagonal() * a * s.cwiseInverse().asDiagonal());
  const NormInterval n = op_norm(a, NormedSpace::weighted(w));
  CHECK(n.upper == doctest::Approx(svd.singularValues()[0]).epsilon(1e-12));
  CHECK_THROWS_AS(NormedSpace::weighted((Eigen::VectorXd(2) << 1.0, -1.0).finished()), Error);
  CHECK_THROWS_AS(NormedSpace::lp(3, 0.5), Error);
}

TEST_CASE("two lines: cos and commutator ratio equal |cos phi|") {
  for (double phi : {0.1, 0.5, 1.0, std::numbers::pi / 3, 1.4}) {
    const Eigen::MatrixXd p1 = line(0.0), p2 = line(phi);
    const NormedSpace sp = NormedSpace::euclidean(2);
    const double c = cos_angle(p1, p2, Eigen::MatrixXd::Zero(2, 2), sp);
    CHECK(c == doctest::Approx(std::abs(std::cos(phi))).epsilon(1e-12));
    const CommutatorRatio r = commutator_ratio(p1, p2, sp);
    CHECK(r.exact());
    CHECK(r.upper == doctest::Approx(std::abs(std::cos(phi))).epsilon(1e-10));
    CHECK(r.upper <= angle_bound_on_commutator(c, 1.0) + 1e-8);
  }
}

TEST_CASE("cos_angle matches principal angles for orthogonal projections") {
  auto rng = make_rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd common = random_matrix(rng, 7, 2);
    Eigen::MatrixXd b1(7, 4), b2(7, 3);
    b1 << common, random_matrix(rng, 7, 2);
    b2 << common, random_matrix(rng, 7, 1);
    const Eigen::MatrixXd p1 = oracle::orthogonal_projection(b1), p2 = oracle::orthogonal_projection(b2);
    const auto meet = synthesize_meet(p1, p2, NormedSpace::euclidean(7));
    REQUIRE(meet);
    CHECK((*meet - oracle::orthogonal_projection(common)).cwiseAbs().maxCoeff() <= 1e-8);
    const double c = cos_angle(p1, p2, *meet, NormedSpace::euclidean(7));
    CHECK(c == doctest::Approx(friedrichs_from_principal_angles(b1, b2)).epsilon(1e-8));
  }
}

TEST_CASE("meet validation and family construction") {
  const Eigen::MatrixXd p1 = Eigen::Vector3d(1, 1, 0).asDiagonal();
  const Eigen::MatrixXd p2 = Eigen::Vector3d(1, 0, 1).asDiagonal();
  const NormedSpace sp = NormedSpace::euclidean(3);
  // A meet that does not absorb the projections is refused.
  CHECK_THROWS_AS(cos_angle(p1, p2, Eigen::MatrixXd::Identity(3, 3), sp), Error);
  CHECK_THROWS_AS(ProjectionFamily(sp, {}), Error);
  CHECK_THROWS_AS(ProjectionFamily(sp, {p1, 2.0 * p2}), Error);
  CHECK_THROWS_AS(ProjectionFamily(sp, {p1, p2}, {{PairKey{0, 2}, p1}}), Error);

  const ProjectionFamily fam(sp, {p1, p2});
  CHECK(fam.has_all_meets());
  CHECK(fam.meet_synthesized({0, 1}));
  CHECK(*fam.cos_max() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fam.beta() == doctest::Approx(1.0));
  CHECK(fam.intersection_dimension() == 1);
  const ProjectionFamily back = ProjectionFamily::from_json(fam.to_json());
  CHECK((back.averaged() - fam.averaged()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant formulas") {
  const CertificateConstants c = certificate_constants(0.1, 1.0, 3);
  const double r_prime = (1.0 + 1.0 + 3.0 * 0.1) / 3.0;
  CHECK(c.r_prime == doctest::Approx(r_prime).epsilon(1e-15));
  CHECK(c.c_prime == doctest::Approx(2.0 * 2.0 / 3.0 * r_prime / (1.0 - r_prime)).epsilon(1e-14));
  CHECK_THROWS_AS(certificate_constants(1.0 / 3.0, 1.0, 3), HypothesisError);
  CHECK_THROWS_AS(certificate_constants(0.1, 5.0, 3), HypothesisError);
  CHECK_THROWS_AS(certificate_constants(0.1, 1.0, 1), HypothesisError);

  const TheoremConstants t = theorem_constants(0.05, 1.0, 2);
  CHECK(t.alpha == doctest::Approx(2.0 * 2.0 * 0.05 / 0.95).epsilon(1e-15));
  CHECK_THROWS_AS(theorem_constants(0.2, 1.0, 2), HypothesisError);  // gamma must be below 1/5
  CHECK_THROWS_AS(theorem_constants(0.01, 3.0, 3), HypothesisError);
}

TEST_CASE("two coordinate planes converge at rate 1/2") {
  const Eigen::MatrixXd p1 = Eigen::Vector3d(1, 1, 0).asDiagonal();
  const Eigen::MatrixXd p2 = Eigen::Vector3d(1, 0, 1).asDiagonal();
  const ProjectionFamily fam(NormedSpace::euclidean(3), {p1, p2});
  const ConvergenceCertificate cert = iterate_averaged(fam);
  CHECK(cert.converged);
  CHECK(cert.certificate_mode);
  CHECK(cert.sound());
  CHECK((cert.t_infinity - Eigen::Matrix3d(Eigen::Vector3d(1, 0, 0).asDiagonal())).cwiseAbs().maxCoeff() <= 1e-12);
  for (std::size_t n = 0; n < cert.distances.size(); ++n)
    CHECK(cert.distances[n] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(n))).epsilon(1e-12));
  CHECK(cert.rank_t_infinity == 1);
}

TEST_CASE("families outside the hypotheses still converge without a certificate") {
  // Three lines at 60 degrees: alpha = 1/2 exceeds 1/(2N-3) = 1/3 and gamma = 1/2.
  const ProjectionFamily fam(NormedSpace::euclidean(2),
                             {line(0.0), line(std::numbers::pi / 3), line(2.0 * std::numbers::pi / 3)});
  const ConvergenceCertificate cert = iterate_averaged(fam);
  CHECK_FALSE(cert.certificate_mode);
  CHECK(cert.converged);
  CHECK(cert.rank_t_infinity == 0);
  CHECK(cert.sound());
  CHECK_FALSE(cert.flags.empty());
}

TEST_CASE("l^p coordinate projections") {
  // Coordinate projections commute: T^2 - T^inf = 0 after one step in every norm.
  const Eigen::MatrixXd p1 = Eigen::Vector4d(1, 1, 1, 0).asDiagonal();
  const Eigen::MatrixXd p2 = Eigen::Vector4d(1, 1, 0, 1).asDiagonal();
  const Eigen::MatrixXd p3 = Eigen::Vector4d(1, 0, 1, 1).asDiagonal();
  const ProjectionFamily fam(NormedSpace::lp(4, 3.0), {p1, p2, p3}, {{PairKey{0, 1}, p1 * p2}, {PairKey{0, 2}, p1 * p3}, {PairKey{1, 2}, p2 * p3}});
  CHECK(*fam.cos_max() <= 1e-12);
  const ConvergenceCertificate cert = iterate_averaged(fam);
  CHECK(cert.converged);
  CHECK(cert.sound());
  CHECK(cert.intersection_dim == 1);
}

TEST_CASE("E functional vanishes on common fixed vectors") {
  const Eigen::MatrixXd p1 = Eigen::Vector3d(1, 1, 0).asDiagonal();
  const Eigen::MatrixXd p2 = Eigen::Vector3d(1, 0, 1).asDiagonal();
  const ProjectionFamily fam(NormedSpace::euclidean(3), {p1, p2});
  CHECK(e_functional(fam, Eigen::Vector3d(2, 0, 0)) == 0.0);
  CHECK(e_functional(fam, Eigen::Vector3d(0, 3, 4)) == doctest::Approx(5.0));
}
