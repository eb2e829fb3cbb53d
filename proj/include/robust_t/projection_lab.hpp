#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace robust_t {

enum class NormKind { p_norm, weighted_2 };

// R^d with an l^p norm (p in [1, inf]) or a weighted Euclidean norm
// ||v|| = sqrt(sum w_i v_i^2).
struct NormedSpace {
  std::size_t dimension = 0;
  NormKind kind = NormKind::p_norm;
  double p = 2.0;
  Eigen::VectorXd weights;  // weighted_2 only

  static NormedSpace lp(std::size_t dim, double p);
  static NormedSpace euclidean(std::size_t dim) { return lp(dim, 2.0); }
  static NormedSpace weighted(Eigen::VectorXd weights);

  // Inner-product norm: operator norms are exact singular values.
  bool is_hilbert() const noexcept { return kind == NormKind::weighted_2 || p == 2.0; }
  double norm(const Eigen::VectorXd& v) const;

  // Unitary change of coordinates onto Euclidean space (W^{1/2}); identity for l^p.
  Eigen::MatrixXd to_euclidean(const Eigen::MatrixXd& a) const;
  Eigen::MatrixXd from_euclidean(const Eigen::MatrixXd& a) const;

  nlohmann::json to_json() const;
  static NormedSpace from_json(const nlohmann::json& j);
};

// Certified enclosure lower <= ||A|| <= upper.
struct NormInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool exact() const noexcept { return lower == upper; }
};

inline constexpr std::size_t kNormRestarts = 16;

// Exact for Hilbert norms, p = 1 and p = inf. Otherwise the lower bound comes
// from Boyd's nonlinear power method (kNormRestarts seeded restarts plus
// deterministic starts) and the upper bound from ||A||_1^{1/p} ||A||_inf^{1-1/p}.
NormInterval op_norm(const Eigen::MatrixXd& a, const NormedSpace& space, std::uint64_t seed = 0);

inline constexpr double kIdempotentTol = 1e-10;

// max(||P1 (P2 - P12)||, ||P2 (P1 - P12)||), upper enclosure for general p.
// Throws when P12 is not an idempotent absorbing both projections.
double cos_angle(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const Eigen::MatrixXd& p12,
                 const NormedSpace& space, std::uint64_t seed = 0);

// a(P1, P2): least gamma with ||(P1P2 - P2P1)v|| <= gamma ||(P1 - P2)v||.
struct CommutatorRatio {
  double lower = 0.0;
  double upper = 0.0;  // +inf when no finite bound is known
  bool infinite = false;  // the commutator survives on ker(P1 - P2)
  bool exact() const noexcept { return infinite || lower == upper; }
};

// Exact for Hilbert norms (restricted generalized eigenproblem). For general p
// the lower bound is a multi-start maximization of the ratio; the upper bound
// 2(1+beta)cos/(1-cos) needs a meet projection and is +inf without one.
CommutatorRatio commutator_ratio(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const NormedSpace& space,
                                 const Eigen::MatrixXd* p12 = nullptr, std::uint64_t seed = 0);

// 2(1+beta)cos/(1-cos); +inf when cos >= 1.
double angle_bound_on_commutator(double cos, double beta);

struct CertificateConstants {
  double r_prime = 0.0;
  double c_prime = 0.0;
};

// r' = (1 + (N-2)beta + (2N-3)alpha)/N and C' = (N-1) 2 beta^2 / N * r'/(1-r').
// Requires alpha < 1/(2N-3) and, for N > 2, beta < (N-1-(2N-3)alpha)/(N-2);
// throws HypothesisError otherwise.
CertificateConstants certificate_constants(double alpha, double beta, std::size_t n);

struct TheoremConstants {
  double alpha = 0.0;  // 2(1+beta)gamma/(1-gamma)
  double r = 0.0;
  double c = 0.0;
};

// Requires gamma < 1/(8N-11) and beta < 1 + (1-(8N-11)gamma)/(N-2+(3N-4)gamma).
TheoremConstants theorem_constants(double gamma, double beta, std::size_t n);

using PairKey = std::pair<std::size_t, std::size_t>;  // 0-based, first < second

class ProjectionFamily {
 public:
  // Validates idempotence and supplied meets. For Hilbert spaces a missing meet
  // is replaced by the orthogonal projection onto Im P_i n Im P_j whenever
  // that projection absorbs both P_i and P_j.
  ProjectionFamily(NormedSpace space, std::vector<Eigen::MatrixXd> projections,
                   std::map<PairKey, Eigen::MatrixXd> meets = {}, std::uint64_t seed = 0);

  const NormedSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return projections_.size(); }
  std::size_t dimension() const noexcept { return space_.dimension; }
  const std::vector<Eigen::MatrixXd>& projections() const noexcept { return projections_; }
  const std::map<PairKey, Eigen::MatrixXd>& meets() const noexcept { return meets_; }
  bool has_all_meets() const noexcept;
  bool meet_synthesized(PairKey k) const { return synthesized_.count(k) > 0; }

  // max ||P_i|| (upper enclosure).
  double beta() const noexcept { return beta_; }
  // max a(P_i, P_j) (upper enclosure, +inf when unknown).
  double alpha() const noexcept { return alpha_; }
  double alpha_lower() const noexcept { return alpha_lower_; }
  // max cos(P_i, P_j); nullopt when some meet is missing.
  std::optional<double> cos_max() const noexcept { return cos_max_; }
  const std::map<PairKey, double>& cosines() const noexcept { return cosines_; }
  const std::map<PairKey, CommutatorRatio>& ratios() const noexcept { return ratios_; }

  // T = (P_1 + ... + P_N)/N.
  const Eigen::MatrixXd& averaged() const noexcept { return averaged_; }

  // Dimension of the common image, via the nullity of the stacked I - P_i.
  std::size_t intersection_dimension(double tol = 1e-8) const;

  nlohmann::json to_json() const;
  static ProjectionFamily from_json(const nlohmann::json& j, std::uint64_t seed = 0);

 private:
  NormedSpace space_;
  std::vector<Eigen::MatrixXd> projections_;
  std::map<PairKey, Eigen::MatrixXd> meets_;
  std::map<PairKey, bool> synthesized_;
  std::map<PairKey, double> cosines_;
  std::map<PairKey, CommutatorRatio> ratios_;
  double beta_ = 0.0;
  double alpha_ = 0.0;
  double alpha_lower_ = 0.0;
  std::optional<double> cos_max_;
  Eigen::MatrixXd averaged_;
};

// Orthogonal projection onto Im P1 n Im P2 (Euclidean after the space's change
// of coordinates); nullopt when it fails to absorb P1 and P2.
std::optional<Eigen::MatrixXd> synthesize_meet(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2,
                                               const NormedSpace& space);

// E(v) = sum_{i<j} ||(P_i - P_j) v||.
double e_functional(const ProjectionFamily& family, const Eigen::VectorXd& v);

struct IterateOptions {
  std::size_t check_n = 60;        // n = 0..check_n compared with T^inf
  std::size_t max_iter = 100000;   // plain products allowed while searching for T^inf
  double tol = 1e-10;              // ||T^{n+1} - T^n||_max below this counts as converged
  double slack = 1e-8;             // additive slack on every bound
  std::uint64_t seed = 0;
};

struct ConvergenceCertificate {
  bool certificate_mode = false;   // some constant route has its hypotheses
  bool converged = false;
  std::size_t converged_at = 0;
  std::optional<CertificateConstants> lemma;   // from alpha, beta
  std::optional<TheoremConstants> theorem;     // from cos_max, beta
  std::string lemma_diagnostic;
  std::string theorem_diagnostic;
  Eigen::MatrixXd t_infinity;
  std::vector<double> distances;    // ||T^inf - T^n||, n = 0..iterates_checked
  std::size_t iterates_checked = 0;
  double max_violation = -std::numeric_limits<double>::infinity();  // max_n dist - bound, over available routes
  double lemma_violation = -std::numeric_limits<double>::infinity();
  double theorem_violation = -std::numeric_limits<double>::infinity();
  double idempotence_error = 0.0;
  double containment_error = 0.0;   // max_i ||P_i T^inf - T^inf||_max
  double fixed_vector_error = 0.0;  // max over a basis of Im T^inf of ||P_i v - v||
  std::size_t rank_t_infinity = 0;
  std::size_t intersection_dim = 0;
  std::vector<std::string> flags;

  // Every check that applies passed.
  bool sound(double slack = 1e-8) const;
  nlohmann::json to_json() const;
};

ConvergenceCertificate iterate_averaged(const ProjectionFamily& family, const IterateOptions& options = {});

}  // namespace robust_t
