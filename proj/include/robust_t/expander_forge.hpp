#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "robust_t/finite_group.hpp"

namespace robust_t {

inline constexpr std::size_t kDefaultCayleyCap = 100000;

// F_q[t]/(t^k) with elements as coefficient vectors (c_0, ..., c_{k-1}).
class PolyRing {
 public:
  using Poly = std::vector<std::uint8_t>;

  // q prime and at most 251 (coefficients are stored in one byte).
  PolyRing(std::uint32_t q, std::size_t k);

  std::uint32_t q() const noexcept { return q_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t size() const;  // q^k

  Poly zero() const { return Poly(k_, 0); }
  Poly one() const;
  Poly constant(std::uint32_t a) const;
  Poly monomial(std::uint32_t a, std::size_t degree) const;  // a t^degree, zero if degree >= k
  Poly add(const Poly& a, const Poly& b) const;
  Poly neg(const Poly& a) const;
  Poly mul(const Poly& a, const Poly& b) const;

  // Ring axioms on `samples` random triples.
  bool check_axioms(std::uint64_t seed, std::size_t samples) const;

  // "0", "1", "t", "1+2t", "t^2".
  std::string to_string(const Poly& a) const;

 private:
  std::uint32_t q_;
  std::size_t k_;
};

// n x n matrices over PolyRing, stored as canonical row-major byte strings
// (entry (i, j) occupies bytes [(i n + j) k, (i n + j + 1) k)).
class MatrixAlgebra {
 public:
  MatrixAlgebra(std::size_t n, PolyRing ring);

  std::size_t n() const noexcept { return n_; }
  const PolyRing& ring() const noexcept { return ring_; }

  std::string identity() const;
  // e_{i,j}(s), 1-based indices, i != j.
  std::string elementary(std::size_t i, std::size_t j, const PolyRing::Poly& s) const;
  std::string mul(const std::string& a, const std::string& b) const;
  PolyRing::Poly entry(const std::string& m, std::size_t i, std::size_t j) const;  // 0-based
  std::string to_string(const std::string& m) const;  // "[[1,0,0],[0,1,0],[t,0,1]]"

  // Reduction F_q[t]/(t^k) -> F_q[t]/(t^k') for k' <= k.
  std::string reduce(const std::string& m, const MatrixAlgebra& target) const;

 private:
  std::size_t n_;
  PolyRing ring_;
};

struct GeneratorSet {
  std::vector<std::string> labels;
  std::vector<std::string> matrices;
  std::vector<std::string> degenerate;  // dropped because they reduce to the identity
};

// Nonidentity elements of K_i = e_{i,i+1}(F_q) for i < n, K_n = e_{n,1}(F_q) and
// K_{n+1} = e_{n,1}(F_q t), closed under inverses. For k = 1 the last subgroup
// is trivial and reported in `degenerate`.
GeneratorSet root_generators(const MatrixAlgebra& algebra);

// Commutator closure on elementary root subgroups: true iff every
// e_{i,j}(F_q t^d), i != j, d < k, is reachable from the generators'
// subgroups, i.e. the set generates EL_n(F_q[t]/(t^k)). No enumeration.
bool generates_elementary_group(std::size_t n, std::size_t k, bool include_t_generator = true);

// Cayley graph with edges g ~ g s for s in a symmetric generating set.
struct CayleyGraph {
  std::size_t order = 0;
  std::size_t valency = 0;
  std::vector<std::string> vertex_labels;
  std::vector<std::string> generator_labels;
  std::vector<std::uint32_t> neighbors;  // neighbors[v * valency + s] = v s
  std::uint32_t identity = 0;

  std::uint32_t neighbor(std::size_t v, std::size_t s) const { return neighbors[v * valency + s]; }
  // Unordered edges {u, v}, u < v, sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;
  bool is_connected() const;
  // Regular, loop free, every edge seen from both ends, connected.
  void validate() const;

  // Cayley graph of a group table; `generators` is closed under inverses here.
  static CayleyGraph from_group(const GroupTable& group, std::vector<Element> generators);
};

struct ElementaryQuotient {
  MatrixAlgebra algebra;
  GeneratorSet generators;
  std::vector<std::string> elements;  // sorted canonical byte strings
  std::unordered_map<std::string, std::uint32_t> index;
  CayleyGraph graph;

  std::size_t order() const noexcept { return elements.size(); }
};

// Breadth-first closure of EL_n(F_q[t]/(t^k)) from root_generators. Throws
// when the order would exceed `cap`.
ElementaryQuotient build_quotient(std::size_t n, std::uint32_t q, std::size_t k, std::size_t cap = kDefaultCayleyCap);

// Vertex map of the reduction upper -> lower (same n and q, smaller k).
std::vector<std::uint32_t> reduction_map(const ElementaryQuotient& upper, const ElementaryQuotient& lower);

struct SpectralGapResult {
  double gap = 0.0;    // 1 - mu2, the smallest nonzero normalized-Laplacian eigenvalue
  double mu2 = 0.0;    // second largest eigenvalue of A/D
  double residual = 0.0;
  std::size_t restarts = 0;
  Eigen::VectorXd eigenvector;  // unit, orthogonal to constants
};

struct SpectralGapOptions {
  std::uint64_t seed = 0;
  std::size_t krylov_dim = 100;
  std::size_t max_restarts = 500;
  double tol = 1e-9;
};

// Restarted Lanczos with full reorthogonalization on A/D restricted to the
// complement of the constants.
SpectralGapResult spectral_gap(const CayleyGraph& g, const SpectralGapOptions& options = {});

struct PoincareOptions {
  std::vector<double> p_values;  // p in [1, inf); p = 2 included on request
  std::size_t dimension = 3;
  std::size_t restarts = 32;
  std::size_t iterations = 300;
  std::uint64_t seed = 0;
};

// Edge convention: sums run over unordered edges, each counted once, and the
// left side is sum_x ||phi(x) - v(phi)||^2 with the best translate v(phi).
struct PoincareReport {
  std::size_t order = 0;
  std::size_t valency = 0;
  double lambda2 = 0.0;  // normalized-Laplacian gap
  double c_l2 = 0.0;     // 1/(valency * lambda2), exact
  std::map<double, double> c_lp_lower;
  std::size_t restarts = 0;
  std::size_t dimension = 0;
  std::size_t diameter = 0;

  nlohmann::json to_json() const;
};

// Ratio sum_x ||phi(x) - v||_p^2 / sum_edges ||phi(x) - phi(y)||_p^2 at the
// minimizing v; phi is order x d, row per vertex.
double poincare_ratio(const CayleyGraph& g, const Eigen::MatrixXd& phi, double p);

// argmin_v sum_x ||phi(x) - v||_p^2.
Eigen::VectorXd best_translate(const Eigen::MatrixXd& phi, double p);

PoincareReport poincare_constants(const CayleyGraph& g, const PoincareOptions& options = {},
                                  const SpectralGapResult* gap = nullptr);

// Eccentricity of the identity, which is the diameter for Cayley graphs.
std::size_t diameter(const CayleyGraph& g);

std::string export_dot(const CayleyGraph& g);
std::string export_csv(const CayleyGraph& g);
nlohmann::json export_json(const CayleyGraph& g);
CayleyGraph import_json(const nlohmann::json& j);

}  // namespace robust_t
