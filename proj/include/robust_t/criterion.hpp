#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "robust_t/coset_spectra.hpp"

namespace robust_t {

// 1/(8N - 11).
double threshold(std::size_t n);

struct SConstants {
  double s1 = 0.0;  // ln(1 + eps/(2(1-eps)))/2
  double s2 = 0.0;  // ln(1 + 1/(8N))
  double s0 = 0.0;  // min(s1, s2)
};

SConstants s_constants(double epsilon, std::size_t n);

struct ClassParams {
  double delta = 0.0;  // c'/c - 1
  double theta = 1.0;  // (ln 2 - ln c')/(ln 2 - ln c), so that 2 (c/2)^theta = c'
};

// Requires 0 < c <= c' < 2.
ClassParams class_params(double c, double c_prime);

// sum_{i>=1} x^i = x/(1-x) with x = 2^{(r/(r-1))(1/p1 - 1/p2 - 1/r)}. Requires
// 1 < p1 <= 2 <= p2 < inf, 2 <= r < inf and 1/p1 - 1/p2 < 1/r.
double schatten_M(double p1, double p2, double r);

enum class PairKind { commuting, heisenberg, explicit_angle, link };

struct PairData {
  PairKind kind = PairKind::commuting;
  std::uint64_t q = 0;                // heisenberg
  double hilbert_cos = 0.0;           // explicit_angle
  std::map<double, double> schatten;  // explicit_angle: r -> Schatten r-norm
  double eta2 = 0.0;                  // link
  std::size_t v1_size = 0;            // link
  std::size_t v2_size = 0;

  static PairData commuting_pair() { return {}; }
  static PairData heisenberg_pair(std::uint64_t q);
  static PairData explicit_pair(const AngleReport& report);
  static PairData link_pair(double eta2, std::size_t v1_size, std::size_t v2_size);
};

using GeneratorPair = std::pair<std::size_t, std::size_t>;  // 1-based, first < second

// Pairwise data of N generating subgroups. Construction validates that every
// pair is present exactly once and that Heisenberg pairs share one prime q.
class GeneratorScheme {
 public:
  GeneratorScheme(std::size_t n_generators, std::map<GeneratorPair, PairData> pairs, std::string origin = "custom");

  std::size_t n_generators() const noexcept { return n_; }
  const std::map<GeneratorPair, PairData>& pairs() const noexcept { return pairs_; }
  const std::string& origin() const noexcept { return origin_; }
  // Shared prime of the Heisenberg pairs, if any.
  std::optional<std::uint64_t> heisenberg_q() const;
  std::vector<GeneratorPair> pairs_of_kind(PairKind kind) const;
  // max over link pairs of min(|V1|, |V2|).
  std::size_t link_L() const;

  nlohmann::json to_json() const;
  static GeneratorScheme from_json(const nlohmann::json& j);

 private:
  std::size_t n_;
  std::map<GeneratorPair, PairData> pairs_;
  std::string origin_;
};

// Elementary-matrix generators of EL_n over F_q[t_1..t_m]: K_i = x_{i,i+1}(F_q)
// for i < n and K_i = x_{n,1}(F_q t_{i-n}) for n <= i <= n+m (t_0 = 1).
GeneratorScheme steinberg_scheme(std::size_t n, std::size_t m, std::uint64_t q);

// Kac-Moody-Steinberg layout: Heisenberg on edges, commuting elsewhere.
// Vertices are 1..n_vertices; loops and repeated edges are rejected.
GeneratorScheme kms_scheme(std::size_t n_vertices, const std::vector<GeneratorPair>& edges, std::uint64_t q);

// Scheme from link spectra; the table must cover every pair of 1..N with N
// the largest index present.
GeneratorScheme link_scheme(const LinkTable& table);

struct EvaluateOptions {
  std::optional<double> epsilon;  // declared epsilon; derived from the gap when absent
  std::optional<double> c_prime;  // defaults to the midpoint of cos bound and threshold
  std::vector<double> r_grid{2.0, 3.0, 4.0};
  std::vector<double> p1_grid{1.5, 2.0};
  std::vector<double> p2_grid{2.0, 3.0, 4.0};
  double type_constant = 1.0;    // T_{p1}
  double cotype_constant = 1.0;  // C_{p2}
};

enum class BanachClassKind { hilbert_bm_ball, theta_hilbertian, type_cotype };

struct BanachClassDescriptor {
  BanachClassKind kind = BanachClassKind::hilbert_bm_ball;
  double delta = 0.0;  // hilbert_bm_ball
  double theta = 1.0;  // theta_hilbertian; theta_min for type_cotype
  double p1 = 0.0, p2 = 0.0, r = 0.0;
  double type_constant = 1.0, cotype_constant = 1.0;
  std::string provenance;

  nlohmann::json to_json() const;
};

// One (p1, p2, r) grid point of the Schatten route.
struct SchattenGridPoint {
  double p1 = 0.0, p2 = 0.0, r = 0.0;
  bool admissible = false;  // 1/p1 - 1/p2 < 1/r and schatten data available
  double M = 0.0;
  double c = 0.0;           // M * schatten_max(r)
  bool member = false;      // c * T * C <= c'
  std::string note;
};

enum class Verdict { certified, not_certified };

struct CriterionReport {
  std::size_t n_generators = 0;
  std::string origin;
  double threshold = 0.0;
  double cos_max_hilbert = 0.0;
  GeneratorPair binding_pair{0, 0};
  std::map<double, double> schatten_max;
  std::optional<double> epsilon;
  bool epsilon_declared = false;
  std::optional<SConstants> s;
  std::optional<double> c_prime;
  Verdict verdict = Verdict::not_certified;
  std::vector<BanachClassDescriptor> class_params;
  std::vector<SchattenGridPoint> grid;
  std::optional<double> flp_exponent;  // +inf for zero-angle schemes
  std::vector<std::string> inequalities;
  std::vector<std::string> flags;

  bool certified() const noexcept { return verdict == Verdict::certified; }
  nlohmann::json to_json() const;
};

CriterionReport evaluate(const GeneratorScheme& scheme, const EvaluateOptions& options = {});

}  // namespace robust_t
