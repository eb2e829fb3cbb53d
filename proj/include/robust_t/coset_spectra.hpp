#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "robust_t/finite_group.hpp"
#include "robust_t/group_algebra.hpp"

namespace robust_t {

// Bipartite graph with sides V1 = {0..v1_size-1} and V2 = {0..v2_size-1}.
// Global vertex numbering (used by spectra and eigenvectors) puts V1 first.
struct BipartiteGraph {
  std::size_t v1_size = 0;
  std::size_t v2_size = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (v1, v2), sorted, unique
  std::vector<std::size_t> degrees;                         // global numbering

  std::size_t vertex_count() const noexcept { return v1_size + v2_size; }
  std::size_t min_side() const noexcept { return std::min(v1_size, v2_size); }
  bool is_connected() const;
  // Common degree of one side, or nullopt if that side is not regular.
  std::optional<std::size_t> side_degree(int side) const;
};

// Validates indices, removes nothing: duplicate edges are rejected.
BipartiteGraph bipartite_from_edges(std::size_t v1_size, std::size_t v2_size,
                                    std::vector<std::pair<std::size_t, std::size_t>> edges);

// Coset graph of two subgroups: V_i = right cosets K_i g, with K1 g ~ K2 g'
// iff the cosets intersect. Each K1-coset has degree l1 = [K1 : K1 n K2] and
// each K2-coset degree l2 = [K2 : K1 n K2].
struct BipartiteCosetGraph {
  BipartiteGraph graph;
  RightCosetPartition v1;
  RightCosetPartition v2;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
};

BipartiteCosetGraph build_coset_graph(const Subgroup& k1, const Subgroup& k2);

// Spectrum of the normalized Laplacian  (Delta psi)(v) = psi(v) - (1/d(v)) sum_{u~v} psi(u),
// self-adjoint for <a, b> = sum_v d(v) a(v) b(v). Eigenvectors (columns) are
// orthonormal in that inner product.
struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column k belongs to eigenvalues[k]
  Eigen::VectorXd weights;       // d(v)

  double gap() const { return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0; }
};

// General graph on n vertices (edges unordered, no loops). Throws on
// disconnected input.
LaplacianSpectrum normalized_laplacian_spectrum(std::size_t n,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& edges);
LaplacianSpectrum laplacian_spectrum(const BipartiteGraph& g);
LaplacianSpectrum laplacian_spectrum(const BipartiteCosetGraph& g);

// Half-step operators M1 = chi_V1 (I - Delta) chi_V2 and M2 = chi_V2 (I - Delta) chi_V1
// on L^2(V), in global numbering.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> half_step_operators(const BipartiteGraph& g);

inline constexpr double kInfiniteR = std::numeric_limits<double>::infinity();

// (sum s^r)^(1/r); r = infinity gives max.
double schatten_norm(const std::vector<double>& singular_values, double r);

struct AngleReport {
  double hilbert_cos = 0.0;                         // ||lambda(k1 k2 - k12)||
  std::map<double, double> schatten;                // r -> ||lambda(k1 k2 - k12)||_{S^r}
  std::vector<double> nontrivial_singular_values;   // oracle, ascending (empty if oracle skipped)
  std::vector<double> lemma_predicted;              // nonzero |1 - eta_i|, i = 2..min(|V1|,|V2|), ascending
  double eta2 = 0.0;
  std::size_t v1_size = 0;
  std::size_t v2_size = 0;
  bool oracle_used = false;
  double max_discrepancy = 0.0;  // between the two multisets (inf on count mismatch)
  bool agrees = true;            // multisets agree within 1e-9 (true in lemma-only mode)

  nlohmann::json to_json() const;
};

inline constexpr double kSingularZeroTol = 1e-10;
inline constexpr double kLemmaAgreementTol = 1e-9;

// Nonzero singular values of the dense regular-representation matrix of
// k1*k2 - k12, ascending. Requires the parent within kDenseRegularCap.
std::vector<double> regular_rep_singular_values(const Subgroup& k1, const Subgroup& k2);

// Lemma route from the coset graph; the oracle route additionally runs when
// the parent group fits min(dense_cap, kDenseRegularCap).
AngleReport angle_report(const Subgroup& k1, const Subgroup& k2, const std::vector<double>& r_values,
                         std::size_t dense_cap = kDenseRegularCap);

// Link data of one generator pair: either a bipartite graph or a declared eta2.
struct LinkEntry {
  std::size_t i = 0;  // 1-based generator indices, i < j
  std::size_t j = 0;
  double eta2 = 0.0;
  std::size_t v1_size = 0;
  std::size_t v2_size = 0;
  bool from_edges = false;
};

struct LinkTable {
  std::vector<LinkEntry> entries;
  double eta = 0.0;        // binding minimum of eta2
  std::size_t L = 0;       // max over pairs of min(|V1|, |V2|)
};

// JSON array of {pair:[i,j], edges:[[a,b],...] | eta2, v1_size, v2_size};
// edges index V1 and V2 separately.
LinkTable link_ingest(const nlohmann::json& j);
LinkTable link_ingest_file(const std::filesystem::path& path);

}  // namespace robust_t
