#include "robust_t/coset_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "robust_t/error.hpp"
#include "robust_t/group_algebra.hpp"
#include "robust_t/json_io.hpp"

namespace robust_t {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

bool connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& [a, b] : edges) {
    const auto ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

std::vector<std::pair<std::size_t, std::size_t>> global_edges(const BipartiteGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(g.edges.size());
  for (const auto& [a, b] : g.edges) out.emplace_back(a, g.v1_size + b);
  return out;
}

}  // namespace

bool BipartiteGraph::is_connected() const { return connected(vertex_count(), global_edges(*this)); }

std::optional<std::size_t> BipartiteGraph::side_degree(int side) const {
  const std::size_t begin = side == 1 ? 0 : v1_size;
  const std::size_t end = side == 1 ? v1_size : vertex_count();
  if (begin == end) return std::nullopt;
  for (std::size_t v = begin + 1; v < end; ++v)
    if (degrees[v] != degrees[begin]) return std::nullopt;
  return degrees[begin];
}

BipartiteGraph bipartite_from_edges(std::size_t v1_size, std::size_t v2_size,
                                    std::vector<std::pair<std::size_t, std::size_t>> edges) {
  if (v1_size == 0 || v2_size == 0)
    throw Error("graph.empty_side", "both sides of a bipartite graph must be nonempty");
  BipartiteGraph g;
  g.v1_size = v1_size;
  g.v2_size = v2_size;
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw Error("graph.multi_edge", "duplicate edge in bipartite edge list");
  g.degrees.assign(v1_size + v2_size, 0);
  for (const auto& [a, b] : edges) {
    if (a >= v1_size || b >= v2_size)
      throw Error("graph.range", "edge endpoint out of range", {{"v1", str(a)}, {"v2", str(b)}});
    ++g.degrees[a];
    ++g.degrees[v1_size + b];
  }
  g.edges = std::move(edges);
  return g;
}

BipartiteCosetGraph build_coset_graph(const Subgroup& k1, const Subgroup& k2) {
  if (k1.parent() != k2.parent())
    throw Error("coset.parent_mismatch", "subgroups must share a parent group");
  const GroupPtr& parent = k1.parent();
  std::vector<Element> seeds = k1.elements();
  seeds.insert(seeds.end(), k2.elements().begin(), k2.elements().end());
  const Subgroup generated = closure(parent, seeds);
  if (generated.size() != parent->order())
    throw Error("coset.not_generating", "K1 and K2 do not generate the parent group",
                {{"closure_order", str(generated.size())}, {"parent_order", str(parent->order())}});

  BipartiteCosetGraph out{{}, right_cosets(k1), right_cosets(k2), 0, 0};
  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (std::size_t g = 0; g < parent->order(); ++g) edge_set.emplace(out.v1.coset_of[g], out.v2.coset_of[g]);
  out.graph = bipartite_from_edges(out.v1.cosets.size(), out.v2.cosets.size(),
                                   {edge_set.begin(), edge_set.end()});

  const std::size_t meet = intersection(k1, k2).size();
  out.l1 = k1.size() / meet;
  out.l2 = k2.size() / meet;
  const auto d1 = out.graph.side_degree(1), d2 = out.graph.side_degree(2);
  if (!d1 || !d2 || *d1 != out.l1 || *d2 != out.l2 || out.graph.edges.size() != parent->order() / meet)
    throw Error("coset.semi_regular", "coset graph failed the semi-regularity check",
                {{"l1", str(out.l1)}, {"l2", str(out.l2)}, {"edges", str(out.graph.edges.size())}});
  if (!out.graph.is_connected())
    throw Error("coset.disconnected", "coset graph of generating subgroups must be connected");
  return out;
}

LaplacianSpectrum normalized_laplacian_spectrum(std::size_t n,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (!connected(n, edges))
    throw Error("graph.disconnected", "normalized Laplacian spectrum requires a connected graph");
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : edges) {
    if (a == b) throw Error("graph.loop", "loops are not allowed", {{"vertex", str(a)}});
    adj(a, b) += 1.0;
    adj(b, a) += 1.0;
  }
  const Eigen::VectorXd deg = adj.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = deg.array().rsqrt();
  // D^{1/2} Delta D^{-1/2} = I - D^{-1/2} A D^{-1/2} is symmetric.
  const Eigen::MatrixXd sym = Eigen::MatrixXd::Identity(n, n) - inv_sqrt.asDiagonal() * adj * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("graph.eigensolver", "symmetric eigensolver failed");

  LaplacianSpectrum out;
  out.eigenvalues = solver.eigenvalues();
  for (auto& e : out.eigenvalues) {
    if (e < 0.0 && e > -1e-10) e = 0.0;
    if (e > 2.0 && e < 2.0 + 1e-10) e = 2.0;
  }
  out.eigenvectors = inv_sqrt.asDiagonal() * solver.eigenvectors();
  out.weights = deg;
  return out;
}

LaplacianSpectrum laplacian_spectrum(const BipartiteGraph& g) {
  return normalized_laplacian_spectrum(g.vertex_count(), global_edges(g));
}

LaplacianSpectrum laplacian_spectrum(const BipartiteCosetGraph& g) { return laplacian_spectrum(g.graph); }

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> half_step_operators(const BipartiteGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(n, n), m2 = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : g.edges) {
    const auto u = static_cast<Eigen::Index>(a);
    const auto v = static_cast<Eigen::Index>(g.v1_size + b);
    m1(u, v) += 1.0 / static_cast<double>(g.degrees[a]);
    m2(v, u) += 1.0 / static_cast<double>(g.degrees[g.v1_size + b]);
  }
  return {m1, m2};
}

double schatten_norm(const std::vector<double>& singular_values, double r) {
  if (!(r >= 1.0)) throw Error("schatten.r_range", "Schatten exponent must be >= 1");
  if (std::isinf(r)) {
    double m = 0.0;
    for (double s : singular_values) m = std::max(m, std::abs(s));
    return m;
  }
  double acc = 0.0;
  for (double s : singular_values) acc += std::pow(std::abs(s), r);
  return std::pow(acc, 1.0 / r);
}

std::vector<double> regular_rep_singular_values(const Subgroup& k1, const Subgroup& k2) {
  const GroupPtr& group = k1.parent();
  const Subgroup k12 = closure(group, [&] {
    std::vector<Element> s = k1.elements();
    s.insert(s.end(), k2.elements().begin(), k2.elements().end());
    return s;
  }());
  const GroupFunction h = convolve(averaging_idempotent(k1), averaging_idempotent(k2)) - averaging_idempotent(k12);
  const auto rep = regular_rep(h);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(rep.matrix);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > kSingularZeroTol) out.push_back(svd.singularValues()[i]);
  std::sort(out.begin(), out.end());
  return out;
}

AngleReport angle_report(const Subgroup& k1, const Subgroup& k2, const std::vector<double>& r_values,
                         std::size_t dense_cap) {
  for (double r : r_values)
    if (!(r >= 1.0)) throw Error("schatten.r_range", "Schatten exponent must be >= 1");
  const BipartiteCosetGraph graph = build_coset_graph(k1, k2);
  const LaplacianSpectrum spectrum = laplacian_spectrum(graph);

  AngleReport rep;
  rep.v1_size = graph.graph.v1_size;
  rep.v2_size = graph.graph.v2_size;
  rep.eta2 = spectrum.gap();
  for (std::size_t i = 1; i < graph.graph.min_side(); ++i) {
    const double s = std::abs(1.0 - spectrum.eigenvalues[static_cast<Eigen::Index>(i)]);
    if (s > kSingularZeroTol) rep.lemma_predicted.push_back(s);
  }
  std::sort(rep.lemma_predicted.begin(), rep.lemma_predicted.end());

  const std::vector<double>* source = &rep.lemma_predicted;
  if (k1.parent()->order() <= std::min(dense_cap, kDenseRegularCap)) {
    rep.oracle_used = true;
    rep.nontrivial_singular_values = regular_rep_singular_values(k1, k2);
    if (rep.nontrivial_singular_values.size() != rep.lemma_predicted.size()) {
      rep.max_discrepancy = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t i = 0; i < rep.lemma_predicted.size(); ++i)
        rep.max_discrepancy = std::max(rep.max_discrepancy,
                                       std::abs(rep.lemma_predicted[i] - rep.nontrivial_singular_values[i]));
    }
    rep.agrees = rep.max_discrepancy <= kLemmaAgreementTol;
    source = &rep.nontrivial_singular_values;
  }
  rep.hilbert_cos = schatten_norm(*source, kInfiniteR);
  for (double r : r_values) rep.schatten[r] = schatten_norm(*source, r);
  return rep;
}

nlohmann::json AngleReport::to_json() const {
  nlohmann::json sch = nlohmann::json::object();
  for (const auto& [r, v] : schatten) sch[number_key(r)] = v;
  return {{"hilbert_cos", hilbert_cos},
          {"schatten", sch},
          {"predicted", lemma_predicted},
          {"oracle", nontrivial_singular_values},
          {"eta2", eta2},
          {"v1_size", v1_size},
          {"v2_size", v2_size},
          {"oracle_used", oracle_used},
          {"max_discrepancy", number_to_json(max_discrepancy)},
          {"agrees", agrees}};
}

LinkTable link_ingest(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("link.format", "link spectra file must be a JSON array");
  if (j.empty()) throw Error("link.format", "link spectra file has no entries");
  LinkTable table;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  try {
    for (const auto& item : j) {
      LinkEntry e;
      const auto pair = item.at("pair").get<std::vector<std::size_t>>();
      if (pair.size() != 2 || pair[0] < 1 || pair[0] >= pair[1])
        throw Error("link.pair", "pair must be [i, j] with 1 <= i < j");
      e.i = pair[0];
      e.j = pair[1];
      if (!seen.emplace(e.i, e.j).second)
        throw Error("link.pair", "duplicate pair", {{"i", str(e.i)}, {"j", str(e.j)}});
      e.v1_size = item.at("v1_size").get<std::size_t>();
      e.v2_size = item.at("v2_size").get<std::size_t>();
      if (e.v1_size == 0 || e.v2_size == 0) throw Error("link.sides", "link sides must be nonempty");
      if (item.contains("edges")) {
        auto edges = item.at("edges").get<std::vector<std::pair<std::size_t, std::size_t>>>();
        const BipartiteGraph g = bipartite_from_edges(e.v1_size, e.v2_size, std::move(edges));
        if (!g.is_connected()) throw Error("link.disconnected", "link graph is disconnected");
        e.eta2 = laplacian_spectrum(g).gap();
        e.from_edges = true;
      } else if (item.contains("eta2")) {
        e.eta2 = item.at("eta2").get<double>();
      } else {
        throw Error("link.format", "entry needs either edges or eta2");
      }
      if (!(e.eta2 > 0.0 && e.eta2 < 2.0))
        throw Error("link.eta_range", "eta2 must lie in (0, 2)", {{"eta2", std::to_string(e.eta2)}});
      table.entries.push_back(e);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error("link.format", std::string("malformed link spectra file: ") + ex.what());
  }
  table.eta = table.entries.front().eta2;
  for (const auto& e : table.entries) {
    table.eta = std::min(table.eta, e.eta2);
    table.L = std::max(table.L, std::min(e.v1_size, e.v2_size));
  }
  return table;
}

LinkTable link_ingest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io.open", "cannot open link spectra file", {{"path", path.string()}});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error("link.format", std::string("link spectra file is not valid JSON: ") + ex.what());
  }
  return link_ingest(j);
}

}  // namespace robust_t
