#include "robust_t/expander_forge.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "robust_t/error.hpp"
#include "robust_t/json_io.hpp"
#include "robust_t/parallel.hpp"
#include "robust_t/random.hpp"

namespace robust_t {

PolyRing::PolyRing(std::uint32_t q, std::size_t k) : q_(q), k_(k) {
  if (!is_prime(q) || q > 251)
    throw Error("ring.q", "q must be a prime no larger than 251", {{"q", std::to_string(q)}});
  if (k < 1) throw Error("ring.k", "truncation degree must be at least 1", {{"k", std::to_string(k)}});
}

std::uint64_t PolyRing::size() const {
  std::uint64_t s = 1;
  for (std::size_t i = 0; i < k_; ++i) s *= q_;
  return s;
}

PolyRing::Poly PolyRing::one() const { return constant(1); }

PolyRing::Poly PolyRing::constant(std::uint32_t a) const { return monomial(a, 0); }

PolyRing::Poly PolyRing::monomial(std::uint32_t a, std::size_t degree) const {
  Poly p(k_, 0);
  if (degree < k_) p[degree] = static_cast<std::uint8_t>(a % q_);
  return p;
}

PolyRing::Poly PolyRing::add(const Poly& a, const Poly& b) const {
  Poly c(k_);
  for (std::size_t i = 0; i < k_; ++i) c[i] = static_cast<std::uint8_t>((a[i] + b[i]) % q_);
  return c;
}

PolyRing::Poly PolyRing::neg(const Poly& a) const {
  Poly c(k_);
  for (std::size_t i = 0; i < k_; ++i) c[i] = static_cast<std::uint8_t>((q_ - a[i]) % q_);
  return c;
}

PolyRing::Poly PolyRing::mul(const Poly& a, const Poly& b) const {
  Poly c(k_, 0);
  for (std::size_t i = 0; i < k_; ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; i + j < k_; ++j) c[i + j] = static_cast<std::uint8_t>((c[i + j] + a[i] * b[j]) % q_);
  }
  return c;
}

bool PolyRing::check_axioms(std::uint64_t seed, std::size_t samples) const {
  auto rng = make_rng(seed, 0);
  std::uniform_int_distribution<std::uint32_t> coef(0, q_ - 1);
  const auto draw = [&] {
    Poly p(k_);
    for (auto& c : p) c = static_cast<std::uint8_t>(coef(rng));
    return p;
  };
  for (std::size_t s = 0; s < samples; ++s) {
    const Poly a = draw(), b = draw(), c = draw();
    if (mul(mul(a, b), c) != mul(a, mul(b, c))) return false;
    if (mul(a, add(b, c)) != add(mul(a, b), mul(a, c))) return false;
    if (add(add(a, b), c) != add(a, add(b, c))) return false;
    if (mul(a, b) != mul(b, a) || add(a, b) != add(b, a)) return false;
    if (mul(a, one()) != a || add(a, zero()) != a || add(a, neg(a)) != zero()) return false;
  }
  return true;
}

std::string PolyRing::to_string(const Poly& a) const {
  std::string out;
  for (std::size_t d = 0; d < k_; ++d) {
    if (!a[d]) continue;
    if (!out.empty()) out += '+';
    const bool show_coef = d == 0 || a[d] != 1;
    if (show_coef) out += std::to_string(a[d]);
    if (d >= 1) out += 't';
    if (d >= 2) out += '^' + std::to_string(d);
  }
  return out.empty() ? "0" : out;
}

MatrixAlgebra::MatrixAlgebra(std::size_t n, PolyRing ring) : n_(n), ring_(std::move(ring)) {
  if (n < 2) throw Error("matrix.n", "matrix size must be at least 2", {{"n", std::to_string(n)}});
}

std::string MatrixAlgebra::identity() const {
  const std::size_t k = ring_.k();
  std::string m(n_ * n_ * k, '\0');
  for (std::size_t i = 0; i < n_; ++i) m[(i * n_ + i) * k] = 1;
  return m;
}

std::string MatrixAlgebra::elementary(std::size_t i, std::size_t j, const PolyRing::Poly& s) const {
  if (i < 1 || j < 1 || i > n_ || j > n_ || i == j)
    throw Error("matrix.elementary", "elementary matrix needs 1 <= i != j <= n");
  std::string m = identity();
  const std::size_t k = ring_.k();
  for (std::size_t d = 0; d < k; ++d) m[((i - 1) * n_ + (j - 1)) * k + d] = static_cast<char>(s[d]);
  return m;
}

std::string MatrixAlgebra::mul(const std::string& a, const std::string& b) const {
  const std::size_t k = ring_.k();
  const std::uint32_t q = ring_.q();
  std::string c(n_ * n_ * k, '\0');
  std::vector<std::uint32_t> acc(k);
  const auto* A = reinterpret_cast<const std::uint8_t*>(a.data());
  const auto* B = reinterpret_cast<const std::uint8_t*>(b.data());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      std::fill(acc.begin(), acc.end(), 0u);
      for (std::size_t l = 0; l < n_; ++l) {
        const std::uint8_t* x = A + (i * n_ + l) * k;
        const std::uint8_t* y = B + (l * n_ + j) * k;
        for (std::size_t d1 = 0; d1 < k; ++d1) {
          if (!x[d1]) continue;
          for (std::size_t d2 = 0; d1 + d2 < k; ++d2) acc[d1 + d2] += std::uint32_t{x[d1]} * y[d2];
        }
      }
      for (std::size_t d = 0; d < k; ++d) c[(i * n_ + j) * k + d] = static_cast<char>(acc[d] % q);
    }
  return c;
}

PolyRing::Poly MatrixAlgebra::entry(const std::string& m, std::size_t i, std::size_t j) const {
  const std::size_t k = ring_.k();
  PolyRing::Poly p(k);
  for (std::size_t d = 0; d < k; ++d) p[d] = static_cast<std::uint8_t>(m[(i * n_ + j) * k + d]);
  return p;
}

std::string MatrixAlgebra::to_string(const std::string& m) const {
  std::string out = "[";
  for (std::size_t i = 0; i < n_; ++i) {
    out += i ? ",[" : "[";
    for (std::size_t j = 0; j < n_; ++j) {
      if (j) out += ',';
      out += ring_.to_string(entry(m, i, j));
    }
    out += ']';
  }
  return out + "]";
}

std::string MatrixAlgebra::reduce(const std::string& m, const MatrixAlgebra& target) const {
  if (target.n_ != n_ || target.ring_.q() != ring_.q() || target.ring_.k() > ring_.k())
    throw Error("matrix.reduce", "reduction needs the same n and q and a smaller truncation degree");
  const std::size_t k = ring_.k(), k2 = target.ring_.k();
  std::string out(n_ * n_ * k2, '\0');
  for (std::size_t e = 0; e < n_ * n_; ++e)
    for (std::size_t d = 0; d < k2; ++d) out[e * k2 + d] = m[e * k + d];
  return out;
}

GeneratorSet root_generators(const MatrixAlgebra& algebra) {
  const std::size_t n = algebra.n();
  const PolyRing& ring = algebra.ring();
  const std::string id = algebra.identity();
  GeneratorSet gs;
  std::set<std::string> seen;
  const auto add = [&](const std::string& label, const std::string& m) {
    if (m == id) {
      gs.degenerate.push_back(label);
      return;
    }
    if (seen.insert(m).second) {
      gs.labels.push_back(label);
      gs.matrices.push_back(m);
    }
  };
  const auto label = [&](std::size_t i, std::size_t j, const PolyRing::Poly& s) {
    return "e" + std::to_string(i) + std::to_string(j) + "(" + ring.to_string(s) + ")";
  };
  const auto raw_label = [&](std::size_t i, std::size_t j, std::uint32_t a, const char* var) {
    return "e" + std::to_string(i) + std::to_string(j) + "(" + std::to_string(a) + var + ")";
  };
  for (std::uint32_t a = 1; a < ring.q(); ++a) {
    for (std::size_t i = 1; i < n; ++i) add(label(i, i + 1, ring.constant(a)), algebra.elementary(i, i + 1, ring.constant(a)));
    add(label(n, 1, ring.constant(a)), algebra.elementary(n, 1, ring.constant(a)));
    const auto at = ring.monomial(a, 1);
    add(ring.k() > 1 ? label(n, 1, at) : raw_label(n, 1, a, "t"), algebra.elementary(n, 1, at));
  }
  // Root subgroups are closed under inverses already; this keeps S = S^{-1} for any edit above.
  for (std::size_t s = 0; s < gs.matrices.size(); ++s) {
    const std::string& m = gs.matrices[s];
    std::string inv = id;
    for (std::string x = m; x != id; x = algebra.mul(x, m)) inv = x;
    if (!seen.count(inv)) {
      seen.insert(inv);
      gs.labels.push_back(gs.labels[s] + "^-1");
      gs.matrices.push_back(inv);
    }
  }
  return gs;
}

bool generates_elementary_group(std::size_t n, std::size_t k, bool include_t_generator) {
  if (n < 2 || k < 1) throw Error("matrix.n", "need n >= 2 and k >= 1");
  // reach[i][j][d]: the root subgroup e_{i,j}(F_q t^d) lies in the generated group.
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> reach;
  for (std::size_t i = 1; i < n; ++i) reach.emplace(i, i + 1, 0);
  reach.emplace(n, 1, 0);
  if (include_t_generator && k > 1) reach.emplace(n, 1, 1);
  bool grew = true;
  while (grew) {
    grew = false;
    const auto snapshot = reach;
    // [e_ij(a t^d1), e_jl(b t^d2)] = e_il(ab t^{d1+d2}) for i != l.
    for (const auto& [i, j, d1] : snapshot)
      for (const auto& [j2, l, d2] : snapshot)
        if (j2 == j && i != l && d1 + d2 < k && reach.emplace(i, l, d1 + d2).second) grew = true;
  }
  return reach.size() == n * (n - 1) * k;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> CayleyGraph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(order * valency / 2);
  for (std::size_t v = 0; v < order; ++v)
    for (std::size_t s = 0; s < valency; ++s) {
      const std::uint32_t u = neighbor(v, s);
      if (v < u) out.emplace_back(static_cast<std::uint32_t>(v), u);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool CayleyGraph::is_connected() const {
  if (order == 0) return false;
  std::vector<char> seen(order, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (std::size_t s = 0; s < valency; ++s) {
      const auto u = neighbor(v, s);
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == order;
}

void CayleyGraph::validate() const {
  if (order == 0 || valency == 0) throw Error("graph.empty", "graph needs vertices and a nonempty generating set");
  if (neighbors.size() != order * valency) throw Error("graph.shape", "neighbor table has the wrong size");
  std::vector<std::uint32_t> sorted_row(valency);
  for (std::size_t v = 0; v < order; ++v) {
    for (std::size_t s = 0; s < valency; ++s) {
      const auto u = neighbor(v, s);
      if (u >= order) throw Error("graph.range", "neighbor index out of range");
      if (u == v) throw Error("graph.loop", "graph has a loop", {{"vertex", std::to_string(v)}});
      sorted_row[s] = u;
    }
    std::sort(sorted_row.begin(), sorted_row.end());
    if (std::adjacent_find(sorted_row.begin(), sorted_row.end()) != sorted_row.end())
      throw Error("graph.multi_edge", "graph has a repeated edge", {{"vertex", std::to_string(v)}});
  }
  // Symmetry: every neighbor of v lists v back.
  for (std::size_t v = 0; v < order; ++v)
    for (std::size_t s = 0; s < valency; ++s) {
      const auto u = neighbor(v, s);
      bool back = false;
      for (std::size_t t = 0; t < valency && !back; ++t) back = neighbor(u, t) == v;
      if (!back) throw Error("graph.asymmetric", "generating set is not closed under inverses");
    }
  if (!is_connected()) throw Error("graph.disconnected", "generating set does not generate the group");
}

CayleyGraph CayleyGraph::from_group(const GroupTable& group, std::vector<Element> generators) {
  std::set<Element> s(generators.begin(), generators.end());
  for (Element g : generators) s.insert(group.inv(g));
  if (s.count(group.identity())) throw Error("graph.loop", "generating set contains the identity");
  CayleyGraph g;
  g.order = group.order();
  g.valency = s.size();
  g.identity = 0;
  for (std::size_t v = 0; v < g.order; ++v) g.vertex_labels.push_back(std::to_string(v));
  for (Element x : s) g.generator_labels.push_back(std::to_string(x));
  g.neighbors.resize(g.order * g.valency);
  for (std::size_t v = 0; v < g.order; ++v) {
    std::size_t i = 0;
    for (Element x : s) g.neighbors[v * g.valency + i++] = group.mul(static_cast<Element>(v), x);
  }
  g.validate();
  return g;
}

ElementaryQuotient build_quotient(std::size_t n, std::uint32_t q, std::size_t k, std::size_t cap) {
  if (n < 3) throw Error("expander.n", "congruence quotients need n >= 3", {{"n", std::to_string(n)}});
  ElementaryQuotient out{MatrixAlgebra(n, PolyRing(q, k)), {}, {}, {}, {}};
  out.generators = root_generators(out.algebra);
  const auto& S = out.generators.matrices;

  std::unordered_map<std::string, std::uint32_t> bfs_index;
  std::vector<std::string> bfs_order;
  const std::string id = out.algebra.identity();
  bfs_index.emplace(id, 0);
  bfs_order.push_back(id);
  for (std::size_t head = 0; head < bfs_order.size(); ++head) {
    const std::string g = bfs_order[head];
    for (const auto& s : S) {
      std::string h = out.algebra.mul(g, s);
      if (bfs_index.count(h)) continue;
      if (bfs_order.size() >= cap)
        throw Error("expander.cap", "group order exceeds the vertex cap; try smaller n, q or k",
                    {{"cap", std::to_string(cap)}, {"n", std::to_string(n)}, {"q", std::to_string(q)},
                     {"k", std::to_string(k)}});
      bfs_index.emplace(h, static_cast<std::uint32_t>(bfs_order.size()));
      bfs_order.push_back(std::move(h));
    }
  }

  out.elements = std::move(bfs_order);
  std::sort(out.elements.begin(), out.elements.end());
  out.index.reserve(out.elements.size());
  for (std::size_t i = 0; i < out.elements.size(); ++i) out.index.emplace(out.elements[i], static_cast<std::uint32_t>(i));

  CayleyGraph& g = out.graph;
  g.order = out.elements.size();
  g.valency = S.size();
  g.identity = out.index.at(id);
  g.generator_labels = out.generators.labels;
  g.vertex_labels.reserve(g.order);
  for (const auto& e : out.elements) g.vertex_labels.push_back(out.algebra.to_string(e));
  g.neighbors.resize(g.order * g.valency);
  for (std::size_t v = 0; v < g.order; ++v)
    for (std::size_t s = 0; s < S.size(); ++s) g.neighbors[v * g.valency + s] = out.index.at(out.algebra.mul(out.elements[v], S[s]));
  g.validate();
  return out;
}

std::vector<std::uint32_t> reduction_map(const ElementaryQuotient& upper, const ElementaryQuotient& lower) {
  std::vector<std::uint32_t> map(upper.order());
  std::vector<char> hit(lower.order(), 0);
  for (std::size_t v = 0; v < upper.order(); ++v) {
    const auto it = lower.index.find(upper.algebra.reduce(upper.elements[v], lower.algebra));
    if (it == lower.index.end()) throw Error("expander.reduce", "reduced matrix is not in the target group");
    map[v] = it->second;
    hit[it->second] = 1;
  }
  if (std::find(hit.begin(), hit.end(), 0) != hit.end())
    throw Error("expander.reduce", "reduction map is not surjective");
  return map;
}

namespace {

// y = (A/D) x restricted to the complement of the constants.
void apply_walk(const CayleyGraph& g, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const double inv_d = 1.0 / static_cast<double>(g.valency);
  for (std::size_t v = 0; v < g.order; ++v) {
    double acc = 0.0;
    for (std::size_t s = 0; s < g.valency; ++s) acc += x[g.neighbor(v, s)];
    y[static_cast<Eigen::Index>(v)] = acc * inv_d;
  }
  y.array() -= y.mean();
}

}  // namespace

SpectralGapResult spectral_gap(const CayleyGraph& g, const SpectralGapOptions& opt) {
  if (g.order < 2) throw Error("graph.trivial", "spectral gap needs at least two vertices");
  if (!g.is_connected()) throw Error("graph.disconnected", "spectral gap needs a connected graph");
  const auto n = static_cast<Eigen::Index>(g.order);
  const Eigen::Index m = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::max<std::size_t>(opt.krylov_dim, 2)));

  auto rng = make_rng(opt.seed, 0);
  std::normal_distribution<double> nd;
  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = nd(rng);
  start.array() -= start.mean();
  start.normalize();

  SpectralGapResult res;
  Eigen::MatrixXd V(n, m + 1);
  Eigen::VectorXd w(n);
  for (std::size_t restart = 0; restart < opt.max_restarts; ++restart) {
    res.restarts = restart + 1;
    std::vector<double> alpha, beta;
    V.col(0) = start;
    Eigen::Index steps = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      apply_walk(g, V.col(j), w);
      alpha.push_back(V.col(j).dot(w));
      // Full reorthogonalization, twice.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd coef = V.leftCols(j + 1).transpose() * w;
        w -= V.leftCols(j + 1) * coef;
        w.array() -= w.mean();
      }
      steps = j + 1;
      const double b = w.norm();
      if (b < 1e-12 || j + 1 == m) break;
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (Eigen::Index i = 0; i < steps; ++i) {
      T(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < steps) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double theta = es.eigenvalues()(steps - 1);
    Eigen::VectorXd y = V.leftCols(steps) * es.eigenvectors().col(steps - 1);
    y.array() -= y.mean();
    y.normalize();
    apply_walk(g, y, w);
    res.residual = (w - theta * y).norm();
    res.mu2 = theta;
    res.eigenvector = y;
    if (res.residual <= opt.tol) break;
    if (restart + 1 == opt.max_restarts)
      throw Error("expander.eigensolver", "Lanczos did not converge",
                  {{"residual", std::to_string(res.residual)}, {"restarts", std::to_string(opt.max_restarts)}});
    start = y;
  }
  // Rayleigh quotient of the final vector is the sharper estimate.
  apply_walk(g, res.eigenvector, w);
  res.mu2 = res.eigenvector.dot(w);
  res.gap = 1.0 - res.mu2;
  return res;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ||a - b||_p^2 for rows of length d.
double dist_sq(const double* a, const double* b, Eigen::Index d, double p) {
  if (p == 2.0) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  }
  double m = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) s += std::pow(std::abs(a[i] - b[i]) / m, p);
  const double r = m * std::pow(s, 1.0 / p);
  return r * r;
}

// out += scale * grad_a ||a - b||_p^2, where the gradient is 2 ||w||^{2-p} sign(w) |w|^{p-1}.
void add_grad(const double* a, const double* b, Eigen::Index d, double p, double scale, double* out) {
  if (p == 2.0) {
    for (Eigen::Index i = 0; i < d; ++i) out[i] += scale * 2.0 * (a[i] - b[i]);
    return;
  }
  const double nrm = std::sqrt(dist_sq(a, b, d, p));
  if (nrm == 0.0) return;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double w = a[i] - b[i];
    if (w == 0.0) continue;
    out[i] += scale * 2.0 * (w > 0 ? 1.0 : -1.0) * std::pow(std::abs(w) / nrm, p - 1.0) * nrm;
  }
}

double translate_cost(const RowMatrix& phi, const Eigen::RowVectorXd& v, double p) {
  double s = 0.0;
  for (Eigen::Index x = 0; x < phi.rows(); ++x) s += dist_sq(phi.row(x).data(), v.data(), phi.cols(), p);
  return s;
}

double edge_energy(const CayleyGraph& g, const RowMatrix& phi, double p) {
  double s = 0.0;
  for (std::size_t v = 0; v < g.order; ++v)
    for (std::size_t k = 0; k < g.valency; ++k) {
      const auto u = g.neighbor(v, k);
      if (v < u) s += dist_sq(phi.row(static_cast<Eigen::Index>(v)).data(), phi.row(u).data(), phi.cols(), p);
    }
  return s;
}

// Descent on the convex map v -> sum_x ||phi(x) - v||_p^2. `step` persists
// between calls so warm starts stay cheap.
double minimize_translate(const RowMatrix& phi, double p, Eigen::RowVectorXd& v, int max_iter, double& step) {
  if (p == 2.0) {
    v = phi.colwise().mean();
    return translate_cost(phi, v, p);
  }
  const Eigen::Index d = phi.cols();
  double f = translate_cost(phi, v, p);
  Eigen::RowVectorXd grad(d);
  for (int it = 0; it < max_iter; ++it) {
    grad.setZero();
    for (Eigen::Index x = 0; x < phi.rows(); ++x) add_grad(v.data(), phi.row(x).data(), d, p, 1.0, grad.data());
    if (grad.norm() <= 1e-15 * std::max(1.0, f)) break;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::RowVectorXd cand = v - step * grad;
      const double fc = translate_cost(phi, cand, p);
      if (fc < f) {
        v = cand;
        f = fc;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return f;
}

RowMatrix to_rows(const Eigen::MatrixXd& phi) { return phi; }

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error("poincare.p", "p must lie in [1, inf)", {{"p", std::to_string(p)}});
}

}  // namespace

Eigen::VectorXd best_translate(const Eigen::MatrixXd& phi, double p) {
  check_p(p);
  const RowMatrix rows = to_rows(phi);
  Eigen::RowVectorXd v = rows.colwise().mean();
  double step = 1.0 / static_cast<double>(std::max<Eigen::Index>(rows.rows(), 1));
  minimize_translate(rows, p, v, 5000, step);
  return v.transpose();
}

double poincare_ratio(const CayleyGraph& g, const Eigen::MatrixXd& phi, double p) {
  check_p(p);
  if (static_cast<std::size_t>(phi.rows()) != g.order) throw Error("poincare.shape", "map needs one row per vertex");
  const RowMatrix rows = to_rows(phi);
  const double den = edge_energy(g, rows, p);
  if (den == 0.0) return 0.0;  // constant map: both sides vanish
  Eigen::RowVectorXd v = rows.colwise().mean();
  double step = 1.0 / static_cast<double>(rows.rows());
  return minimize_translate(rows, p, v, 5000, step) / den;
}

std::size_t diameter(const CayleyGraph& g) {
  std::vector<std::uint32_t> dist(g.order, std::numeric_limits<std::uint32_t>::max());
  std::deque<std::uint32_t> queue{g.identity};
  dist[g.identity] = 0;
  std::size_t far = 0;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    far = std::max<std::size_t>(far, dist[v]);
    for (std::size_t s = 0; s < g.valency; ++s) {
      const auto u = g.neighbor(v, s);
      if (dist[u] == std::numeric_limits<std::uint32_t>::max()) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return far;
}

PoincareReport poincare_constants(const CayleyGraph& g, const PoincareOptions& opt, const SpectralGapResult* gap) {
  if (!g.is_connected()) throw Error("graph.disconnected", "Poincare constants need a connected graph");
  for (double p : opt.p_values) check_p(p);
  SpectralGapResult own;
  if (!gap) {
    own = spectral_gap(g, {opt.seed});
    gap = &own;
  }
  PoincareReport rep;
  rep.order = g.order;
  rep.valency = g.valency;
  rep.lambda2 = gap->gap;
  rep.c_l2 = 1.0 / (static_cast<double>(g.valency) * gap->gap);
  rep.restarts = opt.restarts;
  rep.dimension = opt.dimension;
  rep.diameter = diameter(g);

  const auto n = static_cast<Eigen::Index>(g.order);
  const auto d = static_cast<Eigen::Index>(std::max<std::size_t>(opt.dimension, 1));
  const std::size_t restarts = std::max<std::size_t>(opt.restarts, 1);
  for (std::size_t pi = 0; pi < opt.p_values.size(); ++pi) {
    const double p = opt.p_values[pi];
    std::vector<double> best(restarts, 0.0);
    parallel_for(restarts, [&](std::size_t r) {
      auto rng = make_rng(opt.seed, 1000 * (pi + 1) + r);
      std::normal_distribution<double> nd;
      // Start near the lambda_2 eigenvector, which is optimal for p = 2.
      RowMatrix phi(n, d);
      const double noise = r == 0 ? 0.0 : 0.3 / std::sqrt(static_cast<double>(n));
      for (Eigen::Index c = 0; c < d; ++c) {
        const double a = r == 0 ? (c == 0 ? 1.0 : 0.0) : nd(rng);
        for (Eigen::Index x = 0; x < n; ++x) phi(x, c) = a * gap->eigenvector[x] + noise * nd(rng);
      }
      Eigen::RowVectorXd v = phi.colwise().mean();
      double vstep = 1.0 / static_cast<double>(n);
      double num = minimize_translate(phi, p, v, 50, vstep);
      double den = edge_energy(g, phi, p);
      double step = 0.1;
      RowMatrix grad(n, d);
      double checkpoint = num / den;
      for (std::size_t it = 0; it < opt.iterations && step > 1e-6 && num > 0.0 && den > 0.0; ++it) {
        if (it % 25 == 24) {
          // Stalled: less than 1e-7 relative progress in 25 steps.
          if (num / den <= checkpoint * (1.0 + 1e-7)) break;
          checkpoint = num / den;
        }
        // Gradient of log(num) - log(den) with the translate held fixed;
        // column means are removed since translations leave the ratio alone.
        grad.setZero();
        for (Eigen::Index x = 0; x < n; ++x) add_grad(phi.row(x).data(), v.data(), d, p, 1.0 / num, grad.row(x).data());
        for (std::size_t vtx = 0; vtx < g.order; ++vtx)
          for (std::size_t k = 0; k < g.valency; ++k) {
            const auto u = g.neighbor(vtx, k);
            if (vtx >= u) continue;
            const auto x = static_cast<Eigen::Index>(vtx);
            add_grad(phi.row(x).data(), phi.row(u).data(), d, p, -1.0 / den, grad.row(x).data());
            add_grad(phi.row(u).data(), phi.row(x).data(), d, p, -1.0 / den, grad.row(u).data());
          }
        grad.rowwise() -= grad.colwise().mean();
        const double gn = grad.norm();
        if (gn == 0.0) break;
        RowMatrix cand = phi + (step * phi.norm() / gn) * grad;
        const double scale = 1.0 / cand.norm();
        cand *= scale;
        Eigen::RowVectorXd cv = v * scale;
        double cstep = vstep;
        const double cnum = minimize_translate(cand, p, cv, 3, cstep);
        const double cden = edge_energy(g, cand, p);
        if (cden > 0.0 && cnum / cden > num / den) {
          phi = std::move(cand);
          v = cv;
          vstep = cstep;
          num = cnum;
          den = cden;
          step *= 1.3;
        } else {
          step *= 0.5;
        }
      }
      best[r] = poincare_ratio(g, phi, p);
    });
    rep.c_lp_lower[p] = *std::max_element(best.begin(), best.end());
  }
  return rep;
}

nlohmann::json PoincareReport::to_json() const {
  nlohmann::json lp = nlohmann::json::object();
  for (const auto& [p, v] : c_lp_lower) lp[number_key(p)] = v;
  return {{"order", order},
          {"valency", valency},
          {"gap", lambda2},
          {"c_l2", c_l2},
          {"c_lp", lp},
          {"c_lp_restarts", restarts},
          {"c_lp_dimension", dimension},
          {"c_lp_kind", "lower bound"},
          {"diameter", diameter},
          {"edge_convention", "unordered edges counted once; left side sum_x ||phi(x) - v(phi)||^2"}};
}

std::string export_dot(const CayleyGraph& g) {
  std::ostringstream os;
  os << "graph cayley {\n";
  for (std::size_t v = 0; v < g.order; ++v) os << "  " << v << " [label=\"" << g.vertex_labels[v] << "\"];\n";
  for (const auto& [u, v] : g.edges()) os << "  " << u << " -- " << v << ";\n";
  os << "}\n";
  return os.str();
}

std::string export_csv(const CayleyGraph& g) {
  std::ostringstream os;
  for (const auto& [u, v] : g.edges()) os << u << ',' << v << '\n';
  return os.str();
}

nlohmann::json export_json(const CayleyGraph& g) {
  nlohmann::json nb = nlohmann::json::array();
  for (std::size_t v = 0; v < g.order; ++v) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t s = 0; s < g.valency; ++s) row.push_back(g.neighbor(v, s));
    nb.push_back(std::move(row));
  }
  return {{"order", g.order},         {"valency", g.valency}, {"identity", g.identity},
          {"vertex_labels", g.vertex_labels}, {"generator_labels", g.generator_labels}, {"neighbors", nb}};
}

CayleyGraph import_json(const nlohmann::json& j) {
  try {
    CayleyGraph g;
    g.order = j.at("order").get<std::size_t>();
    g.valency = j.at("valency").get<std::size_t>();
    g.identity = j.value("identity", std::uint32_t{0});
    g.vertex_labels = j.at("vertex_labels").get<std::vector<std::string>>();
    g.generator_labels = j.at("generator_labels").get<std::vector<std::string>>();
    const auto& nb = j.at("neighbors");
    if (nb.size() != g.order || g.vertex_labels.size() != g.order || g.generator_labels.size() != g.valency)
      throw Error("graph.json", "graph JSON sizes are inconsistent");
    g.neighbors.reserve(g.order * g.valency);
    for (const auto& row : nb) {
      if (row.size() != g.valency) throw Error("graph.json", "neighbor row has the wrong length");
      for (const auto& u : row) g.neighbors.push_back(u.get<std::uint32_t>());
    }
    if (g.identity >= g.order) throw Error("graph.json", "identity index out of range");
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error("graph.json", std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace robust_t
