#include "robust_t/finite_group.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <random>
#include <unordered_map>

#include "robust_t/error.hpp"

namespace robust_t {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

GroupTable::GroupTable(std::size_t order, std::vector<Element> mul,
                       std::map<std::string, Element> generators)
    : order_(order), mul_(std::move(mul)), generators_(std::move(generators)) {
  if (order_ == 0) throw Error("group.empty", "group order must be positive");
  if (order_ > kMaxTableOrder)
    throw Error("group.too_large", "order exceeds the dense table cap",
                {{"order", str(order_)}, {"cap", str(kMaxTableOrder)}});
  if (mul_.size() != order_ * order_)
    throw Error("group.bad_table", "multiplication table has wrong size",
                {{"expected", str(order_ * order_)}, {"got", str(mul_.size())}});

  std::vector<char> seen(order_);
  for (std::size_t a = 0; a < order_; ++a) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t b = 0; b < order_; ++b) {
      const Element v = mul_[a * order_ + b];
      if (v >= order_ || seen[v])
        throw Error("group.not_latin", "table row is not a permutation", {{"row", str(a)}});
      seen[v] = 1;
    }
  }
  for (std::size_t b = 0; b < order_; ++b) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t a = 0; a < order_; ++a) {
      const Element v = mul_[a * order_ + b];
      if (seen[v])
        throw Error("group.not_latin", "table column is not a permutation", {{"column", str(b)}});
      seen[v] = 1;
    }
  }
  for (std::size_t a = 0; a < order_; ++a) {
    if (mul_[a] != a || mul_[a * order_] != a)
      throw Error("group.identity", "element 0 is not a two-sided identity", {{"element", str(a)}});
  }

  inv_.assign(order_, 0);
  for (std::size_t a = 0; a < order_; ++a) {
    for (std::size_t b = 0; b < order_; ++b) {
      if (mul_[a * order_ + b] == 0) {
        if (mul_[b * order_ + a] != 0)
          throw Error("group.inverse", "left and right inverses differ", {{"element", str(a)}});
        inv_[a] = static_cast<Element>(b);
        break;
      }
    }
  }
  for (const auto& [label, e] : generators_) {
    if (e >= order_)
      throw Error("group.generator", "generator index out of range", {{"label", label}});
  }
  if (!is_associative())
    throw Error("group.not_associative", "multiplication table is not associative");
}

Element GroupTable::generator(const std::string& label) const {
  const auto it = generators_.find(label);
  if (it == generators_.end())
    throw Error("group.generator", "unknown generator label", {{"label", label}});
  return it->second;
}

std::size_t GroupTable::element_order(Element a) const {
  std::size_t n = 1;
  for (Element x = a; x != 0; x = mul(x, a)) ++n;
  return n;
}

bool GroupTable::is_associative(std::uint64_t seed, std::size_t samples) const {
  const auto check = [this](std::size_t a, std::size_t b, std::size_t c) {
    const auto A = static_cast<Element>(a), B = static_cast<Element>(b), C = static_cast<Element>(c);
    return mul(mul(A, B), C) == mul(A, mul(B, C));
  };
  if (order_ <= 512) {
    for (std::size_t a = 0; a < order_; ++a)
      for (std::size_t b = 0; b < order_; ++b) {
        const Element ab = mul_[a * order_ + b];
        for (std::size_t c = 0; c < order_; ++c)
          if (mul_[std::size_t{ab} * order_ + c] != mul_[a * order_ + mul_[b * order_ + c]])
            return false;
      }
    return true;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, order_ - 1);
  for (std::size_t i = 0; i < samples; ++i)
    if (!check(pick(rng), pick(rng), pick(rng))) return false;
  return true;
}

std::string GroupTable::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(order_);
  for (Element e : mul_) feed(e);
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%zu-%016llx", order_, static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json GroupTable::to_json() const {
  nlohmann::json gens = nlohmann::json::object();
  for (const auto& [label, e] : generators_) gens[label] = e;
  return {{"order", order_}, {"mul", mul_}, {"generators", gens}};
}

GroupTable GroupTable::from_json(const nlohmann::json& j) {
  try {
    const auto order = j.at("order").get<std::size_t>();
    auto mul = j.at("mul").get<std::vector<Element>>();
    std::map<std::string, Element> gens;
    if (j.contains("generators")) gens = j.at("generators").get<std::map<std::string, Element>>();
    return GroupTable(order, std::move(mul), std::move(gens));
  } catch (const nlohmann::json::exception& e) {
    throw Error("group.json", std::string("malformed group JSON: ") + e.what());
  }
}

Subgroup::Subgroup(GroupPtr parent, std::vector<Element> elements)
    : parent_(std::move(parent)), elements_(std::move(elements)) {
  if (!parent_) throw Error("subgroup.parent", "subgroup needs a parent group");
  std::sort(elements_.begin(), elements_.end());
  elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  if (elements_.empty() || elements_.front() != 0)
    throw Error("subgroup.identity", "subgroup must contain the identity");
  if (elements_.back() >= parent_->order())
    throw Error("subgroup.range", "element index out of range");
  for (Element a : elements_) {
    if (!contains(parent_->inv(a)))
      throw Error("subgroup.not_closed", "not closed under inverses", {{"element", str(a)}});
    for (Element b : elements_)
      if (!contains(parent_->mul(a, b)))
        throw Error("subgroup.not_closed", "not closed under multiplication",
                    {{"a", str(a)}, {"b", str(b)}});
  }
  if (parent_->order() % elements_.size() != 0)
    throw Error("subgroup.lagrange", "subgroup order does not divide group order");
}

bool Subgroup::contains(Element g) const {
  return std::binary_search(elements_.begin(), elements_.end(), g);
}

Subgroup intersection(const Subgroup& a, const Subgroup& b) {
  if (a.parent() != b.parent())
    throw Error("subgroup.parent_mismatch", "subgroups live in different groups");
  std::vector<Element> common;
  std::set_intersection(a.elements().begin(), a.elements().end(), b.elements().begin(),
                        b.elements().end(), std::back_inserter(common));
  return Subgroup(a.parent(), std::move(common));
}

Subgroup closure(const GroupPtr& parent, std::span<const Element> seeds) {
  if (!parent) throw Error("subgroup.parent", "closure needs a parent group");
  if (seeds.empty()) throw Error("closure.empty", "closure needs at least one seed");
  const std::size_t n = parent->order();
  for (Element s : seeds)
    if (s >= n) throw Error("closure.range", "seed index out of range", {{"seed", str(s)}});

  // Finite group: closure under multiplication by the seeds (and their
  // inverses) starting from the identity already gives the subgroup.
  std::vector<Element> gens(seeds.begin(), seeds.end());
  for (Element s : seeds) gens.push_back(parent->inv(s));
  std::vector<char> in(n, 0);
  std::deque<Element> queue{0};
  in[0] = 1;
  std::vector<Element> members;
  while (!queue.empty()) {
    const Element g = queue.front();
    queue.pop_front();
    members.push_back(g);
    for (Element s : gens) {
      const Element h = parent->mul(g, s);
      if (!in[h]) {
        in[h] = 1;
        queue.push_back(h);
      }
    }
  }
  return Subgroup(parent, std::move(members));
}

Subgroup closure(const GroupPtr& parent, std::initializer_list<Element> seeds) {
  return closure(parent, std::span<const Element>(seeds.begin(), seeds.size()));
}

RightCosetPartition right_cosets(const Subgroup& sub) {
  const auto& g = *sub.parent();
  RightCosetPartition out{sub, {}, std::vector<std::size_t>(g.order(), SIZE_MAX)};
  for (std::size_t x = 0; x < g.order(); ++x) {
    if (out.coset_of[x] != SIZE_MAX) continue;
    std::vector<Element> coset;
    coset.reserve(sub.size());
    for (Element k : sub.elements()) coset.push_back(g.mul(k, static_cast<Element>(x)));
    std::sort(coset.begin(), coset.end());
    for (Element y : coset) out.coset_of[y] = out.cosets.size();
    out.cosets.push_back(std::move(coset));
  }
  return out;
}

GroupPtr build_heisenberg(std::uint32_t q) {
  if (!is_prime(q)) throw Error("group.not_prime", "Heisenberg modulus must be prime", {{"q", str(q)}});
  const std::size_t n = std::size_t{q} * q * q;
  if (n > kMaxTableOrder) throw Error("group.too_large", "H_q exceeds the dense table cap", {{"q", str(q)}});
  const auto idx = [q](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    return static_cast<Element>((a * q + b) * q + c);
  };
  std::vector<Element> mul(n * n);
  for (std::uint32_t a = 0; a < q; ++a)
    for (std::uint32_t b = 0; b < q; ++b)
      for (std::uint32_t c = 0; c < q; ++c)
        for (std::uint32_t a2 = 0; a2 < q; ++a2)
          for (std::uint32_t b2 = 0; b2 < q; ++b2)
            for (std::uint32_t c2 = 0; c2 < q; ++c2)
              mul[std::size_t{idx(a, b, c)} * n + idx(a2, b2, c2)] =
                  idx((a + a2) % q, (b + b2) % q, (c + c2 + a * b2) % q);
  return std::make_shared<const GroupTable>(n, std::move(mul),
                                            std::map<std::string, Element>{{"x", idx(1, 0, 0)},
                                                                           {"y", idx(0, 1, 0)}});
}

GroupPtr build_elementary_abelian_pair(std::uint32_t q) {
  if (!is_prime(q)) throw Error("group.not_prime", "modulus must be prime", {{"q", str(q)}});
  const std::size_t n = std::size_t{q} * q;
  std::vector<Element> mul(n * n);
  for (std::uint32_t a = 0; a < q; ++a)
    for (std::uint32_t b = 0; b < q; ++b)
      for (std::uint32_t a2 = 0; a2 < q; ++a2)
        for (std::uint32_t b2 = 0; b2 < q; ++b2)
          mul[(a * q + b) * n + a2 * q + b2] = ((a + a2) % q) * q + (b + b2) % q;
  return std::make_shared<const GroupTable>(n, std::move(mul),
                                            std::map<std::string, Element>{{"x", q}, {"y", 1}});
}

GroupPtr build_permutation_group(std::size_t degree,
                                 const std::map<std::string, std::vector<std::uint32_t>>& gens) {
  using Perm = std::vector<std::uint32_t>;
  for (const auto& [label, p] : gens) {
    Perm sorted = p;
    std::sort(sorted.begin(), sorted.end());
    bool ok = sorted.size() == degree;
    for (std::size_t i = 0; ok && i < degree; ++i) ok = sorted[i] == i;
    if (!ok) throw Error("group.bad_permutation", "generator is not a permutation", {{"label", label}});
  }
  // (p * s)(i) = s(p(i)): apply p first, then s.
  const auto compose = [](const Perm& p, const Perm& s) {
    Perm r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = s[p[i]];
    return r;
  };
  Perm id(degree);
  for (std::size_t i = 0; i < degree; ++i) id[i] = static_cast<std::uint32_t>(i);

  std::vector<Perm> elems{id};
  std::map<Perm, Element> index{{id, 0}};
  for (std::size_t head = 0; head < elems.size(); ++head) {
    for (const auto& [label, s] : gens) {
      Perm next = compose(elems[head], s);
      if (!index.contains(next)) {
        if (elems.size() >= kMaxTableOrder)
          throw Error("group.too_large", "permutation group exceeds the dense table cap");
        index.emplace(next, static_cast<Element>(elems.size()));
        elems.push_back(std::move(next));
      }
    }
  }
  const std::size_t n = elems.size();
  std::vector<Element> mul(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) mul[a * n + b] = index.at(compose(elems[a], elems[b]));
  std::map<std::string, Element> labels;
  for (const auto& [label, s] : gens) labels[label] = index.at(s);
  return std::make_shared<const GroupTable>(n, std::move(mul), std::move(labels));
}

GroupPtr build_symmetric(std::size_t n) {
  if (n < 2 || n > 8) throw Error("group.range", "symmetric group degree must be in [2, 8]", {{"n", str(n)}});
  std::map<std::string, std::vector<std::uint32_t>> gens;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::uint32_t> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = static_cast<std::uint32_t>(k);
    std::swap(p[i], p[i + 1]);
    gens["s" + std::to_string(i + 1)] = std::move(p);
  }
  return build_permutation_group(n, gens);
}

GroupPtr build_dihedral(std::size_t n) {
  if (n < 3) throw Error("group.range", "dihedral n-gon needs n >= 3", {{"n", str(n)}});
  std::vector<std::uint32_t> r(n), s(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = static_cast<std::uint32_t>((i + 1) % n);
    s[i] = static_cast<std::uint32_t>((n - i) % n);
    t[i] = static_cast<std::uint32_t>((n + 1 - i) % n);
  }
  return build_permutation_group(n, {{"r", r}, {"s", s}, {"t", t}});
}

SubgroupPair generated_pair(const GroupPtr& g, const std::vector<std::string>& labels1,
                            const std::vector<std::string>& labels2) {
  const auto seeds = [&g](const std::vector<std::string>& labels) {
    std::vector<Element> out;
    for (const auto& l : labels) out.push_back(g->generator(l));
    return out;
  };
  const auto s1 = seeds(labels1);
  const auto s2 = seeds(labels2);
  return {closure(g, s1), closure(g, s2)};
}

}  // namespace robust_t
