#include "robust_t/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "robust_t/error.hpp"
#include "robust_t/finite_group.hpp"
#include "robust_t/json_io.hpp"

namespace robust_t {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string pair_str(const GeneratorPair& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

const char* kind_name(PairKind k) {
  switch (k) {
    case PairKind::commuting: return "commuting";
    case PairKind::heisenberg: return "heisenberg";
    case PairKind::explicit_angle: return "explicit";
    case PairKind::link: return "link";
  }
  return "?";
}

PairKind kind_from_name(const std::string& s) {
  if (s == "commuting") return PairKind::commuting;
  if (s == "heisenberg") return PairKind::heisenberg;
  if (s == "explicit") return PairKind::explicit_angle;
  if (s == "link") return PairKind::link;
  throw Error("scheme.kind", "unknown pair kind", {{"kind", s}});
}

// Hilbert angle bound of one pair.
double pair_cos(const PairData& d) {
  switch (d.kind) {
    case PairKind::commuting: return 0.0;
    case PairKind::heisenberg: return 1.0 / std::sqrt(static_cast<double>(d.q));
    case PairKind::explicit_angle: return d.hilbert_cos;
    case PairKind::link: return std::min(d.v1_size, d.v2_size) <= 1 ? 0.0 : std::abs(1.0 - d.eta2);
  }
  return 0.0;
}

std::optional<double> pair_schatten(const PairData& d, double r, std::size_t link_L) {
  switch (d.kind) {
    case PairKind::commuting: return 0.0;
    case PairKind::heisenberg: {
      const double q = static_cast<double>(d.q);
      return std::pow(q * q - q, 1.0 / r) / std::sqrt(q);
    }
    case PairKind::explicit_angle: {
      const auto it = d.schatten.find(r);
      if (it == d.schatten.end()) return std::nullopt;
      return it->second;
    }
    case PairKind::link: return pair_cos(d) * std::pow(static_cast<double>(link_L), 1.0 / r);
  }
  return std::nullopt;
}

}  // namespace

double threshold(std::size_t n) {
  if (n < 2) throw Error("criterion.n", "at least two generating subgroups are required", {{"n", std::to_string(n)}});
  return 1.0 / (8.0 * static_cast<double>(n) - 11.0);
}

SConstants s_constants(double epsilon, std::size_t n) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error("criterion.epsilon", "epsilon must lie in (0, 1)", {{"epsilon", fmt(epsilon)}});
  if (n < 2) throw Error("criterion.n", "at least two generating subgroups are required", {{"n", std::to_string(n)}});
  SConstants s;
  s.s1 = std::log1p(epsilon / (2.0 * (1.0 - epsilon))) / 2.0;
  s.s2 = std::log1p(1.0 / (8.0 * static_cast<double>(n)));
  s.s0 = std::min(s.s1, s.s2);
  return s;
}

ClassParams class_params(double c, double c_prime) {
  if (!(c > 0.0) || !(c <= c_prime) || !(c_prime < 2.0))
    throw Error("criterion.class_order", "class parameters need 0 < c <= c' < 2",
                {{"c", fmt(c)}, {"c_prime", fmt(c_prime)}});
  ClassParams p;
  p.delta = c_prime / c - 1.0;
  p.theta = (kLn2 - std::log(c_prime)) / (kLn2 - std::log(c));
  return p;
}

double schatten_M(double p1, double p2, double r) {
  if (!(p1 > 1.0 && p1 <= 2.0 && p2 >= 2.0 && std::isfinite(p2) && r >= 2.0 && std::isfinite(r)))
    throw Error("criterion.schatten_range", "need 1 < p1 <= 2 <= p2 < inf and 2 <= r < inf",
                {{"p1", fmt(p1)}, {"p2", fmt(p2)}, {"r", fmt(r)}});
  const double gap = 1.0 / p1 - 1.0 / p2 - 1.0 / r;
  if (!(gap < 0.0))
    throw Error("criterion.schatten_divergent", "the series for M diverges unless 1/p1 - 1/p2 < 1/r",
                {{"p1", fmt(p1)}, {"p2", fmt(p2)}, {"r", fmt(r)}});
  const double e = r / (r - 1.0) * gap * kLn2;  // ln x
  return std::exp(e) / -std::expm1(e);
}

PairData PairData::heisenberg_pair(std::uint64_t q) {
  if (!is_prime(q)) throw Error("scheme.q", "Heisenberg pairs need a prime q", {{"q", std::to_string(q)}});
  PairData d;
  d.kind = PairKind::heisenberg;
  d.q = q;
  return d;
}

PairData PairData::explicit_pair(const AngleReport& report) {
  PairData d;
  d.kind = PairKind::explicit_angle;
  d.hilbert_cos = report.hilbert_cos;
  d.schatten = report.schatten;
  return d;
}

PairData PairData::link_pair(double eta2, std::size_t v1_size, std::size_t v2_size) {
  if (!(eta2 > 0.0 && eta2 < 2.0)) throw Error("scheme.eta", "eta2 must lie in (0, 2)", {{"eta2", fmt(eta2)}});
  if (v1_size == 0 || v2_size == 0) throw Error("scheme.sides", "link sides must be nonempty");
  PairData d;
  d.kind = PairKind::link;
  d.eta2 = eta2;
  d.v1_size = v1_size;
  d.v2_size = v2_size;
  return d;
}

GeneratorScheme::GeneratorScheme(std::size_t n_generators, std::map<GeneratorPair, PairData> pairs, std::string origin)
    : n_(n_generators), pairs_(std::move(pairs)), origin_(std::move(origin)) {
  if (n_ < 2) throw Error("scheme.n", "a scheme needs at least two generators", {{"n", std::to_string(n_)}});
  for (const auto& [key, d] : pairs_) {
    if (key.first < 1 || key.first >= key.second || key.second > n_)
      throw Error("scheme.pair", "pair indices must satisfy 1 <= i < j <= N", {{"pair", pair_str(key)}});
    if (d.kind == PairKind::heisenberg && !is_prime(d.q))
      throw Error("scheme.q", "Heisenberg pairs need a prime q", {{"pair", pair_str(key)}, {"q", std::to_string(d.q)}});
    if (d.kind == PairKind::explicit_angle) {
      if (!(d.hilbert_cos >= 0.0) || !std::isfinite(d.hilbert_cos))
        throw Error("scheme.cos", "explicit angles must be finite and nonnegative", {{"pair", pair_str(key)}});
      for (const auto& [r, v] : d.schatten)
        if (!(r >= 1.0) || !(v >= 0.0))
          throw Error("scheme.schatten", "Schatten data needs r >= 1 and nonnegative norms", {{"pair", pair_str(key)}});
    }
    if (d.kind == PairKind::link && (!(d.eta2 > 0.0 && d.eta2 < 2.0) || d.v1_size == 0 || d.v2_size == 0))
      throw Error("scheme.eta", "link pairs need eta2 in (0, 2) and nonempty sides", {{"pair", pair_str(key)}});
  }
  const std::size_t expected = n_ * (n_ - 1) / 2;
  if (pairs_.size() != expected) {
    for (std::size_t i = 1; i <= n_; ++i)
      for (std::size_t j = i + 1; j <= n_; ++j)
        if (!pairs_.count({i, j}))
          throw Error("scheme.missing_pair", "scheme lacks data for a generator pair", {{"pair", pair_str({i, j})}});
  }
  std::set<std::uint64_t> qs;
  for (const auto& [key, d] : pairs_)
    if (d.kind == PairKind::heisenberg) qs.insert(d.q);
  if (qs.size() > 1) throw Error("scheme.q", "Heisenberg pairs must share a single prime q");
}

std::optional<std::uint64_t> GeneratorScheme::heisenberg_q() const {
  for (const auto& [key, d] : pairs_)
    if (d.kind == PairKind::heisenberg) return d.q;
  return std::nullopt;
}

std::vector<GeneratorPair> GeneratorScheme::pairs_of_kind(PairKind kind) const {
  std::vector<GeneratorPair> out;
  for (const auto& [key, d] : pairs_)
    if (d.kind == kind) out.push_back(key);
  return out;
}

std::size_t GeneratorScheme::link_L() const {
  std::size_t L = 0;
  for (const auto& [key, d] : pairs_)
    if (d.kind == PairKind::link) L = std::max(L, std::min(d.v1_size, d.v2_size));
  return L;
}

nlohmann::json GeneratorScheme::to_json() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [key, d] : pairs_) {
    nlohmann::json e = {{"pair", {key.first, key.second}}, {"kind", kind_name(d.kind)}};
    switch (d.kind) {
      case PairKind::commuting: break;
      case PairKind::heisenberg: e["q"] = d.q; break;
      case PairKind::explicit_angle: {
        e["hilbert_cos"] = d.hilbert_cos;
        nlohmann::json sch = nlohmann::json::object();
        for (const auto& [r, v] : d.schatten) sch[number_key(r)] = v;
        e["schatten"] = sch;
        break;
      }
      case PairKind::link:
        e["eta2"] = d.eta2;
        e["v1_size"] = d.v1_size;
        e["v2_size"] = d.v2_size;
        break;
    }
    pairs.push_back(std::move(e));
  }
  return {{"n_generators", n_}, {"origin", origin_}, {"pairs", pairs}};
}

GeneratorScheme GeneratorScheme::from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n_generators").get<std::size_t>();
    std::map<GeneratorPair, PairData> pairs;
    for (const auto& e : j.at("pairs")) {
      const auto idx = e.at("pair").get<std::vector<std::size_t>>();
      if (idx.size() != 2) throw Error("scheme.pair", "pair must be [i, j]");
      const GeneratorPair key{idx[0], idx[1]};
      PairData d;
      switch (kind_from_name(e.at("kind").get<std::string>())) {
        case PairKind::commuting: break;
        case PairKind::heisenberg: d = PairData::heisenberg_pair(e.at("q").get<std::uint64_t>()); break;
        case PairKind::explicit_angle:
          d.kind = PairKind::explicit_angle;
          d.hilbert_cos = e.at("hilbert_cos").get<double>();
          if (e.contains("schatten"))
            for (auto it = e.at("schatten").begin(); it != e.at("schatten").end(); ++it)
              d.schatten[number_from_key(it.key())] = it.value().get<double>();
          break;
        case PairKind::link:
          d = PairData::link_pair(e.at("eta2").get<double>(), e.at("v1_size").get<std::size_t>(),
                                  e.at("v2_size").get<std::size_t>());
          break;
      }
      if (!pairs.emplace(key, d).second) throw Error("scheme.pair", "duplicate pair", {{"pair", pair_str(key)}});
    }
    return GeneratorScheme(n, std::move(pairs), j.value("origin", std::string("custom")));
  } catch (const nlohmann::json::exception& e) {
    throw Error("scheme.json", std::string("malformed scheme JSON: ") + e.what());
  }
}

GeneratorScheme steinberg_scheme(std::size_t n, std::size_t m, std::uint64_t q) {
  if (n < 3) throw Error("steinberg.n", "Steinberg layout needs n >= 3", {{"n", std::to_string(n)}});
  if (m < 1) throw Error("steinberg.m", "Steinberg layout needs m >= 1", {{"m", std::to_string(m)}});
  if (!is_prime(q)) throw Error("steinberg.q", "q must be prime", {{"q", std::to_string(q)}});
  const std::size_t N = n + m;
  std::map<GeneratorPair, PairData> pairs;
  for (std::size_t i = 1; i <= N; ++i)
    for (std::size_t j = i + 1; j <= N; ++j) {
      // Case table for K_{i,j}, row by row.
      const bool abelian = (j < n && j - i > 1) || (1 < i && i < n - 1 && n <= j) || (n <= i);
      const bool heis = (i < n - 1 && j == i + 1) || (i == 1 && n <= j) || (i == n - 1 && n <= j);
      if (abelian == heis)
        throw Error("steinberg.table", "case table does not classify a pair exactly once", {{"pair", pair_str({i, j})}});
      pairs.emplace(GeneratorPair{i, j}, heis ? PairData::heisenberg_pair(q) : PairData::commuting_pair());
    }
  return GeneratorScheme(N, std::move(pairs), "steinberg");
}

GeneratorScheme kms_scheme(std::size_t n_vertices, const std::vector<GeneratorPair>& edges, std::uint64_t q) {
  if (n_vertices < 2) throw Error("kms.n", "graph needs at least two vertices");
  if (!is_prime(q)) throw Error("kms.q", "q must be prime", {{"q", std::to_string(q)}});
  std::set<GeneratorPair> edge_set;
  for (auto [a, b] : edges) {
    if (a == b) throw Error("kms.loop", "graph has a loop", {{"vertex", std::to_string(a)}});
    if (a < 1 || b < 1 || a > n_vertices || b > n_vertices)
      throw Error("kms.vertex", "edge endpoint out of range", {{"edge", pair_str({a, b})}});
    if (a > b) std::swap(a, b);
    if (!edge_set.emplace(a, b).second) throw Error("kms.multi_edge", "graph has a repeated edge", {{"edge", pair_str({a, b})}});
  }
  std::map<GeneratorPair, PairData> pairs;
  for (std::size_t i = 1; i <= n_vertices; ++i)
    for (std::size_t j = i + 1; j <= n_vertices; ++j)
      pairs.emplace(GeneratorPair{i, j}, edge_set.count({i, j}) ? PairData::heisenberg_pair(q) : PairData::commuting_pair());
  return GeneratorScheme(n_vertices, std::move(pairs), "kms");
}

GeneratorScheme link_scheme(const LinkTable& table) {
  std::size_t n = 0;
  for (const auto& e : table.entries) n = std::max(n, e.j);
  std::map<GeneratorPair, PairData> pairs;
  for (const auto& e : table.entries) pairs.emplace(GeneratorPair{e.i, e.j}, PairData::link_pair(e.eta2, e.v1_size, e.v2_size));
  return GeneratorScheme(n, std::move(pairs), "links");
}

nlohmann::json BanachClassDescriptor::to_json() const {
  nlohmann::json j = {{"provenance", provenance}};
  switch (kind) {
    case BanachClassKind::hilbert_bm_ball:
      j["kind"] = "hilbert_bm_ball";
      j["delta"] = delta;
      break;
    case BanachClassKind::theta_hilbertian:
      j["kind"] = "theta_hilbertian";
      j["theta"] = theta;
      break;
    case BanachClassKind::type_cotype:
      j["kind"] = "type_cotype";
      j["p1"] = p1;
      j["p2"] = p2;
      j["r"] = r;
      j["type_constant"] = type_constant;
      j["cotype_constant"] = cotype_constant;
      j["theta_min"] = theta;
      break;
  }
  return j;
}

nlohmann::json CriterionReport::to_json() const {
  nlohmann::json j;
  j["n_generators"] = n_generators;
  j["origin"] = origin;
  j["threshold"] = threshold;
  j["cos_max_hilbert"] = cos_max_hilbert;
  j["binding_pair"] = {binding_pair.first, binding_pair.second};
  nlohmann::json sch = nlohmann::json::object();
  for (const auto& [r, v] : schatten_max) sch[number_key(r)] = v;
  j["schatten_max"] = sch;
  j["verdict"] = certified() ? "certified" : "not_certified";
  if (epsilon) {
    j["epsilon"] = *epsilon;
    j["epsilon_declared"] = epsilon_declared;
  }
  if (s) j["s"] = {{"s1", s->s1}, {"s2", s->s2}, {"s0", s->s0}};
  if (c_prime) j["c_prime"] = *c_prime;
  j["class_params"] = nlohmann::json::array();
  for (const auto& c : class_params) j["class_params"].push_back(c.to_json());
  j["schatten_grid"] = nlohmann::json::array();
  for (const auto& g : grid) {
    nlohmann::json e = {{"p1", g.p1}, {"p2", g.p2}, {"r", g.r}, {"admissible", g.admissible}, {"member", g.member}};
    if (g.admissible) {
      e["M"] = g.M;
      e["c"] = g.c;
    }
    if (!g.note.empty()) e["note"] = g.note;
    j["schatten_grid"].push_back(std::move(e));
  }
  if (flp_exponent) j["flp_exponent"] = number_to_json(*flp_exponent);
  j["inequalities"] = inequalities;
  j["flags"] = flags;
  return j;
}

CriterionReport evaluate(const GeneratorScheme& scheme, const EvaluateOptions& opt) {
  CriterionReport rep;
  const std::size_t N = scheme.n_generators();
  const double k = 8.0 * static_cast<double>(N) - 11.0;
  rep.n_generators = N;
  rep.origin = scheme.origin();
  rep.threshold = threshold(N);
  if (!(opt.type_constant >= 1.0) || !(opt.cotype_constant >= 1.0))
    throw Error("criterion.type_cotype", "type and cotype constants must be >= 1");

  bool binding_is_heisenberg = false;
  rep.binding_pair = scheme.pairs().begin()->first;
  for (const auto& [key, d] : scheme.pairs()) {
    const double c = pair_cos(d);
    if (c > rep.cos_max_hilbert) {
      rep.cos_max_hilbert = c;
      rep.binding_pair = key;
      binding_is_heisenberg = d.kind == PairKind::heisenberg;
    }
  }
  const double cos = rep.cos_max_hilbert;

  const std::size_t L = scheme.link_L();
  for (double r : opt.r_grid) {
    if (!(r >= 2.0) || !std::isfinite(r)) throw Error("criterion.r_grid", "Schatten exponents must lie in [2, inf)", {{"r", fmt(r)}});
    std::optional<double> mx = 0.0;
    for (const auto& [key, d] : scheme.pairs()) {
      const auto v = pair_schatten(d, r, L);
      if (!v) {
        mx.reset();
        break;
      }
      mx = std::max(*mx, *v);
    }
    if (mx) rep.schatten_max[r] = *mx;
  }

  // Verdict.
  const auto q = scheme.heisenberg_q();
  const bool pure_heisenberg = q && scheme.pairs_of_kind(PairKind::explicit_angle).empty() &&
                               scheme.pairs_of_kind(PairKind::link).empty();
  if (opt.epsilon) {
    if (!(*opt.epsilon > 0.0 && *opt.epsilon < 1.0))
      throw Error("criterion.epsilon", "epsilon must lie in (0, 1)", {{"epsilon", fmt(*opt.epsilon)}});
    rep.epsilon_declared = true;
    const double bound = (1.0 - *opt.epsilon) * rep.threshold;
    rep.verdict = cos <= bound ? Verdict::certified : Verdict::not_certified;
    rep.inequalities.push_back("cos_max = " + fmt(cos) + (rep.certified() ? " <= " : " > ") +
                               "(1-epsilon)/(8N-11) = " + fmt(bound));
    if (rep.certified()) rep.epsilon = *opt.epsilon;
  } else if (pure_heisenberg) {
    const std::uint64_t kk = static_cast<std::uint64_t>(k);
    const bool ok = *q > kk * kk;
    rep.verdict = ok ? Verdict::certified : Verdict::not_certified;
    rep.inequalities.push_back("q = " + std::to_string(*q) + (ok ? " > " : " <= ") + "(8N-11)^2 = " +
                               std::to_string(kk * kk));
  } else {
    rep.verdict = cos < rep.threshold ? Verdict::certified : Verdict::not_certified;
  }
  if (!rep.epsilon_declared)
    rep.inequalities.push_back("cos_max = " + fmt(cos) + (cos < rep.threshold ? " < " : " >= ") +
                               "1/(8N-11) = " + fmt(rep.threshold));
  if (!rep.certified()) {
    rep.flags.emplace_back("angle bound does not clear the threshold");
    return rep;
  }

  if (!rep.epsilon) {
    double eps = 1.0 - cos * k;
    if (eps >= 1.0) eps = std::nextafter(1.0, 0.0);
    rep.epsilon = eps;
  }
  rep.s = s_constants(*rep.epsilon, N);
  rep.inequalities.push_back("s0 = min(s1, s2) = min(" + fmt(rep.s->s1) + ", " + fmt(rep.s->s2) + ") = " + fmt(rep.s->s0));

  if (opt.c_prime) {
    if (!(*opt.c_prime >= cos && *opt.c_prime < rep.threshold))
      throw Error("criterion.c_prime", "c' must satisfy cos_max <= c' < 1/(8N-11)",
                  {{"c_prime", fmt(*opt.c_prime)}, {"cos_max", fmt(cos)}, {"threshold", fmt(rep.threshold)}});
    rep.c_prime = *opt.c_prime;
  } else {
    rep.c_prime = (cos + rep.threshold) / 2.0;
  }
  const double cp = *rep.c_prime;

  if (cos > 0.0) {
    const ClassParams params = class_params(cos, cp);
    BanachClassDescriptor ball;
    ball.kind = BanachClassKind::hilbert_bm_ball;
    ball.delta = params.delta;
    ball.provenance = "hilbert angle criterion";
    BanachClassDescriptor interp;
    interp.kind = BanachClassKind::theta_hilbertian;
    interp.theta = params.theta;
    interp.provenance = "hilbert angle criterion";
    rep.class_params.push_back(ball);
    rep.class_params.push_back(interp);
  } else {
    rep.flags.emplace_back("zero angle: all classes admissible at the given threshold; delta unbounded");
  }

  for (double p1 : opt.p1_grid)
    for (double p2 : opt.p2_grid)
      for (double r : opt.r_grid) {
        SchattenGridPoint g;
        g.p1 = p1;
        g.p2 = p2;
        g.r = r;
        if (!(p1 > 1.0 && p1 <= 2.0 && p2 >= 2.0 && std::isfinite(p2)))
          throw Error("criterion.grid", "grid needs 1 < p1 <= 2 <= p2 < inf", {{"p1", fmt(p1)}, {"p2", fmt(p2)}});
        const auto sr = rep.schatten_max.find(r);
        if (!(1.0 / p1 - 1.0 / p2 < 1.0 / r)) {
          g.note = "1/p1 - 1/p2 >= 1/r";
        } else if (sr == rep.schatten_max.end()) {
          g.note = "no Schatten data for this r";
        } else {
          g.admissible = true;
          g.M = schatten_M(p1, p2, r);
          g.c = g.M * sr->second;
          const double ctc = g.c * opt.type_constant * opt.cotype_constant;
          g.member = ctc <= cp;
          if (g.member && ctc > 0.0) {
            BanachClassDescriptor d;
            d.kind = BanachClassKind::type_cotype;
            d.p1 = p1;
            d.p2 = p2;
            d.r = r;
            d.type_constant = opt.type_constant;
            d.cotype_constant = opt.cotype_constant;
            d.theta = (kLn2 - std::log(cp)) / (kLn2 - std::log(ctc));
            d.provenance = "schatten criterion";
            rep.class_params.push_back(d);
          }
        }
        rep.grid.push_back(g);
      }

  const double den = kLn2 + std::log(k);
  if (cos == 0.0) {
    rep.flp_exponent = std::numeric_limits<double>::infinity();
  } else if (binding_is_heisenberg) {
    rep.flp_exponent = 2.0 * (kLn2 + std::log(std::sqrt(static_cast<double>(*q)))) / den;
  } else {
    rep.flp_exponent = 2.0 * (kLn2 - std::log(cos)) / den;
  }
  return rep;
}

}  // namespace robust_t
