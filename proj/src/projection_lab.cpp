#include "robust_t/projection_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "robust_t/error.hpp"
#include "robust_t/json_io.hpp"
#include "robust_t/parallel.hpp"
#include "robust_t/random.hpp"

namespace robust_t {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAbsorptionTol = 1e-8;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double lp_norm(const Eigen::VectorXd& v, double p) {
  if (v.size() == 0) return 0.0;
  const double m = v.cwiseAbs().maxCoeff();
  if (std::isinf(p) || m == 0.0) return m;
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  return m * std::pow((v.cwiseAbs() / m).array().pow(p).sum(), 1.0 / p);
}

// Norming functional of y in l^p: ||w||_{p'} = 1 and <w, y> = ||y||_p.
Eigen::VectorXd dual_vector(const Eigen::VectorXd& y, double p) {
  const double n = lp_norm(y, p);
  Eigen::VectorXd w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double t = std::abs(y[i]) / n;
    w[i] = (y[i] < 0 ? -1.0 : 1.0) * std::pow(t, p - 1.0);
  }
  return w;
}

// Boyd's power method for ||A||_p (1 < p < inf); returns the best ratio seen.
double boyd_power(const Eigen::MatrixXd& a, double p, Eigen::VectorXd x) {
  const double q = p / (p - 1.0);
  double nx = lp_norm(x, p);
  if (nx == 0.0) return 0.0;
  x /= nx;
  double best = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd y = a * x;
    const double est = lp_norm(y, p);
    best = std::max(best, est);
    if (est == 0.0) break;
    const Eigen::VectorXd z = a.transpose() * dual_vector(y, p);
    const double zq = lp_norm(z, q);
    if (zq <= z.dot(x) * (1.0 + 1e-13)) break;
    x = dual_vector(z, q);
    nx = lp_norm(x, p);
    if (nx == 0.0) break;
    x /= nx;
  }
  return best;
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

void require_square(const Eigen::MatrixXd& a, const NormedSpace& s, const char* what) {
  if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != s.dimension)
    throw Error("projection.dimension", std::string(what) + " does not match the space dimension",
                {{"rows", std::to_string(a.rows())}, {"cols", std::to_string(a.cols())},
                 {"dimension", std::to_string(s.dimension)}});
}

void require_meet(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const Eigen::MatrixXd& p12) {
  const double idem = max_abs(p12 * p12 - p12);
  const double a1 = max_abs(p12 * p1 - p12);
  const double a2 = max_abs(p12 * p2 - p12);
  const double c1 = max_abs(p1 * p12 - p12);
  const double c2 = max_abs(p2 * p12 - p12);
  if (idem > kAbsorptionTol || a1 > kAbsorptionTol || a2 > kAbsorptionTol || c1 > kAbsorptionTol ||
      c2 > kAbsorptionTol)
    throw Error("projection.meet_absorption",
                "meet projection must be idempotent, absorb both projections and map into both images",
                {{"idempotence", fmt(idem)}, {"absorb_p1", fmt(a1)}, {"absorb_p2", fmt(a2)},
                 {"image_p1", fmt(c1)}, {"image_p2", fmt(c2)}});
}

std::size_t rank_of(const Eigen::MatrixXd& m, double tol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++r;
  return r;
}

}  // namespace

NormedSpace NormedSpace::lp(std::size_t dim, double p) {
  if (dim == 0) throw Error("space.dimension", "space dimension must be positive");
  if (!(p >= 1.0)) throw Error("space.p_range", "p must lie in [1, inf]", {{"p", fmt(p)}});
  NormedSpace s;
  s.dimension = dim;
  s.p = p;
  return s;
}

NormedSpace NormedSpace::weighted(Eigen::VectorXd weights) {
  if (weights.size() == 0) throw Error("space.dimension", "space dimension must be positive");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error("space.weights", "weights must be positive and finite");
  NormedSpace s;
  s.dimension = static_cast<std::size_t>(weights.size());
  s.kind = NormKind::weighted_2;
  s.p = 2.0;
  s.weights = std::move(weights);
  return s;
}

double NormedSpace::norm(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != dimension)
    throw Error("space.dimension", "vector length does not match the space dimension");
  if (kind == NormKind::weighted_2) return std::sqrt((weights.array() * v.array().square()).sum());
  return lp_norm(v, p);
}

Eigen::MatrixXd NormedSpace::to_euclidean(const Eigen::MatrixXd& a) const {
  if (kind != NormKind::weighted_2) return a;
  const Eigen::VectorXd s = weights.array().sqrt();
  return s.asDiagonal() * a * s.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd NormedSpace::from_euclidean(const Eigen::MatrixXd& a) const {
  if (kind != NormKind::weighted_2) return a;
  const Eigen::VectorXd s = weights.array().sqrt();
  return s.cwiseInverse().asDiagonal() * a * s.asDiagonal();
}

nlohmann::json NormedSpace::to_json() const {
  nlohmann::json j = {{"dim", dimension}, {"p", number_to_json(p)}};
  if (kind == NormKind::weighted_2) j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
  return j;
}

NormedSpace NormedSpace::from_json(const nlohmann::json& j) {
  try {
    if (j.contains("weights")) {
      const auto w = j.at("weights").get<std::vector<double>>();
      if (j.contains("p") && number_from_json(j.at("p")) != 2.0)
        throw Error("space.weights", "weights are only supported with p = 2");
      if (j.contains("dim") && j.at("dim").get<std::size_t>() != w.size())
        throw Error("space.dimension", "weights length differs from dim");
      return weighted(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
    }
    const double p = j.contains("p") ? number_from_json(j.at("p")) : 2.0;
    return lp(j.at("dim").get<std::size_t>(), p);
  } catch (const nlohmann::json::exception& e) {
    throw Error("space.json", std::string("malformed space description: ") + e.what());
  }
}

NormInterval op_norm(const Eigen::MatrixXd& a, const NormedSpace& space, std::uint64_t seed) {
  require_square(a, space, "operator");
  if (space.is_hilbert()) {
    const double s = spectral_norm(space.to_euclidean(a));
    return {s, s};
  }
  const double n1 = a.cwiseAbs().colwise().sum().maxCoeff();
  const double ninf = a.cwiseAbs().rowwise().sum().maxCoeff();
  if (space.p == 1.0) return {n1, n1};
  if (std::isinf(space.p)) return {ninf, ninf};
  const double p = space.p;
  const double upper = std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 - 1.0 / p);

  const auto d = static_cast<Eigen::Index>(space.dimension);
  // Deterministic starts: all-ones and the heaviest column; then seeded ones.
  Eigen::Index heavy = 0;
  a.cwiseAbs().colwise().sum().maxCoeff(&heavy);
  std::vector<double> found(kNormRestarts + 2, 0.0);
  parallel_for(found.size(), [&](std::size_t k) {
    Eigen::VectorXd x;
    if (k == 0) {
      x = Eigen::VectorXd::Ones(d);
    } else if (k == 1) {
      x = Eigen::VectorXd::Unit(d, heavy);
    } else {
      auto rng = make_rng(seed, k);
      std::normal_distribution<double> nd;
      x.resize(d);
      for (Eigen::Index i = 0; i < d; ++i) x[i] = nd(rng);
    }
    found[k] = boyd_power(a, p, std::move(x));
  });
  const double lower = *std::max_element(found.begin(), found.end());
  return {std::min(lower, upper), upper};
}

double cos_angle(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const Eigen::MatrixXd& p12,
                 const NormedSpace& space, std::uint64_t seed) {
  require_square(p1, space, "P1");
  require_square(p2, space, "P2");
  require_square(p12, space, "P12");
  require_meet(p1, p2, p12);
  const auto a = op_norm(p1 * (p2 - p12), space, derive_seed(seed, 1));
  const auto b = op_norm(p2 * (p1 - p12), space, derive_seed(seed, 2));
  return std::max(a.upper, b.upper);
}

double angle_bound_on_commutator(double cos, double beta) {
  if (!(cos < 1.0)) return kInf;
  return 2.0 * (1.0 + beta) * cos / (1.0 - cos);
}

CommutatorRatio commutator_ratio(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2, const NormedSpace& space,
                                 const Eigen::MatrixXd* p12, std::uint64_t seed) {
  require_square(p1, space, "P1");
  require_square(p2, space, "P2");
  const Eigen::MatrixXd c_raw = p1 * p2 - p2 * p1;
  const Eigen::MatrixXd d_raw = p1 - p2;
  const Eigen::MatrixXd c = space.to_euclidean(c_raw);
  const Eigen::MatrixXd d = space.to_euclidean(d_raw);
  const auto n = static_cast<Eigen::Index>(space.dimension);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > 1e-10 * std::max(1.0, smax)) ++rank;

  CommutatorRatio out;
  if (rank < n) {
    const Eigen::MatrixXd on_kernel = c * svd.matrixV().rightCols(n - rank);
    if (spectral_norm(on_kernel) > 1e-8 * std::max(1.0, spectral_norm(c))) {
      out.infinite = true;
      out.lower = out.upper = kInf;
      return out;
    }
  }
  if (rank == 0) return out;  // P1 = P2, so the commutator vanishes

  // On the complement of ker D, write v = V_r S_r^{-1} w so that ||Dv|| = ||w||.
  const Eigen::MatrixXd vr_scaled = svd.matrixV().leftCols(rank) * s.head(rank).cwiseInverse().asDiagonal();
  const Eigen::MatrixXd reduced = c * vr_scaled;
  if (space.is_hilbert()) {
    out.lower = out.upper = spectral_norm(reduced);
    return out;
  }

  const auto ratio = [&](const Eigen::VectorXd& v) {
    const double den = space.norm(d_raw * v);
    return den > 1e-14 * std::max(1.0, space.norm(v)) ? space.norm(c_raw * v) / den : 0.0;
  };
  Eigen::BDCSVD<Eigen::MatrixXd> rsvd(reduced, Eigen::ComputeThinV);
  const Eigen::VectorXd euclid_start = vr_scaled * rsvd.matrixV().col(0);
  std::vector<double> found(kNormRestarts + 1, 0.0);
  parallel_for(found.size(), [&](std::size_t k) {
    auto rng = make_rng(seed, 1000 + k);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    if (k == 0) {
      v = euclid_start;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
    }
    double best = ratio(v);
    double step = 0.5;
    for (int it = 0; it < 400 && step > 1e-6; ++it) {
      Eigen::VectorXd trial(n);
      for (Eigen::Index i = 0; i < n; ++i) trial[i] = nd(rng);
      trial = v + step * v.norm() * trial / trial.norm();
      const double r = ratio(trial);
      if (r > best) {
        best = r;
        v = trial;
      } else {
        step *= 0.97;
      }
    }
    found[k] = best;
  });
  out.lower = *std::max_element(found.begin(), found.end());
  out.upper = kInf;
  if (p12) {
    const double beta = std::max(op_norm(p1, space, derive_seed(seed, 11)).upper,
                                 op_norm(p2, space, derive_seed(seed, 12)).upper);
    out.upper = angle_bound_on_commutator(cos_angle(p1, p2, *p12, space, derive_seed(seed, 13)), beta);
  }
  return out;
}

CertificateConstants certificate_constants(double alpha, double beta, std::size_t n) {
  if (n < 2) throw HypothesisError("certificate.n", "at least two projections are required", {{"n", std::to_string(n)}});
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(beta))
    throw HypothesisError("certificate.range", "alpha and beta must be finite and nonnegative",
                          {{"alpha", fmt(alpha)}, {"beta", fmt(beta)}});
  const double N = static_cast<double>(n);
  const double alpha_max = 1.0 / (2.0 * N - 3.0);
  if (!(alpha < alpha_max))
    throw HypothesisError("certificate.alpha", "alpha must be below 1/(2N-3)",
                          {{"alpha", fmt(alpha)}, {"bound", fmt(alpha_max)}, {"n", std::to_string(n)}});
  if (n > 2) {
    const double beta_max = (N - 1.0 - (2.0 * N - 3.0) * alpha) / (N - 2.0);
    if (!(beta < beta_max))
      throw HypothesisError("certificate.beta", "beta must be below (N-1-(2N-3)alpha)/(N-2)",
                            {{"beta", fmt(beta)}, {"bound", fmt(beta_max)}, {"n", std::to_string(n)}});
  }
  CertificateConstants c;
  c.r_prime = (1.0 + (N - 2.0) * beta + (2.0 * N - 3.0) * alpha) / N;
  c.c_prime = (N - 1.0) * 2.0 * beta * beta / N * c.r_prime / (1.0 - c.r_prime);
  return c;
}

TheoremConstants theorem_constants(double gamma, double beta, std::size_t n) {
  if (n < 2) throw HypothesisError("theorem.n", "at least two projections are required", {{"n", std::to_string(n)}});
  if (!(gamma >= 0.0) || !(beta >= 0.0) || !std::isfinite(beta))
    throw HypothesisError("theorem.range", "gamma and beta must be finite and nonnegative",
                          {{"gamma", fmt(gamma)}, {"beta", fmt(beta)}});
  const double N = static_cast<double>(n);
  const double k = 8.0 * N - 11.0;
  if (!(gamma < 1.0 / k))
    throw HypothesisError("theorem.gamma", "gamma must be below 1/(8N-11)",
                          {{"gamma", fmt(gamma)}, {"bound", fmt(1.0 / k)}, {"n", std::to_string(n)}});
  const double den = N - 2.0 + (3.0 * N - 4.0) * gamma;
  if (den > 0.0) {
    const double beta_max = 1.0 + (1.0 - k * gamma) / den;
    if (!(beta < beta_max))
      throw HypothesisError("theorem.beta", "beta must be below 1 + (1-(8N-11)gamma)/(N-2+(3N-4)gamma)",
                            {{"beta", fmt(beta)}, {"bound", fmt(beta_max)}, {"n", std::to_string(n)}});
  }
  TheoremConstants t;
  t.alpha = 2.0 * (1.0 + beta) * gamma / (1.0 - gamma);
  const auto c = certificate_constants(t.alpha, beta, n);
  t.r = c.r_prime;
  t.c = c.c_prime;
  return t;
}

std::optional<Eigen::MatrixXd> synthesize_meet(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2,
                                               const NormedSpace& space) {
  if (!space.is_hilbert()) return std::nullopt;
  const Eigen::MatrixXd q1 = space.to_euclidean(p1);
  const Eigen::MatrixXd q2 = space.to_euclidean(p2);
  const auto n = q1.rows();
  // Im P1 n Im P2 = ker(I - P1) n ker(I - P2).
  Eigen::MatrixXd stacked(2 * n, n);
  stacked << Eigen::MatrixXd::Identity(n, n) - q1, Eigen::MatrixXd::Identity(n, n) - q2;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > 1e-8) ++rank;
  const Eigen::MatrixXd basis = svd.matrixV().rightCols(n - rank);
  const Eigen::MatrixXd meet = space.from_euclidean(basis * basis.transpose());
  try {
    require_meet(p1, p2, meet);
  } catch (const Error&) {
    return std::nullopt;
  }
  return meet;
}

ProjectionFamily::ProjectionFamily(NormedSpace space, std::vector<Eigen::MatrixXd> projections,
                                   std::map<PairKey, Eigen::MatrixXd> meets, std::uint64_t seed)
    : space_(std::move(space)), projections_(std::move(projections)), meets_(std::move(meets)) {
  if (projections_.empty()) throw Error("family.empty", "a projection family needs at least one projection");
  for (std::size_t i = 0; i < projections_.size(); ++i) {
    const auto& p = projections_[i];
    require_square(p, space_, "projection");
    if (!p.allFinite()) throw Error("family.non_finite", "projection has non-finite entries", {{"index", std::to_string(i + 1)}});
    const double err = max_abs(p * p - p);
    if (err > kIdempotentTol)
      throw Error("family.not_idempotent", "matrix is not a projection",
                  {{"index", std::to_string(i + 1)}, {"error", fmt(err)}});
  }
  const std::size_t n = projections_.size();
  for (const auto& [key, m] : meets_) {
    if (key.first >= key.second || key.second >= n)
      throw Error("family.meet_index", "meet index out of range",
                  {{"i", std::to_string(key.first + 1)}, {"j", std::to_string(key.second + 1)}});
    require_square(m, space_, "meet");
    require_meet(projections_[key.first], projections_[key.second], m);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!meets_.count({i, j}))
        if (auto m = synthesize_meet(projections_[i], projections_[j], space_)) {
          meets_.emplace(PairKey{i, j}, std::move(*m));
          synthesized_[{i, j}] = true;
        }

  for (std::size_t i = 0; i < n; ++i)
    beta_ = std::max(beta_, op_norm(projections_[i], space_, derive_seed(seed, i)).upper);

  bool all_cos = true;
  double cmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairKey key{i, j};
      const std::uint64_t pair_seed = derive_seed(seed, 100 + i * n + j);
      const auto it = meets_.find(key);
      const Eigen::MatrixXd* meet = it == meets_.end() ? nullptr : &it->second;
      if (meet) {
        const double c = cos_angle(projections_[i], projections_[j], *meet, space_, pair_seed);
        cosines_[key] = c;
        cmax = std::max(cmax, c);
      } else {
        all_cos = false;
      }
      const auto r = commutator_ratio(projections_[i], projections_[j], space_, meet, pair_seed);
      ratios_[key] = r;
      alpha_ = std::max(alpha_, r.upper);
      alpha_lower_ = std::max(alpha_lower_, r.lower);
    }
  if (all_cos) cos_max_ = cmax;

  averaged_ = Eigen::MatrixXd::Zero(projections_[0].rows(), projections_[0].cols());
  for (const auto& p : projections_) averaged_ += p;
  averaged_ /= static_cast<double>(n);
}

bool ProjectionFamily::has_all_meets() const noexcept {
  const std::size_t n = projections_.size();
  return meets_.size() == n * (n - 1) / 2;
}

std::size_t ProjectionFamily::intersection_dimension(double tol) const {
  const auto d = static_cast<Eigen::Index>(space_.dimension);
  Eigen::MatrixXd stacked(d * static_cast<Eigen::Index>(projections_.size()), d);
  for (std::size_t i = 0; i < projections_.size(); ++i)
    stacked.middleRows(static_cast<Eigen::Index>(i) * d, d) = Eigen::MatrixXd::Identity(d, d) - projections_[i];
  return space_.dimension - rank_of(stacked, tol);
}

nlohmann::json ProjectionFamily::to_json() const {
  nlohmann::json j;
  j["space"] = space_.to_json();
  j["projections"] = nlohmann::json::array();
  for (const auto& p : projections_) j["projections"].push_back(matrix_to_json(p));
  nlohmann::json meets = nlohmann::json::object();
  for (const auto& [key, m] : meets_)
    if (!synthesized_.count(key)) meets[std::to_string(key.first + 1) + "," + std::to_string(key.second + 1)] = matrix_to_json(m);
  if (!meets.empty()) j["meets"] = meets;
  return j;
}

ProjectionFamily ProjectionFamily::from_json(const nlohmann::json& j, std::uint64_t seed) {
  if (!j.is_object()) throw Error("family.json", "family must be a JSON object");
  if (!j.contains("space") || !j.contains("projections"))
    throw Error("family.json", "family needs 'space' and 'projections'");
  NormedSpace space = NormedSpace::from_json(j.at("space"));
  std::vector<Eigen::MatrixXd> ps;
  if (!j.at("projections").is_array()) throw Error("family.json", "'projections' must be an array");
  for (const auto& m : j.at("projections")) ps.push_back(matrix_from_json(m));
  std::map<PairKey, Eigen::MatrixXd> meets;
  if (j.contains("meets")) {
    if (!j.at("meets").is_object()) throw Error("family.json", "'meets' must map \"i,j\" to matrices");
    for (auto it = j.at("meets").begin(); it != j.at("meets").end(); ++it) {
      std::size_t a = 0, b = 0;
      char comma = 0;
      std::istringstream key(it.key());
      if (!(key >> a >> comma >> b) || comma != ',' || a < 1 || b <= a)
        throw Error("family.meet_index", "meet keys must read \"i,j\" with 1 <= i < j", {{"key", it.key()}});
      meets.emplace(PairKey{a - 1, b - 1}, matrix_from_json(it.value()));
    }
  }
  return ProjectionFamily(std::move(space), std::move(ps), std::move(meets), seed);
}

double e_functional(const ProjectionFamily& family, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != family.dimension())
    throw Error("projection.dimension", "vector length does not match the space dimension");
  const auto& ps = family.projections();
  double e = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = i + 1; j < ps.size(); ++j) e += family.space().norm((ps[i] - ps[j]) * v);
  return e;
}

bool ConvergenceCertificate::sound(double slack) const {
  if (!converged) return false;
  if (idempotence_error > slack || containment_error > slack || fixed_vector_error > slack) return false;
  if (rank_t_infinity != intersection_dim) return false;
  return !certificate_mode || max_violation <= slack;
}

nlohmann::json ConvergenceCertificate::to_json() const {
  nlohmann::json j;
  j["certificate_mode"] = certificate_mode;
  j["converged"] = converged;
  j["converged_at"] = converged_at;
  if (lemma) {
    j["r_prime"] = lemma->r_prime;
    j["c_prime"] = lemma->c_prime;
    j["lemma_violation"] = lemma_violation;
  } else {
    j["lemma_diagnostic"] = lemma_diagnostic;
  }
  if (theorem) {
    j["alpha_from_angle"] = theorem->alpha;
    j["r"] = theorem->r;
    j["c"] = theorem->c;
    j["theorem_violation"] = theorem_violation;
  } else {
    j["theorem_diagnostic"] = theorem_diagnostic;
  }
  j["max_violation"] = number_to_json(max_violation);
  j["iterates_checked"] = iterates_checked;
  j["distances"] = distances;
  j["idempotence_error"] = idempotence_error;
  j["containment_error"] = containment_error;
  j["fixed_vector_error"] = fixed_vector_error;
  j["rank_t_infinity"] = rank_t_infinity;
  j["intersection_dim"] = intersection_dim;
  j["flags"] = flags;
  j["sound"] = sound();
  j["t_infinity"] = matrix_to_json(t_infinity);
  return j;
}

ConvergenceCertificate iterate_averaged(const ProjectionFamily& family, const IterateOptions& opt) {
  ConvergenceCertificate cert;
  const std::size_t n = family.size();
  const double beta = family.beta();
  if (std::isfinite(family.alpha())) {
    try {
      cert.lemma = certificate_constants(family.alpha(), beta, n);
    } catch (const HypothesisError& e) {
      cert.lemma_diagnostic = e.code() + ": " + e.what();
    }
  } else {
    cert.lemma_diagnostic = "certificate.alpha: no finite upper bound on a(P_i, P_j)";
  }
  if (family.cos_max()) {
    try {
      cert.theorem = theorem_constants(*family.cos_max(), beta, n);
    } catch (const HypothesisError& e) {
      cert.theorem_diagnostic = e.code() + ": " + e.what();
    }
  } else {
    cert.theorem_diagnostic = "theorem.meets: some pairwise meet projection is unavailable";
  }
  cert.certificate_mode = cert.lemma.has_value() || cert.theorem.has_value();
  if (!cert.certificate_mode) cert.flags.emplace_back("no uniform-rate certificate");

  const Eigen::MatrixXd& t = family.averaged();
  const auto d = t.rows();
  std::vector<Eigen::MatrixXd> powers;
  powers.reserve(opt.check_n + 1);
  Eigen::MatrixXd cur = Eigen::MatrixXd::Identity(d, d);
  powers.push_back(cur);
  std::size_t k = 0;
  while (k < opt.max_iter) {
    Eigen::MatrixXd next = cur * t;
    ++k;
    const double diff = max_abs(next - cur);
    cur = std::move(next);
    if (k <= opt.check_n) powers.push_back(cur);
    if (!cert.converged && diff < opt.tol) {
      cert.converged = true;
      cert.converged_at = k;
    }
    if (cert.converged && k >= opt.check_n) break;
  }
  if (!cert.converged) cert.flags.emplace_back("not converged within max_iter");

  // Squaring removes the geometric tail left at the stopping point.
  Eigen::MatrixXd limit = cur;
  if (cert.converged) {
    double err = max_abs(limit * limit - limit);
    for (int i = 0; i < 64 && err > 0.0; ++i) {
      const Eigen::MatrixXd sq = limit * limit;
      const double e2 = max_abs(sq * sq - sq);
      if (!(e2 < err)) break;
      limit = sq;
      err = e2;
    }
  }
  cert.t_infinity = limit;

  cert.iterates_checked = powers.size() - 1;
  cert.distances.resize(powers.size());
  parallel_for(powers.size(), [&](std::size_t i) {
    cert.distances[i] = op_norm(limit - powers[i], family.space(), derive_seed(opt.seed, i)).upper;
  });
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double nd = static_cast<double>(i);
    if (cert.lemma)
      cert.lemma_violation =
          std::max(cert.lemma_violation, cert.distances[i] - cert.lemma->c_prime * std::pow(cert.lemma->r_prime, nd));
    if (cert.theorem)
      cert.theorem_violation =
          std::max(cert.theorem_violation, cert.distances[i] - cert.theorem->c * std::pow(cert.theorem->r, nd));
  }
  cert.max_violation = std::max(cert.lemma_violation, cert.theorem_violation);

  cert.idempotence_error = max_abs(limit * limit - limit);
  for (const auto& p : family.projections()) cert.containment_error = std::max(cert.containment_error, max_abs(p * limit - limit));

  Eigen::BDCSVD<Eigen::MatrixXd> svd(limit, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  while (cert.rank_t_infinity < static_cast<std::size_t>(s.size()) &&
         s(static_cast<Eigen::Index>(cert.rank_t_infinity)) > 1e-8 * scale)
    ++cert.rank_t_infinity;
  cert.intersection_dim = family.intersection_dimension();
  const Eigen::MatrixXd basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(cert.rank_t_infinity));
  for (const auto& p : family.projections())
    cert.fixed_vector_error = std::max(cert.fixed_vector_error, max_abs(p * basis - basis));

  if (cert.certificate_mode && cert.max_violation > opt.slack) cert.flags.emplace_back("bound violated");
  if (cert.rank_t_infinity != cert.intersection_dim) cert.flags.emplace_back("rank mismatch");
  return cert;
}

}  // namespace robust_t
