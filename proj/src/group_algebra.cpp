#include "robust_t/group_algebra.hpp"

#include <algorithm>
#include <cmath>

#include "robust_t/error.hpp"

namespace robust_t {

namespace {

void require_same_group(const GroupFunction& a, const GroupFunction& b) {
  if (a.group() != b.group() && a.group()->fingerprint() != b.group()->fingerprint())
    throw Error("algebra.group_mismatch", "group functions live on different groups");
}

}  // namespace

GroupFunction::GroupFunction(GroupPtr group) : group_(std::move(group)) {
  if (!group_) throw Error("algebra.group", "group function needs a group");
  values_.assign(group_->order(), 0.0);
}

GroupFunction::GroupFunction(GroupPtr group, std::vector<double> values)
    : group_(std::move(group)), values_(std::move(values)) {
  if (!group_) throw Error("algebra.group", "group function needs a group");
  if (values_.size() != group_->order())
    throw Error("algebra.size", "value vector length differs from group order",
                {{"order", std::to_string(group_->order())}, {"got", std::to_string(values_.size())}});
  for (double v : values_)
    if (!std::isfinite(v)) throw Error("algebra.non_finite", "group function values must be finite");
}

double GroupFunction::mass() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

bool GroupFunction::is_symmetric(double tol) const {
  for (std::size_t g = 0; g < values_.size(); ++g)
    if (std::abs(values_[g] - values_[group_->inv(static_cast<Element>(g))]) > tol) return false;
  return true;
}

double GroupFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GroupFunction& GroupFunction::operator+=(const GroupFunction& o) {
  require_same_group(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GroupFunction& GroupFunction::operator-=(const GroupFunction& o) {
  require_same_group(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GroupFunction& GroupFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GroupFunction operator+(GroupFunction a, const GroupFunction& b) { return a += b; }
GroupFunction operator-(GroupFunction a, const GroupFunction& b) { return a -= b; }
GroupFunction operator*(double s, GroupFunction f) { return f *= s; }

nlohmann::json GroupFunction::to_json() const {
  return {{"group_id", group_->fingerprint()}, {"values", values_}};
}

GroupFunction GroupFunction::from_json(GroupPtr group, const nlohmann::json& j) {
  try {
    const auto id = j.at("group_id").get<std::string>();
    if (id != group->fingerprint())
      throw Error("algebra.group_mismatch", "group_id does not match the supplied group",
                  {{"expected", group->fingerprint()}, {"got", id}});
    return GroupFunction(std::move(group), j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error("algebra.json", std::string("malformed group function JSON: ") + e.what());
  }
}

GroupFunction scaled_delta(const GroupPtr& group, Element a) {
  GroupFunction f(group);
  f[a] = static_cast<double>(group->order());
  return f;
}

GroupFunction convolution_unit(const GroupPtr& group) { return scaled_delta(group, 0); }

GroupFunction averaging_idempotent(const Subgroup& sub) {
  GroupFunction f(sub.parent());
  const double height = static_cast<double>(sub.parent()->order()) / static_cast<double>(sub.size());
  for (Element k : sub.elements()) f[k] = height;
  return f;
}

GroupFunction convolve(const GroupFunction& f, const GroupFunction& g) {
  require_same_group(f, g);
  const auto& G = *f.group();
  const std::size_t n = G.order();
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double fs = f(static_cast<Element>(s));
    if (fs == 0.0) continue;
    // h = s u  =>  s^-1 h = u
    for (std::size_t u = 0; u < n; ++u) out[G.mul(static_cast<Element>(s), static_cast<Element>(u))] += fs * g(static_cast<Element>(u));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv_n;
  return GroupFunction(f.group(), std::move(out));
}

GroupFunction involution(const GroupFunction& f) {
  const auto& G = *f.group();
  std::vector<double> out(G.order());
  for (std::size_t g = 0; g < G.order(); ++g) out[g] = f(G.inv(static_cast<Element>(g)));
  return GroupFunction(f.group(), std::move(out));
}

RegularRepMatrix regular_rep(const GroupFunction& f) {
  const auto& G = *f.group();
  const std::size_t n = G.order();
  if (n > kDenseRegularCap)
    throw Error("algebra.dense_cap", "group too large for a dense regular representation",
                {{"order", std::to_string(n)}, {"cap", std::to_string(kDenseRegularCap)}});
  Eigen::MatrixXd m(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t u = 0; u < n; ++u)
      m(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(u)) =
          f(G.mul(static_cast<Element>(h), G.inv(static_cast<Element>(u)))) * inv_n;
  return {f.group(), std::move(m)};
}

Eigen::MatrixXd left_translation(const GroupTable& group, Element g) {
  const std::size_t n = group.order();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  // (lambda(g) phi)(h) = phi(g^-1 h): row h has a 1 in column g^-1 h.
  const Element gi = group.inv(g);
  for (std::size_t h = 0; h < n; ++h)
    m(static_cast<Eigen::Index>(h), group.mul(gi, static_cast<Element>(h))) = 1.0;
  return m;
}

}  // namespace robust_t
