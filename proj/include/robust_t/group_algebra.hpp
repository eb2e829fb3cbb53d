#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "robust_t/finite_group.hpp"

namespace robust_t {

// Largest group for which dense regular-representation matrices are formed.
inline constexpr std::size_t kDenseRegularCap = 4096;

// Element of the real group algebra of a finite group. The Haar measure is
// normalized to total mass 1, so integrals are averages: mass(f) = sum f / |G|.
class GroupFunction {
 public:
  explicit GroupFunction(GroupPtr group);  // zero function
  GroupFunction(GroupPtr group, std::vector<double> values);

  const GroupPtr& group() const noexcept { return group_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator()(Element g) const { return values_[g]; }
  double& operator[](Element g) { return values_[g]; }

  double mass() const;
  bool is_symmetric(double tol = 0.0) const;
  double max_abs() const;

  GroupFunction& operator+=(const GroupFunction& o);
  GroupFunction& operator-=(const GroupFunction& o);
  GroupFunction& operator*=(double s);

  nlohmann::json to_json() const;
  static GroupFunction from_json(GroupPtr group, const nlohmann::json& j);

 private:
  GroupPtr group_;
  std::vector<double> values_;
};

GroupFunction operator+(GroupFunction a, const GroupFunction& b);
GroupFunction operator-(GroupFunction a, const GroupFunction& b);
GroupFunction operator*(double s, GroupFunction f);

// |G| times the delta at `a`; delta(identity) is the convolution unit.
GroupFunction scaled_delta(const GroupPtr& group, Element a);
GroupFunction convolution_unit(const GroupPtr& group);

// k_K: value |G|/|K| on K, zero elsewhere (unit mass, idempotent).
GroupFunction averaging_idempotent(const Subgroup& sub);

// (f * g)(h) = (1/|G|) sum_s f(s) g(s^-1 h).
GroupFunction convolve(const GroupFunction& f, const GroupFunction& g);

// f*(g) = f(g^-1).
GroupFunction involution(const GroupFunction& f);

// Matrix of lambda(f) on L^2(G) in the basis of point masses:
// (lambda(f) phi)(h) = (1/|G|) sum_s f(s) phi(s^-1 h), i.e. M[h][u] = f(h u^-1) / |G|.
struct RegularRepMatrix {
  GroupPtr group;
  Eigen::MatrixXd matrix;
};

RegularRepMatrix regular_rep(const GroupFunction& f);

// Permutation matrix of left translation lambda(g).
Eigen::MatrixXd left_translation(const GroupTable& group, Element g);

}  // namespace robust_t
