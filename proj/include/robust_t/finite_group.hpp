#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace robust_t {

using Element = std::uint32_t;

// Dense tables are limited to 2^16 elements; larger groups (congruence
// quotients) are handled by the expander module without a table.
inline constexpr std::size_t kMaxTableOrder = std::size_t{1} << 16;

// A finite group given by its full multiplication table. Elements are dense
// indices 0..order-1 and index 0 is the identity. Immutable once built; share
// through GroupPtr.
class GroupTable {
 public:
  // Validates the table (Latin square, identity at 0, associativity) and
  // derives inverses. Throws robust_t::Error on any violation.
  GroupTable(std::size_t order, std::vector<Element> mul,
             std::map<std::string, Element> generators = {});

  std::size_t order() const noexcept { return order_; }
  Element identity() const noexcept { return 0; }
  Element mul(Element a, Element b) const { return mul_[std::size_t{a} * order_ + b]; }
  Element inv(Element a) const { return inv_[a]; }
  std::span<const Element> table() const noexcept { return mul_; }

  const std::map<std::string, Element>& generators() const noexcept { return generators_; }
  Element generator(const std::string& label) const;

  // Order of an element (smallest n >= 1 with a^n = e).
  std::size_t element_order(Element a) const;

  // Exhaustive associativity check up to 512 elements, otherwise `samples`
  // random triples drawn from `seed`.
  bool is_associative(std::uint64_t seed = 0, std::size_t samples = 100000) const;

  // Stable fingerprint of (order, table); used as group_id in JSON.
  std::string fingerprint() const;

  nlohmann::json to_json() const;
  static GroupTable from_json(const nlohmann::json& j);

 private:
  std::size_t order_;
  std::vector<Element> mul_;
  std::vector<Element> inv_;
  std::map<std::string, Element> generators_;
};

using GroupPtr = std::shared_ptr<const GroupTable>;

class Subgroup {
 public:
  // `elements` need not be sorted; closure under mul/inv is verified.
  Subgroup(GroupPtr parent, std::vector<Element> elements);

  const GroupPtr& parent() const noexcept { return parent_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t index() const noexcept { return parent_->order() / elements_.size(); }
  bool contains(Element g) const;

  friend bool operator==(const Subgroup& a, const Subgroup& b) {
    return a.parent_ == b.parent_ && a.elements_ == b.elements_;
  }

 private:
  GroupPtr parent_;
  std::vector<Element> elements_;
};

Subgroup intersection(const Subgroup& a, const Subgroup& b);

// Smallest subgroup containing `seeds` (breadth-first closure).
Subgroup closure(const GroupPtr& parent, std::span<const Element> seeds);
Subgroup closure(const GroupPtr& parent, std::initializer_list<Element> seeds);

// Right cosets K g of a subgroup.
struct RightCosetPartition {
  Subgroup subgroup;
  std::vector<std::vector<Element>> cosets;  // each sorted; ordered by smallest element
  std::vector<std::size_t> coset_of;         // element -> coset index
};

RightCosetPartition right_cosets(const Subgroup& sub);

// Heisenberg group H_q of upper unitriangular 3x3 matrices over F_q, elements
// (a, b, c) ~ [[1,a,c],[0,1,b],[0,0,1]] indexed a*q^2 + b*q + c. Generators
// "x" = (1,0,0) and "y" = (0,1,0).
GroupPtr build_heisenberg(std::uint32_t q);

// F_q x F_q, element (a, b) indexed a*q + b; generators "x" = (1,0), "y" = (0,1).
GroupPtr build_elementary_abelian_pair(std::uint32_t q);

// Group generated by permutations of {0..degree-1}. Element 0 is the identity;
// the rest are numbered in breadth-first order from the generators.
GroupPtr build_permutation_group(std::size_t degree,
                                 const std::map<std::string, std::vector<std::uint32_t>>& gens);

// S_n with adjacent transpositions "s1" = (0 1), ..., "s{n-1}".
GroupPtr build_symmetric(std::size_t n);

// Dihedral group of order 2n acting on the n-gon: rotation "r", reflections
// "s" (i -> -i) and "t" = s r (i -> 1 - i).
GroupPtr build_dihedral(std::size_t n);

struct SubgroupPair {
  Subgroup k1;
  Subgroup k2;
};

// K1 = closure of the generators labelled in `labels1`, likewise K2.
SubgroupPair generated_pair(const GroupPtr& g, const std::vector<std::string>& labels1,
                            const std::vector<std::string>& labels2);

bool is_prime(std::uint64_t n);

}  // namespace robust_t
