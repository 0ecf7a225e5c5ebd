#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcrng/big_count.hpp"
#include "tcrng/markov_model.hpp"
#include "tcrng/type_classes.hpp"

namespace tcrng {

// Set of admissible output ranges M. Always contains 1.
class TargetSet {
 public:
  enum class Kind { AllPositive, PowersOf, Explicit };

  static TargetSet all_positive();
  static TargetSet powers_of(unsigned long p);
  // `values` must contain 1. Queries above `density_bound` are configuration
  // errors, since density is only verified up to that bound.
  static TargetSet explicit_list(std::vector<BigCount> values, BigCount density_bound);

  // "int", "pow2", "pow:<p>", or "list:<file>[:<bound>]" where the file holds
  // whitespace-separated positive integers. Without a bound, the largest listed
  // value is used.
  static TargetSet parse(std::string_view text);

  Kind kind() const { return kind_; }
  unsigned long base() const { return base_; }

  // Largest element <= m, for m >= 1.
  BigCount largest_at_most(const BigCount& m) const;
  bool contains(const BigCount& m) const;

  // Smallest c with m <= c * largest_at_most(m) for all admissible m.
  double density() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::AllPositive;
  unsigned long base_ = 0;
  std::vector<BigCount> values_;
  BigCount bound_;
};

struct FvrOutput {
  BigCount r;
  BigCount M;
  bool operator==(const FvrOutput&) const = default;
};

struct FvrOptions {
  // Use the first k input symbols as the initial state instead of s0.
  bool sync_state = false;
};

FvrOutput e1_generate(std::span<const int> x, const ModelSpec& spec, FvrOptions opts = {});

// |T| = M_1 + ... + M_m with each M_i the largest target element not above the remainder.
std::vector<BigCount> greedy_decompose(const BigCount& nu, const TargetSet& target);

FvrOutput e2_generate(std::span<const int> x, const ModelSpec& spec, const TargetSet& target,
                      FvrOptions opts = {});

// E2 output for a member with the given index inside a class of the given size.
FvrOutput split_index(const BigCount& class_size, BigCount index, const TargetSet& target);

// Expected log2 M over a class, |T|^{-1} sum_i M_i log2 M_i.
double conditional_length(const TypeCounts& t, const TargetSet& target);
double conditional_length(const BigCount& class_size, const TargetSet& target);

enum class FvrScheme { E1, E2 };

// Exact E_P log2 M(X^n) by summation over all types of length n.
double expected_output_length_exact(const MarkovParams& params, std::size_t n,
                                    const TargetSet& target, FvrScheme scheme);

// If M = p^e, the e base-p digits of r, least significant first.
std::optional<std::vector<unsigned long>> radix_digits(const BigCount& r, const BigCount& M,
                                                       unsigned long p);

// log2 P(x) for any member x of class t.
double type_member_log2_probability(const MarkovParams& params, const TypeCounts& t);
BigRational type_member_probability(const RationalParams& params, const TypeCounts& t);

}  // namespace tcrng
