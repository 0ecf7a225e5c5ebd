#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcrng/fvr.hpp"
#include "tcrng/markov_model.hpp"

namespace tcrng {

// Order penalty phi(n). The MDL form is (alpha - 1) log2(n) / (2n); the scaled
// form is beta log2(n) / n.
class Penalty {
 public:
  static Penalty mdl() { return Penalty(Kind::Mdl, 0.0); }
  static Penalty scaled(double beta) { return Penalty(Kind::Scaled, beta); }
  // "mdl" or "c:<beta>"
  static Penalty parse(std::string_view text);

  double value(int alpha, std::size_t n) const;
  std::string describe() const;

 private:
  enum class Kind { Mdl, Scaled };
  Penalty(Kind kind, double beta) : kind_(kind), beta_(beta) {}
  Kind kind_;
  double beta_;
};

struct OrderEstimate {
  int k_hat = 0;
  std::vector<std::pair<int, double>> scores;  // (k, H_k + alpha^k phi(n))
};

// k-th order empirical conditional entropy in bits per symbol, with the past
// before x_1 taken as all zeros.
double empirical_cond_entropy(std::span<const int> x, int alpha, int k);

// Default search range: max(0, floor(log_alpha n) - 1).
int default_max_order(int alpha, std::size_t n);

// Minimizer of H_k + alpha^k phi(n) over 0 <= k <= k_max; ties go to the smaller k.
OrderEstimate estimate_order(std::span<const int> x, int alpha, const Penalty& phi, int k_max);

// U(x): sequences with the same estimated order and the same type at that order.
// Exhaustive; throws ResourceError above the brute-force bound.
std::vector<SymbolSequence> u_class(std::span<const int> x, int alpha, const Penalty& phi, int k_max,
                                    std::uint64_t bound = brute_force_bound());

FvrOutput tu_generate_exact(std::span<const int> x, int alpha, const TargetSet& target,
                            const Penalty& phi, int k_max);

struct PracticalFvrOutput {
  FvrOutput output;
  int k_hat = 0;
};

// Estimate the order, then run E2 at that order from the all-zero state.
PracticalFvrOutput tu_generate_practical(std::span<const int> x, int alpha, const TargetSet& target,
                                         const Penalty& phi, int k_max);

// Partition of A^n into U-classes, built once for exhaustive experiments.
class UClassPartition {
 public:
  UClassPartition(int alpha, std::size_t n, const Penalty& phi, int k_max,
                  std::uint64_t bound = brute_force_bound());

  int alpha() const { return alpha_; }
  std::size_t length() const { return n_; }
  std::uint64_t sequences() const { return static_cast<std::uint64_t>(class_of_.size()); }
  int estimated_order(std::uint64_t code) const { return k_hat_[code]; }
  std::size_t class_of(std::uint64_t code) const { return class_of_[code]; }
  std::uint64_t index_in_class(std::uint64_t code) const { return index_[code]; }
  std::uint64_t class_size(std::size_t class_id) const { return sizes_[class_id]; }
  std::size_t num_classes() const { return sizes_.size(); }

  FvrOutput generate(std::uint64_t code, const TargetSet& target) const;

 private:
  int alpha_;
  std::size_t n_;
  std::vector<int> k_hat_;
  std::vector<std::size_t> class_of_;
  std::vector<std::uint64_t> index_;
  std::vector<std::uint64_t> sizes_;
};

// Any FVR on inputs of one fixed length.
using FvrMap = std::function<FvrOutput(std::span<const int>)>;

// D(F) = sum_M P(M)/M sum_{r,r'} |Q_M(r) - Q_M(r')| by enumerating all alpha^n inputs.
double distance_to_uniformity(const FvrMap& scheme, const MarkovParams& params, std::size_t n,
                              std::uint64_t bound = brute_force_bound());
BigRational distance_to_uniformity(const FvrMap& scheme, const RationalParams& params, std::size_t n,
                                   std::uint64_t bound = brute_force_bound());

// P(k_hat < k) and P(k_hat > k) for the source's true order k.
struct OrderErrorProbabilities {
  BigRational under;
  BigRational over;
};
OrderErrorProbabilities order_error_probabilities(const RationalParams& params, std::size_t n,
                                                  const Penalty& phi, int k_max,
                                                  std::uint64_t bound = brute_force_bound());

}  // namespace tcrng
