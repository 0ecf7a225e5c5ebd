#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tcrng/big_count.hpp"
#include "tcrng/markov_model.hpp"
#include "tcrng/type_classes.hpp"

namespace tcrng {

struct VfrConfig {
  ModelSpec spec;
  std::uint64_t M = 2;
  std::optional<std::size_t> N;  // truncation depth
  // Consume the first k symbols as the initial state before generating.
  bool sync_state = false;

  // Throws InputError unless M >= 2, N >= 1 and M * alpha fits in 63 bits.
  void validate() const;
};

struct VfrResult {
  bool stopped = false;
  std::uint64_t r = 0;
  // Symbols consumed: the stop length, or N on failure. Includes the k
  // synchronizing symbols when sync_state is set.
  std::size_t length = 0;
  bool operator==(const VfrResult&) const = default;
};

struct DictProfileEntry {
  TypeCounts type;
  BigCount dict_size;  // |D(T)|
  BigCount fail_size;  // |fail_n(T)|
};

// levels[n] lists the types of length n that have surviving members,
// sorted by type_key.
struct DictProfile {
  std::uint64_t M = 2;
  std::vector<std::vector<DictProfileEntry>> levels;
};

// Explicit greedy truncated dictionary. Sequences are stored by sequence code.
struct G1Dictionary {
  VfrConfig config;
  // dict[n]: code of x^n in D_n -> label chi(x^n)
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> dict;
  // fail[n]: codes of fail_n in increasing order
  std::vector<std::vector<std::uint64_t>> fail;
  DictProfile profile;

  // Output of the truncated VFR on x (|x| >= N, or until a leaf is hit).
  VfrResult lookup(std::span<const int> x) const;
};

// Level-by-level greedy construction up to depth cfg.N (required). Within each
// type, the first j_T M survivors in reverse-lexicographic order are admitted
// with labels index mod M. Throws ResourceError if alpha^N exceeds the bound.
G1Dictionary g1_construct(const VfrConfig& cfg, std::uint64_t bound = brute_force_bound());

// Sequential generator: feed symbols one at a time.
class SequentialG2 {
 public:
  explicit SequentialG2(VfrConfig cfg);

  // Returns the result once decided (stop, or failure at depth N). Further
  // pushes after a decision throw std::logic_error.
  std::optional<VfrResult> push(int symbol);

  bool decided() const { return decided_; }
  std::size_t consumed() const { return consumed_; }
  void reset();

 private:
  void begin_body();

  VfrConfig cfg_;
  ModelSpec body_spec_;
  std::vector<int> sync_buffer_;
  TypeCounts type_;
  std::uint64_t index_ = 0;  // I_R: index of the prefix inside fail_n(T)
  std::size_t depth_ = 0;
  std::size_t consumed_ = 0;
  bool decided_ = false;
  bool in_body_ = false;
};

// Runs one generation over x. Throws InputExhausted if x ends before a
// decision and cfg.N is unset (or larger than what x provides).
VfrResult g2_generate(std::span<const int> x, const VfrConfig& cfg);
VfrResult g2_generate(const std::function<int()>& next_symbol, const VfrConfig& cfg);

// Per-level failure law of the greedy TVFR: p_fail[n] = sum_T (|T| mod M) P(x_T)
// for n = 0..N, and length[n] = sum_{m<n} p_fail[m].
struct VfrLevelStats {
  std::vector<long double> p_fail;
  std::vector<long double> length;
};
VfrLevelStats vfr_level_stats(const MarkovParams& params, std::uint64_t M, std::size_t N);

struct VfrLevelStatsExact {
  std::vector<BigRational> p_fail;
  std::vector<BigRational> length;
};
VfrLevelStatsExact vfr_level_stats(const RationalParams& params, std::uint64_t M, std::size_t N);

// Single-number forms of the above.
double expected_input_length_exact(const MarkovParams& params, std::uint64_t M, std::size_t N);
double failure_probability(const MarkovParams& params, std::uint64_t M, std::size_t N);
BigRational expected_input_length_exact(const RationalParams& params, std::uint64_t M, std::size_t N);
BigRational failure_probability(const RationalParams& params, std::uint64_t M, std::size_t N);

// Number of M-blocks j_T admitted for type t (length n) given its survivor count.
using ProfilePolicy = std::function<BigCount(const TypeCounts& t, const BigCount& surviving)>;

// j_T = floor(surviving / M).
ProfilePolicy greedy_policy(std::uint64_t M);

// Universal profile built by the recursion |fail_n(T)| = sum_a |fail_{n-1}(typecut(T,a))| - |D(T)|.
// Throws InputError if the policy admits more than the survivors.
DictProfile build_profile(const ModelSpec& spec, std::uint64_t M, std::size_t N,
                          const ProfilePolicy& policy);

// Failure and length law of an arbitrary profile.
VfrLevelStatsExact profile_level_stats(const DictProfile& profile, const RationalParams& params);
VfrLevelStats profile_level_stats(const DictProfile& profile, const MarkovParams& params);

}  // namespace tcrng
