#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcrng/big_count.hpp"

namespace tcrng {

using SymbolSequence = std::vector<int>;

// Name of the pseudo-random engine behind sample(); written into every report.
inline constexpr const char* kPrngName = "mt19937_64";

// Alphabet size, Markov order and fixed initial state of a finite-memory source.
//
// States are the k-tuples of past symbols. A state is encoded as a mixed-radix
// integer in [0, alpha^k) with the most recent symbol as the least significant
// digit, so the successor of state s on symbol a is (s * alpha + a) mod alpha^k.
// initial_state() lists s0 in chronological order (s0[k-1] is the most recent).
class ModelSpec {
 public:
  // An empty s0 selects the all-zero state.
  ModelSpec(int alpha, int k, std::vector<int> s0 = {});

  int alpha() const { return alpha_; }
  int order() const { return k_; }
  const std::vector<int>& initial_state() const { return s0_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t initial_state_index() const { return s0_index_; }

  std::size_t next_state(std::size_t s, int a) const {
    return (s * static_cast<std::size_t>(alpha_) + static_cast<std::size_t>(a)) % num_states_;
  }

  // Number of free parameters, (alpha - 1) * alpha^k.
  std::size_t free_parameters() const { return (alpha_ - 1) * num_states_; }

  std::size_t state_index(std::span<const int> chronological) const;
  std::vector<int> state_symbols(std::size_t s) const;

  // Throws InputError if any symbol is outside [0, alpha).
  void validate(std::span<const int> x) const;

  // Same alphabet and order with another initial state.
  ModelSpec with_initial_state(std::vector<int> s0) const;

  bool operator==(const ModelSpec& other) const = default;

 private:
  int alpha_;
  int k_;
  std::vector<int> s0_;
  std::size_t num_states_;
  std::size_t s0_index_;
};

// Conditional probabilities p(a|s), one row per state, all entries in (0,1).
class MarkovParams {
 public:
  MarkovParams(ModelSpec spec, std::vector<std::vector<double>> cond);

  // Memoryless source with symbol probabilities `probs`.
  static MarkovParams iid(std::vector<double> probs);

  const ModelSpec& spec() const { return spec_; }
  double cond(std::size_t s, int a) const { return cond_[s * spec_.alpha() + a]; }
  double log2_cond(std::size_t s, int a) const { return log2_cond_[s * spec_.alpha() + a]; }
  std::vector<std::vector<double>> rows() const;

 private:
  ModelSpec spec_;
  std::vector<double> cond_;
  std::vector<double> log2_cond_;
};

// Same as MarkovParams with exact rational entries; rows sum to exactly 1.
class RationalParams {
 public:
  RationalParams(ModelSpec spec, std::vector<std::vector<BigRational>> cond);

  const ModelSpec& spec() const { return spec_; }
  const BigRational& cond(std::size_t s, int a) const { return cond_[s * spec_.alpha() + a]; }
  MarkovParams to_double() const;

 private:
  ModelSpec spec_;
  std::vector<BigRational> cond_;
};

// log2 P(x), with the past before x_1 given by s0. Empty x gives 0.
double sequence_log2_probability(const MarkovParams& params, std::span<const int> x);
BigRational sequence_probability(const RationalParams& params, std::span<const int> x);

// Stationary law over the alpha^k states, by exact linear solve of the balance equations.
std::vector<double> stationary_distribution(const MarkovParams& params);

// Entropy rate in bits per symbol.
double entropy_rate(const MarkovParams& params);

// H(X^n) in bits for the chain started at s0 (chain rule over the forward state law).
double marginal_entropy(const MarkovParams& params, std::size_t n);

// Reproducible symbol source; the stream is fully determined by (params, seed).
class Sampler {
 public:
  Sampler(const MarkovParams& params, std::uint64_t seed);

  int next();
  // Resets the chain state to s0; the engine continues where it was.
  void restart() { state_ = params_.spec().initial_state_index(); }

 private:
  MarkovParams params_;
  std::mt19937_64 engine_;
  std::size_t state_;
  std::vector<double> cumulative_;
};

SymbolSequence sample(const MarkovParams& params, std::size_t n, std::uint64_t seed);

// Model file: {"alpha": int, "k": int, "s0": [int...], "cond": [[p...]...]}.
// Entries of "cond" may be JSON numbers or strings "num/den"; when every entry
// is a string the exact rational model is also available.
struct LoadedModel {
  MarkovParams params;
  std::optional<RationalParams> exact;
};

LoadedModel parse_model(std::string_view json_text);
LoadedModel load_model_file(const std::string& path);
std::string model_to_json(const MarkovParams& params);

// Stable 64-bit FNV-1a digest of the canonical model JSON, as 16 hex digits.
std::string model_hash(const MarkovParams& params);

}  // namespace tcrng
