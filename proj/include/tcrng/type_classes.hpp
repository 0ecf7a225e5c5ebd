#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcrng/big_count.hpp"
#include "tcrng/markov_model.hpp"

namespace tcrng {

// Transition counts n_{s,a} of a sequence together with its start and final
// states: the type t(x^n). Counts are stored densely, index s * alpha + a, and
// are always iterated in (state index, symbol) ascending order.
struct TypeCounts {
  int alpha = 2;
  int k = 0;
  std::size_t n = 0;
  std::vector<std::uint32_t> counts;
  std::size_t start = 0;
  std::size_t final_state = 0;

  std::size_t num_states() const { return counts.size() / static_cast<std::size_t>(alpha); }
  std::uint32_t count(std::size_t s, int a) const { return counts[s * alpha + a]; }
  std::uint64_t state_total(std::size_t s) const;

  // Model spec whose initial state is `start`.
  ModelSpec spec() const;

  // Sum of counts is n and flow is conserved from start to final.
  bool consistent() const;

  bool operator==(const TypeCounts&) const = default;
};

using TypeKey = std::vector<std::uint32_t>;

// Canonical key (alpha, k, start, final, counts...) used by caches and maps.
TypeKey type_key(const TypeCounts& t);

struct TypeKeyHash {
  std::size_t operator()(const TypeKey& key) const noexcept;
};

// Type of the empty sequence.
TypeCounts empty_type(const ModelSpec& spec);

TypeCounts counts_of(std::span<const int> x, const ModelSpec& spec);

// Type of x^n a for any x^n of type t.
TypeCounts extend_type(const TypeCounts& t, int a);

// Type of the prefixes x^{n-1} of members of t with x_{n-k} = a, or nullopt
// when no member has that symbol there.
std::optional<TypeCounts> typecut(const TypeCounts& t, int a);

// typecut for a string u = u_1..u_l aligned so that u_l sits at position n-k.
std::optional<TypeCounts> typecut(const TypeCounts& t, std::span<const int> u);

// Exact |T| by the factorial quotient times the (final, start) cofactor of the
// transition Laplacian. Returns 0 for counts that no sequence realizes.
BigCount class_size(const TypeCounts& t);

// The cofactor factor W in (0, 1] as an exact rational; nullopt if the class is empty.
std::optional<BigRational> whittle_cofactor(const TypeCounts& t);

// Thread-safe memo of class_size keyed by type_key.
class ClassSizeCache {
 public:
  explicit ClassSizeCache(std::size_t max_entries = std::size_t{1} << 21)
      : max_entries_(max_entries) {}

  BigCount size(const TypeCounts& t);
  BigCount size(const std::optional<TypeCounts>& t) { return t ? size(*t) : BigCount(0); }
  void clear();
  std::size_t entries() const;

 private:
  std::size_t max_entries_;
  mutable std::mutex mutex_;
  std::unordered_map<TypeKey, BigCount, TypeKeyHash> table_;
};

ClassSizeCache& shared_class_size_cache();

// Position of x in its type class. Members are ordered reverse-lexicographically:
// x_n is the most significant symbol.
BigCount rank(std::span<const int> x, const ModelSpec& spec);

// Member of class t with the given rank; throws RangeError unless 0 <= index < |t|.
SymbolSequence unrank(const TypeCounts& t, const BigCount& index);

// Types of length n+1 obtained by extending every type in `level` by one symbol,
// deduplicated and sorted by type_key.
std::vector<TypeCounts> extend_level(const std::vector<TypeCounts>& level);

// Every realizable type of length n exactly once, sorted by type_key.
// Throws ResourceError if a level would hold more than max_types types.
std::vector<TypeCounts> all_types(const ModelSpec& spec, std::size_t n,
                                  std::size_t max_types = std::size_t{1} << 22);

// Default bound on the number of sequences enumerated exhaustively: 2^22, or
// the value of the TCRNG_BRUTE_BOUND environment variable.
std::uint64_t brute_force_bound();

// alpha^n, or ResourceError if it exceeds bound.
std::uint64_t checked_sequence_count(int alpha, std::size_t n, std::uint64_t bound);

// Sequence codes: x_1 is the least significant base-alpha digit, so numeric
// order of codes is the reverse-lexicographic order used by rank().
std::uint64_t sequence_code(std::span<const int> x, int alpha);
SymbolSequence decode_sequence(std::uint64_t code, int alpha, std::size_t n);

// All y with counts_of(y) == counts_of(x), in reverse-lexicographic order.
std::vector<SymbolSequence> brute_force_class(std::span<const int> x, const ModelSpec& spec,
                                              std::uint64_t bound = brute_force_bound());

// {"n":..., "start":[...], "final":[...], "counts":{"s,a":c,...}} with s the
// state index; zero counts omitted.
std::string type_to_json(const TypeCounts& t);

}  // namespace tcrng
