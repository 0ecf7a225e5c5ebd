#include "tcrng/type_classes.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <map>

#include "tcrng/errors.hpp"

namespace tcrng {

namespace {

struct WhittleTerms {
  BigCount multinomials;  // prod_s n_s! / prod_{s,a} n_{s,a}!
  BigCount cofactor;      // signed (final, start) cofactor of the integer Laplacian
  BigCount denominator;   // prod of n_s over retained states other than final
};

// nullopt when the counts are inconsistent or admit no Eulerian path.
std::optional<WhittleTerms> whittle_terms(const TypeCounts& t) {
  const std::size_t states = t.num_states();
  if (states == 0 || t.counts.size() != states * static_cast<std::size_t>(t.alpha)) {
    return std::nullopt;
  }
  if (t.start >= states || t.final_state >= states) return std::nullopt;
  if (!t.consistent()) return std::nullopt;

  WhittleTerms out{1, 1, 1};
  if (t.n == 0) return out;  // consistent() forced start == final
  if (t.state_total(t.start) == 0) return std::nullopt;

  // Retained states: positive out-degree, plus both endpoints.
  std::vector<std::size_t> active;
  std::vector<std::ptrdiff_t> position(states, -1);
  for (std::size_t s = 0; s < states; ++s) {
    if (t.state_total(s) > 0 || s == t.start || s == t.final_state) {
      position[s] = static_cast<std::ptrdiff_t>(active.size());
      active.push_back(s);
    }
  }

  const std::size_t dim = active.size();
  std::vector<BigCount> laplacian(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t s = active[i];
    laplacian[i * dim + i] += static_cast<unsigned long>(t.state_total(s));
    std::uint64_t partial = 0;
    for (int a = 0; a < t.alpha; ++a) {
      const std::uint32_t c = t.count(s, a);
      if (c == 0) continue;
      const std::size_t dest = (s * static_cast<std::size_t>(t.alpha) + static_cast<std::size_t>(a)) % states;
      const auto j = static_cast<std::size_t>(position[dest]);
      laplacian[i * dim + j] -= static_cast<unsigned long>(c);
      partial += c;
      BigCount binom;
      mpz_bin_uiui(binom.get_mpz_t(), partial, c);
      out.multinomials *= binom;
    }
    if (s != t.final_state) out.denominator *= static_cast<unsigned long>(t.state_total(s));
  }

  const auto row_drop = static_cast<std::size_t>(position[t.final_state]);
  const auto col_drop = static_cast<std::size_t>(position[t.start]);
  std::vector<BigCount> minor;
  minor.reserve((dim - 1) * (dim - 1));
  for (std::size_t i = 0; i < dim; ++i) {
    if (i == row_drop) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      if (j != col_drop) minor.push_back(laplacian[i * dim + j]);
    }
  }
  out.cofactor = bareiss_determinant(std::move(minor), dim - 1);
  if ((row_drop + col_drop) % 2 == 1) out.cofactor = -out.cofactor;
  if (out.cofactor <= 0) return std::nullopt;
  return out;
}

std::uint32_t& count_ref(TypeCounts& t, std::size_t s, int a) {
  return t.counts[s * static_cast<std::size_t>(t.alpha) + static_cast<std::size_t>(a)];
}

}  // namespace

std::uint64_t TypeCounts::state_total(std::size_t s) const {
  std::uint64_t total = 0;
  for (int a = 0; a < alpha; ++a) total += count(s, a);
  return total;
}

ModelSpec TypeCounts::spec() const {
  const ModelSpec base(alpha, k);
  return base.with_initial_state(base.state_symbols(start));
}

bool TypeCounts::consistent() const {
  const std::size_t states = num_states();
  if (start >= states || final_state >= states) return false;
  std::vector<std::int64_t> balance(states, 0);
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < states; ++s) {
    for (int a = 0; a < alpha; ++a) {
      const std::uint32_t c = count(s, a);
      total += c;
      balance[s] -= c;
      balance[(s * static_cast<std::size_t>(alpha) + static_cast<std::size_t>(a)) % states] += c;
    }
  }
  if (total != n) return false;
  for (std::size_t s = 0; s < states; ++s) {
    const std::int64_t expected = (s == final_state ? 1 : 0) - (s == start ? 1 : 0);
    if (balance[s] != expected) return false;
  }
  return true;
}

TypeKey type_key(const TypeCounts& t) {
  TypeKey key;
  key.reserve(t.counts.size() + 4);
  key.push_back(static_cast<std::uint32_t>(t.alpha));
  key.push_back(static_cast<std::uint32_t>(t.k));
  key.push_back(static_cast<std::uint32_t>(t.start));
  key.push_back(static_cast<std::uint32_t>(t.final_state));
  key.insert(key.end(), t.counts.begin(), t.counts.end());
  return key;
}

std::size_t TypeKeyHash::operator()(const TypeKey& key) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t v : key) {
    h ^= v;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

TypeCounts empty_type(const ModelSpec& spec) {
  TypeCounts t;
  t.alpha = spec.alpha();
  t.k = spec.order();
  t.n = 0;
  t.counts.assign(spec.num_states() * static_cast<std::size_t>(spec.alpha()), 0);
  t.start = spec.initial_state_index();
  t.final_state = t.start;
  return t;
}

TypeCounts counts_of(std::span<const int> x, const ModelSpec& spec) {
  spec.validate(x);
  TypeCounts t = empty_type(spec);
  std::size_t s = t.start;
  for (int a : x) {
    ++count_ref(t, s, a);
    s = spec.next_state(s, a);
  }
  t.n = x.size();
  t.final_state = s;
  return t;
}

TypeCounts extend_type(const TypeCounts& t, int a) {
  TypeCounts out = t;
  ++count_ref(out, t.final_state, a);
  ++out.n;
  out.final_state = (t.final_state * static_cast<std::size_t>(t.alpha) + static_cast<std::size_t>(a)) %
                    t.num_states();
  return out;
}

std::optional<TypeCounts> typecut(const TypeCounts& t, int a) {
  if (t.n == 0 || a < 0 || a >= t.alpha) return std::nullopt;
  const std::size_t states = t.num_states();
  const auto alpha = static_cast<std::size_t>(t.alpha);
  // The last transition leaves state (a, f_1..f_{k-1}) on symbol f_k.
  std::size_t prev = 0;
  int last = a;
  if (t.k > 0) {
    last = static_cast<int>(t.final_state % alpha);
    prev = t.final_state / alpha + static_cast<std::size_t>(a) * (states / alpha);
  }
  if (t.count(prev, last) == 0) return std::nullopt;
  TypeCounts out = t;
  --count_ref(out, prev, last);
  --out.n;
  out.final_state = prev;
  if (shared_class_size_cache().size(out) == 0) return std::nullopt;
  return out;
}

std::optional<TypeCounts> typecut(const TypeCounts& t, std::span<const int> u) {
  std::optional<TypeCounts> cur = t;
  for (auto it = u.rbegin(); it != u.rend() && cur; ++it) cur = typecut(*cur, *it);
  return cur;
}

BigCount class_size(const TypeCounts& t) {
  const auto terms = whittle_terms(t);
  if (!terms) return 0;
  BigCount size = terms->multinomials * terms->cofactor;
  BigCount rem;
  mpz_tdiv_qr(size.get_mpz_t(), rem.get_mpz_t(), size.get_mpz_t(), terms->denominator.get_mpz_t());
  if (rem != 0) throw std::logic_error("class size is not an integer; counts table is corrupt");
  return size;
}

std::optional<BigRational> whittle_cofactor(const TypeCounts& t) {
  const auto terms = whittle_terms(t);
  if (!terms) return std::nullopt;
  BigRational w(terms->cofactor, terms->denominator);
  w.canonicalize();
  return w;
}

BigCount ClassSizeCache::size(const TypeCounts& t) {
  TypeKey key = type_key(t);
  {
    std::lock_guard lock(mutex_);
    if (auto it = table_.find(key); it != table_.end()) return it->second;
  }
  BigCount value = class_size(t);
  std::lock_guard lock(mutex_);
  if (table_.size() >= max_entries_) table_.clear();
  table_.emplace(std::move(key), value);
  return value;
}

void ClassSizeCache::clear() {
  std::lock_guard lock(mutex_);
  table_.clear();
}

std::size_t ClassSizeCache::entries() const {
  std::lock_guard lock(mutex_);
  return table_.size();
}

ClassSizeCache& shared_class_size_cache() {
  static ClassSizeCache cache;
  return cache;
}

namespace {

// Symbol x_j for 1-based j, reaching into s0 for j <= 0.
int symbol_at(std::span<const int> x, const ModelSpec& spec, std::ptrdiff_t j) {
  if (j >= 1) return x[static_cast<std::size_t>(j - 1)];
  return spec.initial_state()[static_cast<std::size_t>(j + spec.order() - 1)];
}

}  // namespace

BigCount rank(std::span<const int> x, const ModelSpec& spec) {
  auto& cache = shared_class_size_cache();
  TypeCounts cur = counts_of(x, spec);
  BigCount r = 0;
  for (auto m = static_cast<std::ptrdiff_t>(x.size()); m >= 1; --m) {
    const int sym = symbol_at(x, spec, m - spec.order());
    for (int a = 0; a < sym; ++a) r += cache.size(typecut(cur, a));
    auto next = typecut(cur, sym);
    if (!next) throw std::logic_error("rank: sequence left its own type class");
    cur = std::move(*next);
  }
  return r;
}

SymbolSequence unrank(const TypeCounts& t, const BigCount& index) {
  auto& cache = shared_class_size_cache();
  const BigCount total = cache.size(t);
  if (index < 0 || index >= total) {
    throw RangeError("unrank: index " + big_to_string(index) + " outside class of size " +
                     big_to_string(total));
  }
  const auto n = static_cast<std::ptrdiff_t>(t.n);
  const auto k = static_cast<std::ptrdiff_t>(t.k);
  SymbolSequence x(t.n);
  const ModelSpec base(t.alpha, t.k);
  const auto final_symbols = base.state_symbols(t.final_state);
  for (std::ptrdiff_t j = 1; j <= k; ++j) {
    const std::ptrdiff_t pos = n - k + j;
    if (pos >= 1) x[static_cast<std::size_t>(pos - 1)] = final_symbols[static_cast<std::size_t>(j - 1)];
  }
  BigCount rest = index;
  TypeCounts cur = t;
  for (std::ptrdiff_t m = n; m >= 1; --m) {
    std::optional<TypeCounts> chosen;
    for (int a = 0; a < t.alpha; ++a) {
      auto cut = typecut(cur, a);
      const BigCount sz = cache.size(cut);
      if (rest < sz) {
        if (m - k >= 1) x[static_cast<std::size_t>(m - k - 1)] = a;
        chosen = std::move(cut);
        break;
      }
      rest -= sz;
    }
    if (!chosen) throw std::logic_error("unrank: subclass sizes do not add up to |T|");
    cur = std::move(*chosen);
  }
  return x;
}

std::vector<TypeCounts> extend_level(const std::vector<TypeCounts>& level) {
  std::map<TypeKey, TypeCounts> next;
  for (const auto& t : level) {
    for (int a = 0; a < t.alpha; ++a) {
      TypeCounts e = extend_type(t, a);
      next.try_emplace(type_key(e), std::move(e));
    }
  }
  std::vector<TypeCounts> out;
  out.reserve(next.size());
  for (auto& [key, t] : next) out.push_back(std::move(t));
  return out;
}

std::vector<TypeCounts> all_types(const ModelSpec& spec, std::size_t n, std::size_t max_types) {
  std::vector<TypeCounts> level{empty_type(spec)};
  for (std::size_t m = 0; m < n; ++m) {
    level = extend_level(level);
    if (level.size() > max_types) {
      throw ResourceError("number of types at length " + std::to_string(m + 1) +
                          " exceeds the configured bound");
    }
  }
  return level;
}

std::uint64_t brute_force_bound() {
  if (const char* env = std::getenv("TCRNG_BRUTE_BOUND")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::uint64_t{1} << 22;
}

std::uint64_t checked_sequence_count(int alpha, std::size_t n, std::uint64_t bound) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > bound / static_cast<std::uint64_t>(alpha)) {
      throw ResourceError("alpha^n exceeds the brute-force bound of " + std::to_string(bound));
    }
    total *= static_cast<std::uint64_t>(alpha);
  }
  if (total > bound) throw ResourceError("alpha^n exceeds the brute-force bound");
  return total;
}

std::uint64_t sequence_code(std::span<const int> x, int alpha) {
  std::uint64_t code = 0;
  for (auto it = x.rbegin(); it != x.rend(); ++it) {
    code = code * static_cast<std::uint64_t>(alpha) + static_cast<std::uint64_t>(*it);
  }
  return code;
}

SymbolSequence decode_sequence(std::uint64_t code, int alpha, std::size_t n) {
  SymbolSequence x(n);
  for (auto& a : x) {
    a = static_cast<int>(code % static_cast<std::uint64_t>(alpha));
    code /= static_cast<std::uint64_t>(alpha);
  }
  return x;
}

std::vector<SymbolSequence> brute_force_class(std::span<const int> x, const ModelSpec& spec,
                                              std::uint64_t bound) {
  const std::uint64_t total = checked_sequence_count(spec.alpha(), x.size(), bound);
  const TypeCounts target = counts_of(x, spec);
  std::vector<SymbolSequence> out;
  for (std::uint64_t code = 0; code < total; ++code) {
    auto y = decode_sequence(code, spec.alpha(), x.size());
    if (counts_of(y, spec) == target) out.push_back(std::move(y));
  }
  return out;
}

std::string type_to_json(const TypeCounts& t) {
  const ModelSpec base(t.alpha, t.k);
  nlohmann::ordered_json j;
  j["n"] = t.n;
  j["start"] = base.state_symbols(t.start);
  j["final"] = base.state_symbols(t.final_state);
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < t.alpha; ++a) {
      if (t.count(s, a) > 0) counts[std::to_string(s) + "," + std::to_string(a)] = t.count(s, a);
    }
  }
  j["counts"] = std::move(counts);
  return j.dump();
}

}  // namespace tcrng
