#include "tcrng/fvr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcrng/errors.hpp"

namespace tcrng {

namespace {

struct SyncedInput {
  ModelSpec spec;
  std::span<const int> body;
};

SyncedInput apply_sync(std::span<const int> x, const ModelSpec& spec, FvrOptions opts) {
  spec.validate(x);
  if (!opts.sync_state || spec.order() == 0) return {spec, x};
  const auto k = static_cast<std::size_t>(spec.order());
  if (x.size() < k) return {spec, x.subspan(x.size())};
  return {spec.with_initial_state({x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k)}),
          x.subspan(k)};
}

}  // namespace

TargetSet TargetSet::all_positive() { return TargetSet{}; }

TargetSet TargetSet::powers_of(unsigned long p) {
  if (p < 2) throw ConfigError("power target base must be at least 2");
  TargetSet t;
  t.kind_ = Kind::PowersOf;
  t.base_ = p;
  return t;
}

TargetSet TargetSet::explicit_list(std::vector<BigCount> values, BigCount density_bound) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty() || values.front() != 1) throw ConfigError("explicit target set must contain 1");
  if (density_bound < 1) throw ConfigError("density bound must be positive");
  TargetSet t;
  t.kind_ = Kind::Explicit;
  t.values_ = std::move(values);
  t.bound_ = std::move(density_bound);
  return t;
}

TargetSet TargetSet::parse(std::string_view text) {
  if (text == "int") return all_positive();
  if (text == "pow2") return powers_of(2);
  if (text.starts_with("pow:")) {
    const std::string digits(text.substr(4));
    char* end = nullptr;
    const unsigned long p = std::strtoul(digits.c_str(), &end, 10);
    if (digits.empty() || *end != '\0') throw ConfigError("bad power target '" + std::string(text) + "'");
    return powers_of(p);
  }
  if (text.starts_with("list:")) {
    std::string rest(text.substr(5));
    std::string path = rest;
    std::optional<BigCount> bound;
    if (const auto colon = rest.rfind(':'); colon != std::string::npos) {
      path = rest.substr(0, colon);
      try {
        bound = big_from_string(rest.substr(colon + 1));
      } catch (const std::invalid_argument&) {
        throw ConfigError("bad density bound in '" + std::string(text) + "'");
      }
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open target list '" + path + "'");
    std::vector<BigCount> values;
    std::string token;
    while (in >> token) {
      try {
        values.push_back(big_from_string(token));
      } catch (const std::invalid_argument&) {
        throw ConfigError("bad target value '" + token + "' in " + path);
      }
      if (values.back() == 0) throw ConfigError("target values must be positive");
    }
    if (values.empty()) throw ConfigError("target list '" + path + "' is empty");
    const BigCount top = *std::max_element(values.begin(), values.end());
    return explicit_list(std::move(values), bound.value_or(top));
  }
  throw ConfigError("unknown target '" + std::string(text) + "' (int|pow2|pow:p|list:file)");
}

BigCount TargetSet::largest_at_most(const BigCount& m) const {
  if (m < 1) throw std::domain_error("target query below 1");
  switch (kind_) {
    case Kind::AllPositive:
      return m;
    case Kind::PowersOf: {
      BigCount rest = m;
      BigCount power = 1;
      while (rest >= base_) {
        mpz_fdiv_q_ui(rest.get_mpz_t(), rest.get_mpz_t(), base_);
        power *= base_;
      }
      return power;
    }
    case Kind::Explicit: {
      if (m > bound_) {
        throw ConfigError("target density is unverified above " + big_to_string(bound_) +
                          "; cannot decompose " + big_to_string(m));
      }
      auto it = std::upper_bound(values_.begin(), values_.end(), m);
      return *std::prev(it);
    }
  }
  return 1;
}

bool TargetSet::contains(const BigCount& m) const {
  if (m < 1) return false;
  if (kind_ == Kind::Explicit) return std::binary_search(values_.begin(), values_.end(), m);
  return largest_at_most(m) == m;
}

double TargetSet::density() const {
  switch (kind_) {
    case Kind::AllPositive:
      return 1.0;
    case Kind::PowersOf:
      return static_cast<double>(base_);
    case Kind::Explicit: {
      long double c = 1.0L;
      for (std::size_t i = 0; i < values_.size() && values_[i] <= bound_; ++i) {
        BigCount top = (i + 1 < values_.size()) ? BigCount(values_[i + 1] - 1) : bound_;
        if (top > bound_) top = bound_;
        c = std::max(c, std::exp2(big_log2(top) - big_log2(values_[i])));
      }
      return static_cast<double>(c);
    }
  }
  return 1.0;
}

std::string TargetSet::describe() const {
  switch (kind_) {
    case Kind::AllPositive:
      return "int";
    case Kind::PowersOf:
      return "pow:" + std::to_string(base_);
    case Kind::Explicit:
      return "list(" + std::to_string(values_.size()) + " values, bound " + big_to_string(bound_) + ")";
  }
  return "?";
}

FvrOutput e1_generate(std::span<const int> x, const ModelSpec& spec, FvrOptions opts) {
  const auto in = apply_sync(x, spec, opts);
  return {rank(in.body, in.spec), shared_class_size_cache().size(counts_of(in.body, in.spec))};
}

std::vector<BigCount> greedy_decompose(const BigCount& nu, const TargetSet& target) {
  if (nu < 1) throw std::domain_error("greedy_decompose needs nu >= 1");
  std::vector<BigCount> parts;
  BigCount rest = nu;
  while (rest > 0) {
    BigCount m = target.largest_at_most(rest);
    rest -= m;
    parts.push_back(std::move(m));
  }
  return parts;
}

FvrOutput split_index(const BigCount& class_size, BigCount index, const TargetSet& target) {
  BigCount remaining = class_size;
  while (true) {
    BigCount m = target.largest_at_most(remaining);
    if (index < m) return {std::move(index), std::move(m)};
    remaining -= m;
    index -= m;
  }
}

FvrOutput e2_generate(std::span<const int> x, const ModelSpec& spec, const TargetSet& target,
                      FvrOptions opts) {
  const auto in = apply_sync(x, spec, opts);
  const BigCount size = shared_class_size_cache().size(counts_of(in.body, in.spec));
  return split_index(size, rank(in.body, in.spec), target);
}

double conditional_length(const TypeCounts& t, const TargetSet& target) {
  const BigCount size = shared_class_size_cache().size(t);
  if (size == 0) throw InputError("conditional_length of an empty class");
  return conditional_length(size, target);
}

double conditional_length(const BigCount& class_size, const TargetSet& target) {
  long double acc = 0.0L;
  const long double log_size = big_log2(class_size);
  for (const auto& m : greedy_decompose(class_size, target)) {
    // (M_i / |T|) log2 M_i, formed in the log domain to stay finite for huge classes.
    const long double lm = big_log2(m);
    if (lm > 0) acc += std::exp2(lm - log_size) * lm;
  }
  return static_cast<double>(acc);
}

double type_member_log2_probability(const MarkovParams& params, const TypeCounts& t) {
  long double lp = 0.0L;
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < t.alpha; ++a) {
      if (t.count(s, a) > 0) lp += static_cast<long double>(t.count(s, a)) * params.log2_cond(s, a);
    }
  }
  return static_cast<double>(lp);
}

BigRational type_member_probability(const RationalParams& params, const TypeCounts& t) {
  BigRational p = 1;
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    for (int a = 0; a < t.alpha; ++a) {
      const unsigned long c = t.count(s, a);
      if (c == 0) continue;
      const BigRational& q = params.cond(s, a);
      BigCount num, den;
      mpz_pow_ui(num.get_mpz_t(), q.get_num_mpz_t(), c);
      mpz_pow_ui(den.get_mpz_t(), q.get_den_mpz_t(), c);
      p *= BigRational(num, den);
    }
  }
  p.canonicalize();
  return p;
}

double expected_output_length_exact(const MarkovParams& params, std::size_t n,
                                    const TargetSet& target, FvrScheme scheme) {
  auto& cache = shared_class_size_cache();
  long double total = 0.0L;
  for (const auto& t : all_types(params.spec(), n)) {
    const BigCount size = cache.size(t);
    const long double log_size = big_log2(size);
    const long double p_type = std::exp2(log_size + type_member_log2_probability(params, t));
    const long double len = scheme == FvrScheme::E1 ? log_size : conditional_length(t, target);
    total += p_type * len;
  }
  return static_cast<double>(total);
}

std::optional<std::vector<unsigned long>> radix_digits(const BigCount& r, const BigCount& M,
                                                       unsigned long p) {
  if (p < 2 || M < 1) return std::nullopt;
  BigCount rest = M;
  std::size_t e = 0;
  while (rest > 1) {
    if (mpz_fdiv_ui(rest.get_mpz_t(), p) != 0) return std::nullopt;
    mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
    ++e;
  }
  std::vector<unsigned long> digits(e);
  BigCount v = r;
  for (auto& d : digits) d = mpz_fdiv_q_ui(v.get_mpz_t(), v.get_mpz_t(), p);
  return digits;
}

}  // namespace tcrng
