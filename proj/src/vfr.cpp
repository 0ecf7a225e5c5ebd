#include "tcrng/vfr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <type_traits>

#include "tcrng/errors.hpp"
#include "tcrng/fvr.hpp"

namespace tcrng {

namespace {

std::uint64_t pow_u64(std::uint64_t base, std::size_t e) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

template <typename Scalar, typename Params, typename MemberProbability>
void level_stats_impl(const Params& params, std::uint64_t M, std::size_t N,
                      MemberProbability member_probability, std::vector<Scalar>& p_fail,
                      std::vector<Scalar>& length) {
  if (M < 2) throw InputError("M must be at least 2");
  auto& cache = shared_class_size_cache();
  p_fail.assign(N + 1, Scalar(0));
  length.assign(N + 1, Scalar(0));
  std::vector<TypeCounts> level{empty_type(params.spec())};
  for (std::size_t n = 0; n <= N; ++n) {
    Scalar acc = 0;
    for (const auto& t : level) {
      const std::uint64_t rem = big_mod_u64(cache.size(t), M);
      if (rem != 0) acc += Scalar(static_cast<unsigned long>(rem)) * member_probability(t);
    }
    p_fail[n] = acc;
    if (n < N) {
      length[n + 1] = length[n] + acc;
      level = extend_level(level);
    }
  }
}

template <typename Scalar>
Scalar from_count(const BigCount& c) {
  if constexpr (std::is_same_v<Scalar, BigRational>) {
    return BigRational(c);
  } else {
    return c == 0 ? Scalar(0) : std::exp2(big_log2(c));
  }
}

template <typename Scalar, typename MemberProbability>
void profile_stats_impl(const DictProfile& profile, MemberProbability member_probability,
                        std::vector<Scalar>& p_fail, std::vector<Scalar>& length) {
  const std::size_t levels = profile.levels.size();
  p_fail.assign(levels, Scalar(0));
  length.assign(levels, Scalar(0));
  for (std::size_t n = 0; n < levels; ++n) {
    Scalar acc = 0;
    for (const auto& e : profile.levels[n]) {
      if (e.fail_size != 0) acc += from_count<Scalar>(e.fail_size) * member_probability(e.type);
    }
    p_fail[n] = acc;
    if (n + 1 < levels) length[n + 1] = length[n] + acc;
  }
}

long double member_probability_ld(const MarkovParams& params, const TypeCounts& t) {
  return std::exp2(static_cast<long double>(type_member_log2_probability(params, t)));
}

}  // namespace

void VfrConfig::validate() const {
  if (M < 2) throw InputError("M must be at least 2");
  if (N && *N < 1) throw InputError("truncation depth N must be at least 1");
  const auto limit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  if (M > limit / static_cast<std::uint64_t>(spec.alpha())) {
    throw InputError("M * alpha must stay below 2^63");
  }
}

VfrResult G1Dictionary::lookup(std::span<const int> x) const {
  config.spec.validate(x);
  const std::size_t N = dict.size() - 1;
  const auto alpha = static_cast<std::uint64_t>(config.spec.alpha());
  std::uint64_t code = 0;
  std::uint64_t place = 1;
  for (std::size_t n = 1; n <= N; ++n) {
    if (n > x.size()) throw InputExhausted("input ended before the dictionary decided");
    code += static_cast<std::uint64_t>(x[n - 1]) * place;
    place *= alpha;
    if (const auto it = dict[n].find(code); it != dict[n].end()) return {true, it->second, n};
  }
  return {false, 0, N};
}

G1Dictionary g1_construct(const VfrConfig& cfg, std::uint64_t bound) {
  cfg.validate();
  if (!cfg.N) throw InputError("g1_construct needs a truncation depth N");
  if (cfg.sync_state) throw InputError("g1_construct does not support sync_state");
  const std::size_t N = *cfg.N;
  const ModelSpec& spec = cfg.spec;
  const int alpha = spec.alpha();
  checked_sequence_count(alpha, N, bound);

  G1Dictionary out{cfg, {}, {}, {}};
  out.dict.resize(N + 1);
  out.fail.resize(N + 1);
  out.profile.M = cfg.M;
  out.profile.levels.resize(N + 1);
  out.fail[0] = {0};
  out.profile.levels[0].push_back({empty_type(spec), 0, 1});

  for (std::size_t n = 1; n <= N; ++n) {
    const std::uint64_t place = pow_u64(static_cast<std::uint64_t>(alpha), n - 1);
    std::map<TypeKey, std::pair<TypeCounts, std::vector<std::uint64_t>>> groups;
    for (const std::uint64_t prefix : out.fail[n - 1]) {
      for (int a = 0; a < alpha; ++a) {
        const std::uint64_t code = prefix + static_cast<std::uint64_t>(a) * place;
        TypeCounts t = counts_of(decode_sequence(code, alpha, n), spec);
        auto key = type_key(t);
        auto& slot = groups[std::move(key)];
        if (slot.second.empty()) slot.first = std::move(t);
        slot.second.push_back(code);
      }
    }
    for (auto& [key, group] : groups) {
      auto& codes = group.second;
      std::sort(codes.begin(), codes.end());
      const std::uint64_t admitted = codes.size() / cfg.M * cfg.M;
      for (std::uint64_t i = 0; i < codes.size(); ++i) {
        if (i < admitted) {
          out.dict[n].emplace(codes[i], i % cfg.M);
        } else {
          out.fail[n].push_back(codes[i]);
        }
      }
      out.profile.levels[n].push_back({group.first, big_from_u64(admitted),
                                       big_from_u64(codes.size() - admitted)});
    }
    std::sort(out.fail[n].begin(), out.fail[n].end());
  }
  return out;
}

SequentialG2::SequentialG2(VfrConfig cfg)
    : cfg_(std::move(cfg)), body_spec_(cfg_.spec), type_(empty_type(cfg_.spec)) {
  cfg_.validate();
  reset();
}

void SequentialG2::reset() {
  depth_ = 0;
  consumed_ = 0;
  decided_ = false;
  sync_buffer_.clear();
  if (cfg_.sync_state && cfg_.spec.order() > 0) {
    in_body_ = false;
  } else {
    body_spec_ = cfg_.spec;
    begin_body();
  }
}

void SequentialG2::begin_body() {
  type_ = empty_type(body_spec_);
  index_ = 0;
  depth_ = 0;
  in_body_ = true;
}

std::optional<VfrResult> SequentialG2::push(int symbol) {
  if (decided_) throw std::logic_error("SequentialG2 already decided; call reset()");
  if (symbol < 0 || symbol >= cfg_.spec.alpha()) {
    throw InputError("symbol " + std::to_string(symbol) + " outside the alphabet");
  }
  ++consumed_;
  if (!in_body_) {
    sync_buffer_.push_back(symbol);
    if (sync_buffer_.size() == static_cast<std::size_t>(cfg_.spec.order())) {
      body_spec_ = cfg_.spec.with_initial_state(sync_buffer_);
      begin_body();
    }
    return std::nullopt;
  }

  const int k = body_spec_.order();
  const auto alpha = static_cast<std::uint64_t>(body_spec_.alpha());
  // x_{n-k} is the oldest symbol of the state before this step.
  int cut_symbol = symbol;
  if (k > 0) {
    cut_symbol = static_cast<int>(type_.final_state / pow_u64(alpha, static_cast<std::size_t>(k - 1)));
  }
  type_ = extend_type(type_, symbol);
  ++depth_;

  auto& cache = shared_class_size_cache();
  std::uint64_t below = 0;
  std::uint64_t surviving = 0;
  for (int a = 0; a < body_spec_.alpha(); ++a) {
    const std::uint64_t s = big_mod_u64(cache.size(typecut(type_, a)), cfg_.M);
    if (a < cut_symbol) below += s;
    surviving += s;
  }
  const std::uint64_t position = below + index_;
  const std::uint64_t admitted = surviving / cfg_.M * cfg_.M;
  if (position < admitted) {
    decided_ = true;
    return VfrResult{true, position % cfg_.M, consumed_};
  }
  index_ = position - admitted;
  if (cfg_.N && depth_ >= *cfg_.N) {
    decided_ = true;
    return VfrResult{false, 0, consumed_};
  }
  return std::nullopt;
}

VfrResult g2_generate(std::span<const int> x, const VfrConfig& cfg) {
  SequentialG2 gen(cfg);
  for (const int sym : x) {
    if (auto r = gen.push(sym)) return *r;
  }
  throw InputExhausted("input ended after " + std::to_string(x.size()) +
                       " symbols without a decision");
}

VfrResult g2_generate(const std::function<int()>& next_symbol, const VfrConfig& cfg) {
  SequentialG2 gen(cfg);
  while (true) {
    if (auto r = gen.push(next_symbol())) return *r;
  }
}

VfrLevelStats vfr_level_stats(const MarkovParams& params, std::uint64_t M, std::size_t N) {
  VfrLevelStats out;
  level_stats_impl<long double>(
      params, M, N, [&](const TypeCounts& t) { return member_probability_ld(params, t); },
      out.p_fail, out.length);
  return out;
}

VfrLevelStatsExact vfr_level_stats(const RationalParams& params, std::uint64_t M, std::size_t N) {
  VfrLevelStatsExact out;
  level_stats_impl<BigRational>(
      params, M, N, [&](const TypeCounts& t) { return type_member_probability(params, t); },
      out.p_fail, out.length);
  for (auto& v : out.p_fail) v.canonicalize();
  for (auto& v : out.length) v.canonicalize();
  return out;
}

double expected_input_length_exact(const MarkovParams& params, std::uint64_t M, std::size_t N) {
  return static_cast<double>(vfr_level_stats(params, M, N).length[N]);
}

double failure_probability(const MarkovParams& params, std::uint64_t M, std::size_t N) {
  return static_cast<double>(vfr_level_stats(params, M, N).p_fail[N]);
}

BigRational expected_input_length_exact(const RationalParams& params, std::uint64_t M, std::size_t N) {
  return vfr_level_stats(params, M, N).length[N];
}

BigRational failure_probability(const RationalParams& params, std::uint64_t M, std::size_t N) {
  return vfr_level_stats(params, M, N).p_fail[N];
}

ProfilePolicy greedy_policy(std::uint64_t M) {
  return [M](const TypeCounts&, const BigCount& surviving) {
    BigCount j;
    mpz_fdiv_q_ui(j.get_mpz_t(), surviving.get_mpz_t(), M);
    return j;
  };
}

DictProfile build_profile(const ModelSpec& spec, std::uint64_t M, std::size_t N,
                          const ProfilePolicy& policy) {
  if (M < 2) throw InputError("M must be at least 2");
  DictProfile out;
  out.M = M;
  out.levels.resize(N + 1);

  auto admit = [&](TypeCounts t, const BigCount& surviving) {
    const BigCount dict = policy(t, surviving) * M;
    if (dict < 0 || dict > surviving) throw InputError("profile admits more sequences than survive");
    return DictProfileEntry{std::move(t), dict, surviving - dict};
  };

  out.levels[0].push_back(admit(empty_type(spec), 1));
  for (std::size_t n = 1; n <= N; ++n) {
    std::map<TypeKey, std::pair<TypeCounts, BigCount>> next;
    for (const auto& e : out.levels[n - 1]) {
      if (e.fail_size == 0) continue;
      for (int a = 0; a < spec.alpha(); ++a) {
        TypeCounts t = extend_type(e.type, a);
        auto [it, inserted] = next.try_emplace(type_key(t), t, BigCount(0));
        it->second.second += e.fail_size;
      }
    }
    for (auto& [key, slot] : next) out.levels[n].push_back(admit(std::move(slot.first), slot.second));
  }
  return out;
}

VfrLevelStatsExact profile_level_stats(const DictProfile& profile, const RationalParams& params) {
  VfrLevelStatsExact out;
  profile_stats_impl<BigRational>(
      profile, [&](const TypeCounts& t) { return type_member_probability(params, t); }, out.p_fail,
      out.length);
  for (auto& v : out.p_fail) v.canonicalize();
  for (auto& v : out.length) v.canonicalize();
  return out;
}

VfrLevelStats profile_level_stats(const DictProfile& profile, const MarkovParams& params) {
  VfrLevelStats out;
  profile_stats_impl<long double>(
      profile, [&](const TypeCounts& t) { return member_probability_ld(params, t); }, out.p_fail,
      out.length);
  return out;
}

}  // namespace tcrng
