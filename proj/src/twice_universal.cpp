#include "tcrng/twice_universal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "tcrng/errors.hpp"

namespace tcrng {

namespace {

// Sum over r, r' of |v_r - v_r'|, via the sorted form 2 sum_i (2i - m + 1) v_(i).
template <typename Scalar>
Scalar pairwise_spread(std::vector<Scalar> v) {
  std::sort(v.begin(), v.end());
  Scalar acc = 0;
  const auto m = static_cast<long>(v.size());
  for (long i = 0; i < m; ++i) acc += Scalar(2 * i - m + 1) * v[static_cast<std::size_t>(i)];
  return Scalar(2) * acc;
}

template <typename Scalar, typename ProbabilityOf>
Scalar distance_impl(const FvrMap& scheme, int alpha, std::size_t n, std::uint64_t bound,
                     ProbabilityOf probability_of) {
  const std::uint64_t total = checked_sequence_count(alpha, n, bound);
  std::map<std::uint64_t, std::vector<Scalar>> joint;  // M -> Q(r, M)
  for (std::uint64_t code = 0; code < total; ++code) {
    const auto x = decode_sequence(code, alpha, n);
    const FvrOutput out = scheme(x);
    const auto m = big_to_u64(out.M);
    auto& row = joint[m];
    if (row.empty()) row.assign(m, Scalar(0));
    row[big_to_u64(out.r)] += probability_of(x);
  }
  Scalar d = 0;
  for (auto& [m, row] : joint) d += pairwise_spread(std::move(row)) / Scalar(static_cast<unsigned long>(m));
  return d;
}

}  // namespace

Penalty Penalty::parse(std::string_view text) {
  if (text == "mdl") return mdl();
  if (text.starts_with("c:")) {
    const std::string v(text.substr(2));
    char* end = nullptr;
    const double beta = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !(beta >= 0.0)) {
      throw ConfigError("bad penalty '" + std::string(text) + "'");
    }
    return scaled(beta);
  }
  throw ConfigError("unknown penalty '" + std::string(text) + "' (mdl|c:<beta>)");
}

double Penalty::value(int alpha, std::size_t n) const {
  if (n == 0) return 0.0;
  const double nn = static_cast<double>(n);
  if (kind_ == Kind::Mdl) return (alpha - 1) * std::log2(nn) / (2.0 * nn);
  return beta_ * std::log2(nn) / nn;
}

std::string Penalty::describe() const {
  if (kind_ == Kind::Mdl) return "mdl";
  return "c:" + std::to_string(beta_);
}

double empirical_cond_entropy(std::span<const int> x, int alpha, int k) {
  if (x.empty()) return 0.0;
  const ModelSpec spec(alpha, k);
  spec.validate(x);
  const auto a = static_cast<std::size_t>(alpha);
  std::unordered_map<std::size_t, std::uint64_t> pair_counts;
  std::unordered_map<std::size_t, std::uint64_t> state_counts;
  std::size_t s = 0;
  for (int sym : x) {
    ++pair_counts[s * a + static_cast<std::size_t>(sym)];
    ++state_counts[s];
    s = spec.next_state(s, sym);
  }
  // n H_k = sum_s n_s log n_s - sum_{s,a} n_{s,a} log n_{s,a}
  long double acc = 0.0L;
  for (const auto& [key, c] : state_counts) acc += c * std::log2(static_cast<long double>(c));
  for (const auto& [key, c] : pair_counts) acc -= c * std::log2(static_cast<long double>(c));
  const double h = static_cast<double>(acc / static_cast<long double>(x.size()));
  return h < 0.0 ? 0.0 : h;
}

int default_max_order(int alpha, std::size_t n) {
  if (n == 0) return 0;
  int floor_log = 0;
  std::size_t p = static_cast<std::size_t>(alpha);
  while (p <= n) {
    ++floor_log;
    p *= static_cast<std::size_t>(alpha);
  }
  return std::max(0, floor_log - 1);
}

OrderEstimate estimate_order(std::span<const int> x, int alpha, const Penalty& phi, int k_max) {
  if (k_max < 0) throw InputError("k_max must be nonnegative");
  OrderEstimate est;
  const double penalty = phi.value(alpha, x.size());
  double best = 0.0;
  double states = 1.0;
  for (int k = 0; k <= k_max; ++k) {
    const double score = empirical_cond_entropy(x, alpha, k) + states * penalty;
    est.scores.emplace_back(k, score);
    if (k == 0 || score < best) {
      best = score;
      est.k_hat = k;
    }
    states *= alpha;
  }
  return est;
}

std::vector<SymbolSequence> u_class(std::span<const int> x, int alpha, const Penalty& phi, int k_max,
                                    std::uint64_t bound) {
  const std::uint64_t total = checked_sequence_count(alpha, x.size(), bound);
  const int k_hat = estimate_order(x, alpha, phi, k_max).k_hat;
  const ModelSpec spec(alpha, k_hat);
  const TypeCounts target = counts_of(x, spec);
  std::vector<SymbolSequence> out;
  for (std::uint64_t code = 0; code < total; ++code) {
    auto y = decode_sequence(code, alpha, x.size());
    if (counts_of(y, spec) == target && estimate_order(y, alpha, phi, k_max).k_hat == k_hat) {
      out.push_back(std::move(y));
    }
  }
  return out;
}

FvrOutput tu_generate_exact(std::span<const int> x, int alpha, const TargetSet& target,
                            const Penalty& phi, int k_max) {
  const auto members = u_class(x, alpha, phi, k_max);
  const auto it = std::find_if(members.begin(), members.end(), [&](const SymbolSequence& y) {
    return std::equal(y.begin(), y.end(), x.begin(), x.end());
  });
  const auto index = static_cast<unsigned long>(it - members.begin());
  return split_index(BigCount(static_cast<unsigned long>(members.size())), BigCount(index), target);
}

PracticalFvrOutput tu_generate_practical(std::span<const int> x, int alpha, const TargetSet& target,
                                         const Penalty& phi, int k_max) {
  const int k_hat = estimate_order(x, alpha, phi, k_max).k_hat;
  return {e2_generate(x, ModelSpec(alpha, k_hat), target), k_hat};
}

UClassPartition::UClassPartition(int alpha, std::size_t n, const Penalty& phi, int k_max,
                                 std::uint64_t bound)
    : alpha_(alpha), n_(n) {
  const std::uint64_t total = checked_sequence_count(alpha, n, bound);
  k_hat_.resize(total);
  class_of_.resize(total);
  index_.resize(total);
  std::map<std::pair<int, TypeKey>, std::size_t> ids;
  std::vector<ModelSpec> specs;
  for (int k = 0; k <= k_max; ++k) specs.emplace_back(alpha, k);
  for (std::uint64_t code = 0; code < total; ++code) {
    const auto x = decode_sequence(code, alpha, n);
    const int k_hat = estimate_order(x, alpha, phi, k_max).k_hat;
    auto key = std::make_pair(k_hat, type_key(counts_of(x, specs[static_cast<std::size_t>(k_hat)])));
    auto [it, inserted] = ids.try_emplace(std::move(key), sizes_.size());
    if (inserted) sizes_.push_back(0);
    k_hat_[code] = k_hat;
    class_of_[code] = it->second;
    index_[code] = sizes_[it->second]++;
  }
}

FvrOutput UClassPartition::generate(std::uint64_t code, const TargetSet& target) const {
  return split_index(BigCount(static_cast<unsigned long>(sizes_[class_of_[code]])),
                     BigCount(static_cast<unsigned long>(index_[code])), target);
}

double distance_to_uniformity(const FvrMap& scheme, const MarkovParams& params, std::size_t n,
                              std::uint64_t bound) {
  return static_cast<double>(distance_impl<long double>(
      scheme, params.spec().alpha(), n, bound, [&](std::span<const int> x) {
        return std::exp2(static_cast<long double>(sequence_log2_probability(params, x)));
      }));
}

BigRational distance_to_uniformity(const FvrMap& scheme, const RationalParams& params, std::size_t n,
                                   std::uint64_t bound) {
  BigRational d = distance_impl<BigRational>(scheme, params.spec().alpha(), n, bound,
                                             [&](std::span<const int> x) {
                                               return sequence_probability(params, x);
                                             });
  d.canonicalize();
  return d;
}

OrderErrorProbabilities order_error_probabilities(const RationalParams& params, std::size_t n,
                                                  const Penalty& phi, int k_max, std::uint64_t bound) {
  const int alpha = params.spec().alpha();
  const int k = params.spec().order();
  const std::uint64_t total = checked_sequence_count(alpha, n, bound);
  OrderErrorProbabilities out{0, 0};
  for (std::uint64_t code = 0; code < total; ++code) {
    const auto x = decode_sequence(code, alpha, n);
    const int k_hat = estimate_order(x, alpha, phi, k_max).k_hat;
    if (k_hat < k) out.under += sequence_probability(params, x);
    if (k_hat > k) out.over += sequence_probability(params, x);
  }
  out.under.canonicalize();
  out.over.canonicalize();
  return out;
}

}  // namespace tcrng
