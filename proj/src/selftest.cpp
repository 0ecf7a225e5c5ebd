#include <cmath>
#include <map>
#include <sstream>

#include "tcrng/errors.hpp"
#include "tcrng/harness.hpp"

namespace tcrng {

namespace {

struct Shape {
  int alpha;
  int k;
  std::size_t max_n;
};

CheckResult check_class_sizes(const SizeFn& size) {
  CheckResult res{"type_classes/class_size", true, ""};
  std::uint64_t compared = 0;
  for (const Shape sh : {Shape{2, 0, 8}, Shape{2, 1, 8}, Shape{2, 2, 8}, Shape{3, 0, 5}, Shape{3, 1, 5}}) {
    const ModelSpec spec(sh.alpha, sh.k);
    for (std::size_t n = 0; n <= sh.max_n; ++n) {
      std::map<TypeKey, std::pair<TypeCounts, std::uint64_t>> tally;
      const std::uint64_t total = checked_sequence_count(sh.alpha, n, brute_force_bound());
      for (std::uint64_t code = 0; code < total; ++code) {
        auto t = counts_of(decode_sequence(code, sh.alpha, n), spec);
        auto [it, inserted] = tally.try_emplace(type_key(t), t, 0);
        ++it->second.second;
      }
      for (const auto& [key, entry] : tally) {
        ++compared;
        if (size(entry.first) != entry.second) {
          std::ostringstream msg;
          msg << "alpha=" << sh.alpha << " k=" << sh.k << " n=" << n << " type "
              << type_to_json(entry.first) << ": formula " << big_to_string(size(entry.first))
              << ", enumerated " << entry.second;
          return {res.name, false, msg.str()};
        }
      }
    }
  }
  res.detail = std::to_string(compared) + " types";
  return res;
}

CheckResult check_rank_unrank() {
  CheckResult res{"type_classes/rank_unrank", true, ""};
  std::uint64_t checked = 0;
  for (const Shape sh : {Shape{2, 0, 8}, Shape{2, 1, 8}, Shape{2, 2, 8}, Shape{3, 1, 5}, Shape{3, 2, 5}}) {
    const ModelSpec spec(sh.alpha, sh.k);
    const std::size_t n = sh.max_n;
    const std::uint64_t total = checked_sequence_count(sh.alpha, n, brute_force_bound());
    // Codes run in reverse-lexicographic order, so the running count per type is the rank.
    std::map<TypeKey, std::uint64_t> seen;
    for (std::uint64_t code = 0; code < total; ++code) {
      const auto x = decode_sequence(code, sh.alpha, n);
      const auto t = counts_of(x, spec);
      const std::uint64_t expected = seen[type_key(t)]++;
      const BigCount r = rank(x, spec);
      if (r != expected || unrank(t, r) != x) {
        return {res.name, false,
                "alpha=" + std::to_string(sh.alpha) + " k=" + std::to_string(sh.k) + " code " +
                    std::to_string(code) + ": rank " + big_to_string(r) + ", expected " +
                    std::to_string(expected)};
      }
      ++checked;
    }
  }
  res.detail = std::to_string(checked) + " sequences";
  return res;
}

CheckResult check_fvr_uniformity() {
  CheckResult res{"fvr/exact_uniformity", true, ""};
  std::uint64_t groups = 0;
  for (int k = 0; k <= 1; ++k) {
    const ModelSpec spec(2, k);
    for (std::size_t n = 1; n <= 8; ++n) {
      std::vector<std::pair<std::string, FvrMap>> schemes;
      schemes.emplace_back("E1", [spec](std::span<const int> x) { return e1_generate(x, spec); });
      for (const char* t : {"int", "pow2", "pow:3"}) {
        const TargetSet target = TargetSet::parse(t);
        schemes.emplace_back(std::string("E2/") + t, [spec, target](std::span<const int> x) {
          return e2_generate(x, spec, target);
        });
      }
      for (const auto& [name, scheme] : schemes) {
        const auto rep = exact_fvr_uniformity(scheme, 2, n, type_group(spec));
        groups += rep.groups;
        if (!rep.pass) {
          return {res.name, false,
                  name + " k=" + std::to_string(k) + " n=" + std::to_string(n) + ": " +
                      std::to_string(rep.discrepancies) + " unbalanced (type, M) cells"};
        }
      }
    }
  }
  res.detail = std::to_string(groups) + " type groups";
  return res;
}

CheckResult check_gap_bound() {
  CheckResult res{"fvr/gap_bound", true, ""};
  std::uint64_t checked = 0;
  for (const unsigned long p : {2UL, 3UL}) {
    const TargetSet target = TargetSet::powers_of(p);
    const double inv = 1.0 / static_cast<double>(p);
    const double bound = p * (-inv * std::log2(inv) - (1 - inv) * std::log2(1 - inv));
    for (int k = 0; k <= 1; ++k) {
      for (std::size_t n = 1; n <= 8; ++n) {
        for (const auto& t : all_types(ModelSpec(2, k), n)) {
          const BigCount size = class_size(t);
          const auto parts = greedy_decompose(size, target);
          BigCount sum = 0;
          for (const auto& m : parts) sum += m;
          const double gap = static_cast<double>(big_log2(size)) - conditional_length(size, target);
          if (sum != size || gap < -1e-12 || gap > bound + 1e-12) {
            return {res.name, false, "type " + type_to_json(t) + ": gap " + format_number(gap)};
          }
          ++checked;
        }
      }
    }
  }
  res.detail = std::to_string(checked) + " types";
  return res;
}

CheckResult check_vfr_equivalence() {
  CheckResult res{"vfr/g1_g2_fail_sizes", true, ""};
  std::uint64_t inputs = 0;
  for (int k = 0; k <= 1; ++k) {
    const ModelSpec spec(2, k);
    for (const std::uint64_t M : {2ULL, 3ULL, 5ULL}) {
      const std::size_t N = 10;
      const VfrConfig cfg{spec, M, N, false};
      const auto g1 = g1_construct(cfg);
      const std::string where = "k=" + std::to_string(k) + " M=" + std::to_string(M);
      // Failure sizes equal |T| mod M at every level.
      for (std::size_t n = 0; n <= N; ++n) {
        for (const auto& e : g1.profile.levels[n]) {
          if (e.fail_size != big_mod_u64(class_size(e.type), M) || e.dict_size % M != 0) {
            return {res.name, false, where + " n=" + std::to_string(n) + ": |fail| != |T| mod M"};
          }
        }
      }
      // The typecut recursion rebuilds the same profile.
      const auto rebuilt = build_profile(spec, M, N, greedy_policy(M));
      for (std::size_t n = 0; n <= N; ++n) {
        const auto& a = g1.profile.levels[n];
        const auto& b = rebuilt.levels[n];
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
          same = a[i].type == b[i].type && a[i].dict_size == b[i].dict_size && a[i].fail_size == b[i].fail_size;
        }
        if (!same) return {res.name, false, where + " n=" + std::to_string(n) + ": recursion profile differs"};
      }
      const std::uint64_t total = std::uint64_t{1} << N;
      for (std::uint64_t code = 0; code < total; ++code) {
        const auto x = decode_sequence(code, 2, N);
        if (g2_generate(x, cfg) != g1.lookup(x)) {
          return {res.name, false, where + ": G2 and G1 disagree on code " + std::to_string(code)};
        }
        ++inputs;
      }
      const auto rep = exact_vfr_uniformity([&](std::span<const int> x) { return g2_generate(x, cfg); },
                                            spec, M, N);
      if (!rep.pass) return {res.name, false, where + ": unbalanced labels"};
    }
  }
  res.detail = std::to_string(inputs) + " inputs";
  return res;
}

CheckResult check_example_sets() {
  CheckResult res{"vfr/greedy_m3", true, ""};
  const ModelSpec spec(2, 0);
  const auto g1 = g1_construct(VfrConfig{spec, 3, 6, false});
  auto codes_of = [](std::initializer_list<const char*> words) {
    std::vector<std::uint64_t> out;
    for (const char* w : words) {
      SymbolSequence x;
      for (const char* c = w; *c; ++c) x.push_back(*c - '0');
      out.push_back(sequence_code(x, 2));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  if (g1.fail[3] != codes_of({"000", "111"})) return {res.name, false, "fail_3 mismatch"};
  if (g1.fail[6] != codes_of({"000000", "000111", "111000", "111111"})) {
    return {res.name, false, "fail_6 mismatch"};
  }
  const RationalParams src(spec, {{BigRational(7, 10), BigRational(3, 10)}});
  const BigRational cube = BigRational(27, 1000) + BigRational(343, 1000);
  const auto law = vfr_level_stats(src, 3, 6);
  if (law.p_fail[3] != cube || law.p_fail[6] != cube * cube) {
    return {res.name, false, "exact failure probabilities differ from the fail sets"};
  }
  return res;
}

CheckResult check_twice_universal() {
  CheckResult res{"twice_universal/distance_bound", true, ""};
  const ModelSpec spec(2, 1);
  const RationalParams src(spec, {{BigRational(7, 10), BigRational(3, 10)},
                                  {BigRational(2, 5), BigRational(3, 5)}});
  const Penalty phi = Penalty::mdl();
  const TargetSet target = TargetSet::all_positive();
  for (std::size_t n = 4; n <= 8; ++n) {
    const int k_max = default_max_order(2, n);
    const UClassPartition part(2, n, phi, k_max);
    const FvrMap tu = [&](std::span<const int> x) { return part.generate(sequence_code(x, 2), target); };
    const FvrMap practical = [&](std::span<const int> x) {
      return tu_generate_practical(x, 2, target, phi, k_max).output;
    };
    const auto err = order_error_probabilities(src, n, phi, k_max);
    const BigRational d_tu = distance_to_uniformity(tu, src, n);
    const BigRational d_pr = distance_to_uniformity(practical, src, n);
    if (d_tu > 2 * err.under || d_pr > 4 * (err.under + err.over)) {
      return {res.name, false, "n=" + std::to_string(n) + ": distance exceeds the bound"};
    }
  }
  return res;
}

CheckResult check_stationary() {
  CheckResult res{"markov_model/stationary", true, ""};
  const MarkovParams params(ModelSpec(2, 2), {{0.7, 0.3}, {0.4, 0.6}, {0.2, 0.8}, {0.55, 0.45}});
  const auto pi = stationary_distribution(params);
  double total = 0.0;
  std::vector<double> flow(pi.size(), 0.0);
  for (std::size_t s = 0; s < pi.size(); ++s) {
    total += pi[s];
    for (int a = 0; a < 2; ++a) flow[params.spec().next_state(s, a)] += pi[s] * params.cond(s, a);
  }
  for (std::size_t s = 0; s < pi.size(); ++s) {
    if (std::abs(flow[s] - pi[s]) > 1e-12) return {res.name, false, "balance equations violated"};
  }
  if (std::abs(total - 1.0) > 1e-12) return {res.name, false, "stationary law does not sum to 1"};
  return res;
}

template <typename Fn>
CheckResult guarded(const std::string& name, Fn fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

BigCount corrupted_class_size(const TypeCounts& t) {
  // The factorial quotient is positive, so flipping the cofactor flips |T|.
  return -class_size(t);
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opts) {
  const SizeFn size = opts.size ? opts.size : SizeFn([](const TypeCounts& t) { return class_size(t); });
  std::vector<CheckResult> out;
  out.push_back(guarded("markov_model/stationary", check_stationary));
  out.push_back(guarded("type_classes/class_size", [&] { return check_class_sizes(size); }));
  out.push_back(guarded("type_classes/rank_unrank", check_rank_unrank));
  out.push_back(guarded("fvr/exact_uniformity", check_fvr_uniformity));
  out.push_back(guarded("fvr/gap_bound", check_gap_bound));
  out.push_back(guarded("vfr/g1_g2_fail_sizes", check_vfr_equivalence));
  out.push_back(guarded("vfr/greedy_m3", check_example_sets));
  out.push_back(guarded("twice_universal/distance_bound", check_twice_universal));
  return out;
}

}  // namespace tcrng
