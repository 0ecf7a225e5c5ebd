#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "tcrng/errors.hpp"
#include "tcrng/harness.hpp"
#include "tcrng/vfr.hpp"
#include "test_util.hpp"

using namespace tcrng;
using tcrng::testing::all_sequences;
using tcrng::testing::seq;
using tcrng::testing::str;

namespace {

std::set<std::string> words(const std::vector<std::uint64_t>& codes, std::size_t n) {
  std::set<std::string> out;
  for (auto c : codes) out.insert(str(decode_sequence(c, 2, n)));
  return out;
}

std::set<std::string> dict_words(const G1Dictionary& d, std::size_t n) {
  std::set<std::string> out;
  for (const auto& [c, label] : d.dict[n]) out.insert(str(decode_sequence(c, 2, n)));
  return out;
}

RationalParams bernoulli(const BigRational& p_one) {
  return RationalParams(ModelSpec(2, 0), {{1 - p_one, p_one}});
}

}  // namespace

TEST_CASE("greedy construction, M = 3") {
  const ModelSpec spec(2, 0);
  const auto d3 = g1_construct(VfrConfig{spec, 3, 3, false});
  CHECK(dict_words(d3, 1).empty());
  CHECK(dict_words(d3, 2).empty());
  CHECK(dict_words(d3, 3) == std::set<std::string>{"001", "010", "100", "011", "101", "110"});
  CHECK(words(d3.fail[3], 3) == std::set<std::string>{"000", "111"});

  const auto d6 = g1_construct(VfrConfig{spec, 3, 6, false});
  CHECK(words(d6.fail[6], 6) == std::set<std::string>{"000000", "000111", "111000", "111111"});
  // T(000111) has 20 members. Only 000111 and 111000 survive to depth 6, so no
  // entry of this type is admitted there; the other 18 end at a shorter leaf.
  const auto t = counts_of(seq("000111"), spec);
  CHECK(class_size(t) == 20);
  bool found = false;
  for (const auto& e : d6.profile.levels[6]) {
    if (e.type == t) {
      found = true;
      CHECK(e.dict_size == 0);
      CHECK(e.fail_size == 2);
    }
  }
  CHECK(found);
  int reaching_leaf = 0;
  for (const auto& y : brute_force_class(seq("000111"), spec)) reaching_leaf += d6.lookup(y).stopped;
  CHECK(reaching_leaf == 18);
}

TEST_CASE("greedy construction, M = 2 gives von Neumann pairs") {
  const auto d = g1_construct(VfrConfig{ModelSpec(2, 0), 2, 2, false});
  CHECK(dict_words(d, 2) == std::set<std::string>{"01", "10"});
  // Reverse-lexicographic: 10 precedes 01.
  CHECK(d.lookup(seq("10")) == VfrResult{true, 0, 2});
  CHECK(d.lookup(seq("01")) == VfrResult{true, 1, 2});
  CHECK(d.lookup(seq("11")) == VfrResult{false, 0, 2});
  CHECK_THROWS_AS(g1_construct(VfrConfig{ModelSpec(2, 0), 2, 30, false}, 1 << 20), ResourceError);
  CHECK_THROWS_AS(g1_construct(VfrConfig{ModelSpec(2, 0), 2, std::nullopt, false}), InputError);
}

TEST_CASE("sequential generator") {
  const ModelSpec spec(2, 0);
  const VfrConfig cfg{spec, 3, std::nullopt, false};
  const auto d = g1_construct(VfrConfig{spec, 3, 6, false});

  const auto r010 = g2_generate(seq("010111"), cfg);
  CHECK(r010.stopped);
  CHECK(r010.length == 3);
  CHECK(r010.r == d.dict[3].at(sequence_code(seq("010"), 2)));

  SequentialG2 gen(cfg);
  for (int a : seq("00011")) CHECK_FALSE(gen.push(a).has_value());
  CHECK_FALSE(gen.push(1).has_value());  // 000111 survives level 6
  CHECK(gen.consumed() == 6);

  // T(000110) has survivors 000110 < 000101 < 000011, all three admitted.
  const auto r110 = g2_generate(seq("000110"), cfg);
  CHECK(r110.stopped);
  CHECK(r110.length == 6);
  CHECK(r110.r == 0);
  CHECK(g2_generate(seq("000011"), cfg).r == 2);
  CHECK(g2_generate(seq("000101"), cfg).r == 1);

  CHECK_THROWS_AS(g2_generate(seq("000"), cfg), InputExhausted);
  CHECK(g2_generate(seq("000111"), VfrConfig{spec, 3, 6, false}) == VfrResult{false, 0, 6});
  CHECK_THROWS_AS(g2_generate(seq("012"), cfg), InputError);

  SequentialG2 done(VfrConfig{spec, 2, std::nullopt, false});
  done.push(0);
  REQUIRE(done.push(1).has_value());
  CHECK_THROWS_AS(done.push(0), std::logic_error);
  done.reset();
  CHECK_FALSE(done.decided());
}

TEST_CASE("configuration checks") {
  CHECK_THROWS_AS((VfrConfig{ModelSpec(2, 0), 1, std::nullopt, false}.validate()), InputError);
  CHECK_THROWS_AS((VfrConfig{ModelSpec(2, 0), 2, 0, false}.validate()), InputError);
  CHECK_THROWS_AS((VfrConfig{ModelSpec(4, 0), std::uint64_t{1} << 62, std::nullopt, false}.validate()),
                  InputError);
  CHECK_NOTHROW((VfrConfig{ModelSpec(2, 0), std::uint64_t{1} << 32, std::nullopt, false}.validate()));
}

TEST_CASE("state-synchronizing mode") {
  const ModelSpec spec(2, 1);
  const VfrConfig synced{spec, 3, std::nullopt, true};
  const VfrConfig from_one{ModelSpec(2, 1, {1}), 3, std::nullopt, false};
  for (const auto& body : all_sequences(2, 10)) {
    SymbolSequence x{1};
    x.insert(x.end(), body.begin(), body.end());
    VfrResult a, b;
    bool a_ok = true, b_ok = true;
    try {
      a = g2_generate(x, synced);
    } catch (const InputExhausted&) {
      a_ok = false;
    }
    try {
      b = g2_generate(body, from_one);
    } catch (const InputExhausted&) {
      b_ok = false;
    }
    REQUIRE(a_ok == b_ok);
    if (a_ok) {
      CHECK(a.r == b.r);
      CHECK(a.length == b.length + 1);
    }
  }
}

TEST_CASE("G2 agrees with G1 and both are exactly uniform") {
  for (int k = 0; k <= 1; ++k) {
    const ModelSpec spec(2, k);
    for (const std::uint64_t M : {2ULL, 3ULL, 5ULL, 7ULL}) {
      const std::size_t N = 10;
      const VfrConfig cfg{spec, M, N, false};
      const auto d = g1_construct(cfg);

      for (std::size_t n = 0; n <= N; ++n) {
        for (const auto& e : d.profile.levels[n]) {
          CHECK(e.fail_size == big_mod_u64(class_size(e.type), M));
          CHECK(e.dict_size % M == 0);
        }
      }
      // Labels inside each dictionary type hit every r equally often.
      for (std::size_t n = 1; n <= N; ++n) {
        std::map<TypeKey, std::vector<int>> labels;
        for (const auto& [code, r] : d.dict[n]) {
          auto& cells = labels[type_key(counts_of(decode_sequence(code, 2, n), spec))];
          cells.resize(M);
          ++cells[r];
        }
        for (const auto& [key, cells] : labels) {
          for (int c : cells) CHECK(c == cells[0]);
        }
      }
      for (const auto& x : all_sequences(2, N)) CHECK(g2_generate(x, cfg) == d.lookup(x));
    }
  }
}

TEST_CASE("profile recursion rebuilds the greedy dictionary") {
  for (int k = 0; k <= 1; ++k) {
    const ModelSpec spec(2, k);
    for (const std::uint64_t M : {2ULL, 3ULL, 5ULL}) {
      const std::size_t N = 9;
      const auto d = g1_construct(VfrConfig{spec, M, N, false});
      const auto p = build_profile(spec, M, N, greedy_policy(M));
      for (std::size_t n = 0; n <= N; ++n) {
        REQUIRE(p.levels[n].size() == d.profile.levels[n].size());
        for (std::size_t i = 0; i < p.levels[n].size(); ++i) {
          CHECK(p.levels[n][i].type == d.profile.levels[n][i].type);
          CHECK(p.levels[n][i].dict_size == d.profile.levels[n][i].dict_size);
          CHECK(p.levels[n][i].fail_size == d.profile.levels[n][i].fail_size);
        }
      }
      // Each level's failures come from the previous level's failures, less the dictionary.
      for (std::size_t n = 1; n <= N; ++n) {
        for (const auto& e : p.levels[n]) {
          BigCount from_prefixes = 0;
          for (int a = 0; a < 2; ++a) {
            const auto cut = typecut(e.type, a);
            if (!cut) continue;
            for (const auto& prev : p.levels[n - 1]) {
              if (prev.type == *cut) from_prefixes += prev.fail_size;
            }
          }
          CHECK(e.fail_size == from_prefixes - e.dict_size);
        }
      }
    }
  }
  CHECK_THROWS_AS(build_profile(ModelSpec(2, 0), 3, 4,
                                [](const TypeCounts&, const BigCount&) { return BigCount(5); }),
                  InputError);
}

TEST_CASE("failure probabilities and expected length") {
  const auto src = bernoulli(BigRational(3, 10));
  const BigRational cube = BigRational(27, 1000) + BigRational(343, 1000);
  CHECK(failure_probability(src, 3, 3) == cube);
  CHECK(failure_probability(src, 3, 6) == cube * cube);
  CHECK(failure_probability(src, 2, 1) == 1);
  CHECK(expected_input_length_exact(src, 3, 1) == 1);
  CHECK(expected_input_length_exact(src.to_double(), 3, 1) == 1.0);

  const auto law = vfr_level_stats(src.to_double(), 3, 300);
  CHECK(law.length[300] >= 1 / 0.21 - 1.0 / 7);
  CHECK(law.length[300] <= 1 / 0.21);
  CHECK(law.p_fail[300] < 1e-6);
  for (std::size_t n = 1; n <= 300; ++n) CHECK(law.p_fail[n] <= law.p_fail[n - 1] * (1 + 1e-12));

  // Exact rationals agree with the extended-precision sum.
  const auto exact = vfr_level_stats(src, 3, 40);
  for (std::size_t n = 1; n <= 40; ++n) CHECK(exact.p_fail[n] <= exact.p_fail[n - 1]);
  for (std::size_t n = 0; n <= 40; ++n) {
    CHECK(static_cast<double>(law.p_fail[n]) == doctest::Approx(exact.p_fail[n].get_d()).epsilon(1e-12));
  }

  // Failure sets enumerated directly.
  const auto d = g1_construct(VfrConfig{ModelSpec(2, 0), 3, 8, false});
  for (std::size_t n = 0; n <= 8; ++n) {
    BigRational direct = 0;
    for (auto c : d.fail[n]) direct += sequence_probability(src, decode_sequence(c, 2, n));
    CHECK(direct == exact.p_fail[n]);
  }
}

TEST_CASE("expected length agrees with simulation") {
  const auto params = MarkovParams::iid({0.7, 0.3});
  const VfrConfig cfg{params.spec(), 3, std::nullopt, false};
  const int runs = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < runs; ++i) {
    Sampler src(params, 500 + i);
    const double len = static_cast<double>(g2_generate([&] { return src.next(); }, cfg).length);
    sum += len;
    sq += len * len;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sq / runs - mean * mean) / runs);
  CHECK(std::abs(mean - expected_input_length_exact(params, 3, 300)) <= 3 * se);
}

TEST_CASE("failure decays log-linearly") {
  const auto law = vfr_level_stats(MarkovParams::iid({0.7, 0.3}), 3, 100);
  std::vector<double> xs, ys;
  for (std::size_t n = 10; n <= 100; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log2(static_cast<double>(law.p_fail[n])));
  }
  const auto fit = fit_line(xs, ys);
  CHECK(fit.slope < 0);
  CHECK(fit.r_squared >= 0.98);
}

TEST_CASE("deferring an admissible type lengthens the dictionary") {
  const ModelSpec spec(2, 0);
  const std::uint64_t M = 3;
  const auto deferred_type = counts_of(seq("001"), spec);
  const ProfilePolicy greedy = greedy_policy(M);
  const ProfilePolicy deferring = [&](const TypeCounts& t, const BigCount& surviving) {
    if (t == deferred_type) return BigCount(0);
    return greedy(t, surviving);
  };
  const auto src = bernoulli(BigRational(3, 10));
  for (std::size_t N : {4, 6, 10}) {
    const auto base = profile_level_stats(build_profile(spec, M, N, greedy), src);
    const auto other = profile_level_stats(build_profile(spec, M, N, deferring), src);
    CHECK(other.length[N] > base.length[N]);
    CHECK(base.length[N] == expected_input_length_exact(src, M, N));
  }
}
