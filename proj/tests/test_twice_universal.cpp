#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tcrng/errors.hpp"
#include "tcrng/twice_universal.hpp"
#include "test_util.hpp"

using namespace tcrng;
using tcrng::testing::all_sequences;
using tcrng::testing::h2;
using tcrng::testing::seq;

namespace {

SymbolSequence alternating(std::size_t pairs) {
  SymbolSequence x;
  for (std::size_t i = 0; i < pairs; ++i) {
    x.push_back(0);
    x.push_back(1);
  }
  return x;
}

RationalParams markov_source() {
  return RationalParams(ModelSpec(2, 1), {{BigRational(7, 10), BigRational(3, 10)},
                                          {BigRational(2, 5), BigRational(3, 5)}});
}

}  // namespace

TEST_CASE("empirical conditional entropy") {
  const auto x = alternating(8);
  CHECK(empirical_cond_entropy(x, 2, 0) == doctest::Approx(1.0));
  // With a zero past: from state 0 one 0 and eight 1s, from state 1 seven 0s.
  CHECK(empirical_cond_entropy(x, 2, 1) == doctest::Approx(9.0 / 16.0 * h2(1.0 / 9.0)));
  CHECK(empirical_cond_entropy(x, 2, 2) == doctest::Approx(1.0 / 16.0 * 2.0 * h2(0.5)));
  for (int k = 0; k <= 4; ++k) CHECK(empirical_cond_entropy(SymbolSequence(20, 1), 2, k) == 0.0);
  CHECK(empirical_cond_entropy(seq("021"), 3, 0) == doctest::Approx(std::log2(3.0)));
}

TEST_CASE("order estimation") {
  CHECK(estimate_order(seq("1"), 2, Penalty::mdl(), 3).k_hat == 0);
  const auto est = estimate_order(alternating(8), 2, Penalty::mdl(), 3);
  CHECK(est.k_hat == 1);
  REQUIRE(est.scores.size() == 4);
  CHECK(est.scores[0].second == doctest::Approx(1.0 + 0.125));
  CHECK(est.scores[1].second == doctest::Approx(9.0 / 16.0 * h2(1.0 / 9.0) + 0.25));

  CHECK(default_max_order(2, 1) == 0);
  CHECK(default_max_order(2, 16) == 3);
  CHECK(default_max_order(2, 15) == 2);
  CHECK(default_max_order(3, 100) == 3);

  CHECK(Penalty::mdl().value(2, 16) == doctest::Approx(4.0 / 32.0));
  CHECK(Penalty::parse("c:2").value(2, 16) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Penalty::parse("c:"), ConfigError);
  CHECK_THROWS_AS(Penalty::parse("bic"), ConfigError);
  CHECK_THROWS_AS(estimate_order(seq("01"), 2, Penalty::mdl(), -1), InputError);
}

TEST_CASE("order estimate of a pinned memoryless sample") {
  const auto x = sample(MarkovParams::iid({0.7, 0.3}), 4096, 20240601);
  const auto est = estimate_order(x, 2, Penalty::mdl(), default_max_order(2, x.size()));
  CHECK(est.k_hat == 0);
}

TEST_CASE("a larger penalty never raises the estimated order") {
  std::mt19937_64 rng(9);
  const MarkovParams src(ModelSpec(2, 2), {{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}, {0.3, 0.7}});
  for (int trial = 0; trial < 40; ++trial) {
    const auto x = sample(src, 64 + rng() % 400, rng());
    int last = 1000;
    for (double beta : {0.0, 0.1, 0.3, 0.5, 1.0, 2.0, 4.0}) {
      const int k = estimate_order(x, 2, Penalty::scaled(beta), 5).k_hat;
      CHECK(k <= last);
      last = k;
    }
  }
}

TEST_CASE("U-classes") {
  const Penalty phi = Penalty::mdl();
  CHECK(u_class(SymbolSequence(10, 0), 2, phi, 2) == std::vector<SymbolSequence>{SymbolSequence(10, 0)});

  const std::size_t n = 10;
  const int k_max = default_max_order(2, n);
  const UClassPartition part(2, n, phi, k_max);
  CHECK(part.sequences() == 1024);
  std::uint64_t covered = 0;
  for (std::size_t c = 0; c < part.num_classes(); ++c) covered += part.class_size(c);
  CHECK(covered == 1024);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 12; ++trial) {
    const auto x = decode_sequence(rng() % 1024, 2, n);
    const auto members = u_class(x, 2, phi, k_max);
    const int k_hat = estimate_order(x, 2, phi, k_max).k_hat;
    const auto type_members = brute_force_class(x, ModelSpec(2, k_hat));
    std::set<SymbolSequence> type_set(type_members.begin(), type_members.end());
    CHECK(members.size() == part.class_size(part.class_of(sequence_code(x, 2))));
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto& y = members[i];
      CHECK(type_set.count(y) == 1);
      CHECK(estimate_order(y, 2, phi, k_max).k_hat == k_hat);
      CHECK(part.class_of(sequence_code(y, 2)) == part.class_of(sequence_code(x, 2)));
      CHECK(part.index_in_class(sequence_code(y, 2)) == i);
    }
  }
}

TEST_CASE("twice-universal generation") {
  const Penalty phi = Penalty::mdl();
  const auto pow2 = TargetSet::powers_of(2);
  CHECK(tu_generate_exact(SymbolSequence(8, 1), 2, pow2, phi, 2) == FvrOutput{0, 1});
  CHECK(tu_generate_practical(SymbolSequence(8, 1), 2, pow2, phi, 2).output == FvrOutput{0, 1});

  const std::size_t n = 9;
  const int k_max = default_max_order(2, n);
  const UClassPartition part(2, n, phi, k_max);
  for (const auto& x : all_sequences(2, n)) {
    const auto exact = tu_generate_exact(x, 2, pow2, phi, k_max);
    CHECK(exact == part.generate(sequence_code(x, 2), pow2));
    CHECK(exact.r < exact.M);
    CHECK(pow2.contains(exact.M));
    const auto practical = tu_generate_practical(x, 2, pow2, phi, k_max);
    CHECK(practical.output.r < practical.output.M);
    CHECK(practical.output == e2_generate(x, ModelSpec(2, practical.k_hat), pow2));

    // When the whole type shares the estimate, U(x) is the type class.
    const int k_hat = estimate_order(x, 2, phi, k_max).k_hat;
    const ModelSpec spec(2, k_hat);
    bool uniform_estimate = true;
    for (const auto& y : brute_force_class(x, spec)) {
      uniform_estimate = uniform_estimate && estimate_order(y, 2, phi, k_max).k_hat == k_hat;
    }
    if (uniform_estimate) CHECK(exact == e2_generate(x, spec, pow2));
  }
}

TEST_CASE("distance to uniformity") {
  const auto src = markov_source();
  const auto int_target = TargetSet::all_positive();
  // A scheme of the true order, or above it, is exactly uniform.
  for (int k : {1, 2}) {
    const ModelSpec spec(2, k);
    const FvrMap e2 = [&](std::span<const int> x) { return e2_generate(x, spec, TargetSet::powers_of(2)); };
    CHECK(distance_to_uniformity(e2, src, 8) == 0);
  }
  // Below the true order it is not.
  const ModelSpec iid_spec(2, 0);
  const FvrMap low = [&](std::span<const int> x) { return e1_generate(x, iid_spec); };
  CHECK(distance_to_uniformity(low, src, 8) > 0);
  CHECK(distance_to_uniformity(low, src.to_double(), 8) ==
        doctest::Approx(static_cast<double>(distance_to_uniformity(low, src, 8).get_d())));

  // Direct evaluation of the definition for a tiny case.
  const std::size_t n = 4;
  std::map<std::uint64_t, std::map<std::uint64_t, BigRational>> q;
  for (const auto& x : all_sequences(2, n)) {
    const auto out = low(x);
    q[big_to_u64(out.M)][big_to_u64(out.r)] += sequence_probability(src, x);
  }
  BigRational direct = 0;
  for (auto& [m, by_r] : q) {
    for (std::uint64_t r = 0; r < m; ++r) {
      for (std::uint64_t r2 = 0; r2 < m; ++r2) {
        BigRational d = by_r[r] - by_r[r2];
        direct += abs(d) / m;
      }
    }
  }
  CHECK(distance_to_uniformity(low, src, n) == direct);

  for (std::size_t len : {6, 10}) {
    const int k_max = default_max_order(2, len);
    const Penalty phi = Penalty::mdl();
    const UClassPartition part(2, len, phi, k_max);
    const FvrMap tu = [&](std::span<const int> x) { return part.generate(sequence_code(x, 2), int_target); };
    const FvrMap practical = [&](std::span<const int> x) {
      return tu_generate_practical(x, 2, int_target, phi, k_max).output;
    };
    const auto err = order_error_probabilities(src, len, phi, k_max);
    CHECK(distance_to_uniformity(tu, src, len) <= 2 * err.under);
    CHECK(distance_to_uniformity(practical, src, len) <= 4 * (err.under + err.over));
  }
}

TEST_CASE("golden table of the exact twice-universal scheme") {
  const std::size_t n = 10;
  const int k_max = default_max_order(2, n);
  const UClassPartition part(2, n, Penalty::mdl(), k_max);
  const auto target = TargetSet::all_positive();
  std::ostringstream table;
  table << "x,k_hat,r,M\n";
  for (std::uint64_t code = 0; code < part.sequences(); ++code) {
    const auto x = decode_sequence(code, 2, n);
    const auto out = part.generate(code, target);
    table << testing::str(x) << ',' << part.estimated_order(code) << ',' << out.r << ',' << out.M << '\n';
  }
  std::ifstream golden(TCRNG_GOLDEN_DIR "/tu_exact_n10.csv");
  REQUIRE(golden.good());
  std::stringstream expected;
  expected << golden.rdbuf();
  CHECK(table.str() == expected.str());
}
