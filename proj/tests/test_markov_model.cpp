#include <doctest.h>

#include <cmath>
#include <random>

#include "tcrng/errors.hpp"
#include "tcrng/harness.hpp"
#include "tcrng/markov_model.hpp"
#include "test_util.hpp"

using namespace tcrng;
using tcrng::testing::all_sequences;
using tcrng::testing::h2;
using tcrng::testing::seq;

namespace {

MarkovParams two_state() { return MarkovParams(ModelSpec(2, 1, {0}), {{0.7, 0.3}, {0.4, 0.6}}); }

}  // namespace

TEST_CASE("sequence probability") {
  const auto fair = MarkovParams::iid({0.5, 0.5});
  CHECK(sequence_log2_probability(fair, seq("0110")) == doctest::Approx(-4.0));
  CHECK(sequence_log2_probability(fair, seq("")) == 0.0);
  CHECK(sequence_log2_probability(two_state(), seq("011")) ==
        doctest::Approx(std::log2(0.7 * 0.3 * 0.6)));
  CHECK_THROWS_AS(sequence_log2_probability(fair, seq("012")), InputError);

  const RationalParams exact(ModelSpec(2, 1), {{BigRational(7, 10), BigRational(3, 10)},
                                               {BigRational(2, 5), BigRational(3, 5)}});
  CHECK(sequence_probability(exact, seq("011")) == BigRational(63, 500));  // 0.7 * 0.3 * 0.6
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(ModelSpec(1, 0), InputError);
  CHECK_THROWS_AS(ModelSpec(2, -1), InputError);
  CHECK_THROWS_AS(ModelSpec(2, 2, {0}), InputError);
  CHECK_THROWS_AS(ModelSpec(2, 1, {2}), InputError);
  CHECK_THROWS_AS(MarkovParams(ModelSpec(2, 0), {{0.5, 0.6}}), InputError);
  CHECK_THROWS_AS(MarkovParams(ModelSpec(2, 0), {{1.0, 0.0}}), InputError);
  CHECK_THROWS_AS(MarkovParams(ModelSpec(2, 1), {{0.5, 0.5}}), InputError);
  CHECK(ModelSpec(2, 2).initial_state() == std::vector<int>{0, 0});
  CHECK(ModelSpec(3, 2).free_parameters() == 18);
}

TEST_CASE("state encoding puts the most recent symbol last") {
  const ModelSpec spec(3, 2);
  CHECK(spec.state_index(seq("12")) == 5);
  CHECK(spec.state_symbols(5) == seq("12"));
  CHECK(spec.next_state(5, 0) == 6);  // (1,2) then 0 -> (2,0)
  CHECK(ModelSpec(2, 2, {1, 0}).initial_state_index() == 2);
}

TEST_CASE("stationary distribution") {
  CHECK(stationary_distribution(MarkovParams::iid({0.3, 0.7})) == std::vector<double>{1.0});

  const auto same_rows = MarkovParams(ModelSpec(2, 1), {{0.8, 0.2}, {0.8, 0.2}});
  const auto pi_same = stationary_distribution(same_rows);
  CHECK(pi_same[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(pi_same[1] == doctest::Approx(0.2).epsilon(1e-12));

  // pi_1 * 0.4 = pi_0 * 0.3 with pi_0 + pi_1 = 1
  const auto pi = stationary_distribution(two_state());
  CHECK(pi[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

  const MarkovParams order2(ModelSpec(3, 2), {{0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}, {0.6, 0.2, 0.2},
                                              {0.3, 0.3, 0.4}, {0.5, 0.25, 0.25}, {0.9, 0.05, 0.05},
                                              {0.4, 0.4, 0.2}, {0.15, 0.7, 0.15}, {0.33, 0.33, 0.34}});
  const auto pi2 = stationary_distribution(order2);
  std::vector<double> flow(9, 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < 9; ++s) {
    total += pi2[s];
    CHECK(pi2[s] > 0.0);
    for (int a = 0; a < 3; ++a) flow[order2.spec().next_state(s, a)] += pi2[s] * order2.cond(s, a);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t s = 0; s < 9; ++s) CHECK(std::abs(flow[s] - pi2[s]) < 1e-10);
}

TEST_CASE("entropy rate") {
  CHECK(entropy_rate(MarkovParams::iid({0.5, 0.5})) == doctest::Approx(1.0));
  CHECK(entropy_rate(MarkovParams(ModelSpec(2, 1), {{0.8, 0.2}, {0.8, 0.2}})) == doctest::Approx(h2(0.2)));
  CHECK(entropy_rate(two_state()) == doctest::Approx(4.0 / 7.0 * h2(0.3) + 3.0 / 7.0 * h2(0.4)));

  // Swapping the two symbols relabels the states and leaves the rate unchanged.
  const MarkovParams swapped(ModelSpec(2, 1), {{0.6, 0.4}, {0.3, 0.7}});
  CHECK(entropy_rate(swapped) == doctest::Approx(entropy_rate(two_state())));
}

TEST_CASE("marginal entropy matches enumeration") {
  CHECK(marginal_entropy(two_state(), 0) == 0.0);
  CHECK(marginal_entropy(MarkovParams::iid({0.7, 0.3}), 10) == doctest::Approx(10 * h2(0.3)));
  for (const auto& params : {MarkovParams::iid({0.7, 0.3}), two_state(),
                             MarkovParams(ModelSpec(2, 1, {1}), {{0.9, 0.1}, {0.25, 0.75}})}) {
    for (std::size_t n : {1, 3, 7, 10}) {
      double h = 0.0;
      for (const auto& x : all_sequences(2, n)) {
        const double lp = sequence_log2_probability(params, x);
        h -= std::exp2(lp) * lp;
      }
      CHECK(marginal_entropy(params, n) == doctest::Approx(h).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampling is reproducible") {
  const auto params = MarkovParams::iid({0.7, 0.3});
  CHECK(sample(params, 0, 1).empty());
  CHECK(sample(params, 1000, 42) == sample(params, 1000, 42));
  CHECK(sample(params, 1000, 42) != sample(params, 1000, 43));

  const auto x = sample(params, 1000000, 7);
  double ones = 0;
  for (int a : x) ones += a;
  CHECK(std::abs(ones / 1e6 - 0.3) < 0.002);

  // Markov source: empirical transition frequency out of state 1.
  const auto y = sample(two_state(), 200000, 11);
  double from_one = 0, one_one = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i - 1] == 1) {
      ++from_one;
      one_one += y[i];
    }
  }
  CHECK(std::abs(one_one / from_one - 0.6) < 0.01);
}

TEST_CASE("model files") {
  const auto loaded = parse_model(R"({"alpha": 2, "k": 1, "s0": [1], "cond": [[0.7, 0.3], [0.4, 0.6]]})");
  CHECK(loaded.params.spec() == ModelSpec(2, 1, {1}));
  CHECK(loaded.params.cond(1, 1) == 0.6);
  CHECK_FALSE(loaded.exact.has_value());

  const auto exact = parse_model(R"({"alpha": 2, "k": 0, "cond": [["7/10", "3/10"]]})");
  REQUIRE(exact.exact.has_value());
  CHECK(exact.exact->cond(0, 1) == BigRational(3, 10));
  CHECK(exact.params.cond(0, 1) == doctest::Approx(0.3));

  CHECK_THROWS_AS(parse_model(R"({"alpha": 2, "k": 0, "cond": [[0.5]]})"), InputError);
  CHECK_THROWS_AS(parse_model("not json"), InputError);

  // The hash is a function of the model content only.
  const auto again = parse_model(model_to_json(loaded.params));
  CHECK(model_hash(again.params) == model_hash(loaded.params));
  CHECK(model_hash(two_state()) != model_hash(loaded.params));
  CHECK(model_hash(loaded.params).size() == 16);
}

TEST_CASE("rationals convert to the nearest double") {
  CHECK(big_to_double(BigRational(7, 10)) == 0.7);
  CHECK(big_to_double(BigRational(-1, 3)) == -1.0 / 3.0);
  CHECK(big_to_double(BigRational(0)) == 0.0);
  // Quotients of integers below 2^53 are correctly rounded by IEEE division.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> dist(1, (std::int64_t{1} << 53) - 1);
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t a = dist(rng) >> (i % 50), b = dist(rng) >> (i % 37);
    BigRational q(big_from_u64(a), big_from_u64(b));
    q.canonicalize();
    CHECK(big_to_double(q) == static_cast<double>(a) / static_cast<double>(b));
  }
  // Far below the double range the value goes through the digit formatter.
  BigRational tiny(1);
  for (int i = 0; i < 400; ++i) tiny /= 10;
  CHECK(format_number(tiny) == "1e-400");
  CHECK(format_number(BigRational(-7, 4) * tiny) == "-1.75e-400");
}

TEST_CASE("rational models convert like literal decimals") {
  const auto a = parse_model(R"({"alpha": 2, "k": 0, "cond": [["7/10", "3/10"]]})");
  const auto b = parse_model(R"({"alpha": 2, "k": 0, "cond": [[0.7, 0.3]]})");
  CHECK(model_hash(a.params) == model_hash(b.params));
}
