#include "tcrng/markov_model.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tcrng/errors.hpp"

namespace tcrng {

namespace {

constexpr double kRowSumTolerance = 1e-12;

std::size_t checked_power(int alpha, int k) {
  std::size_t out = 1;
  for (int i = 0; i < k; ++i) {
    if (out > (std::size_t{1} << 40) / static_cast<std::size_t>(alpha)) {
      throw InputError("alpha^k is too large");
    }
    out *= static_cast<std::size_t>(alpha);
  }
  return out;
}

double row_entropy(const MarkovParams& params, std::size_t s) {
  double h = 0.0;
  for (int a = 0; a < params.spec().alpha(); ++a) {
    h -= params.cond(s, a) * params.log2_cond(s, a);
  }
  return h;
}

BigRational parse_rational(const std::string& text) {
  BigRational q;
  if (q.set_str(text, 10) != 0) throw InputError("malformed rational '" + text + "'");
  q.canonicalize();
  return q;
}

}  // namespace

ModelSpec::ModelSpec(int alpha, int k, std::vector<int> s0)
    : alpha_(alpha), k_(k), s0_(std::move(s0)), num_states_(1), s0_index_(0) {
  if (alpha_ < 2) throw InputError("alphabet size must be at least 2");
  if (alpha_ > 256) throw InputError("alphabet size above 256 is not supported");
  if (k_ < 0) throw InputError("Markov order must be nonnegative");
  num_states_ = checked_power(alpha_, k_);
  if (s0_.empty()) s0_.assign(static_cast<std::size_t>(k_), 0);
  if (s0_.size() != static_cast<std::size_t>(k_)) {
    throw InputError("initial state must have exactly k symbols");
  }
  validate(s0_);
  s0_index_ = state_index(s0_);
}

std::size_t ModelSpec::state_index(std::span<const int> chronological) const {
  std::size_t s = 0;
  for (int a : chronological) s = next_state(s, a);
  return s;
}

std::vector<int> ModelSpec::state_symbols(std::size_t s) const {
  std::vector<int> out(static_cast<std::size_t>(k_));
  for (int i = k_ - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(s % static_cast<std::size_t>(alpha_));
    s /= static_cast<std::size_t>(alpha_);
  }
  return out;
}

void ModelSpec::validate(std::span<const int> x) const {
  for (int a : x) {
    if (a < 0 || a >= alpha_) {
      throw InputError("symbol " + std::to_string(a) + " outside alphabet of size " +
                       std::to_string(alpha_));
    }
  }
}

ModelSpec ModelSpec::with_initial_state(std::vector<int> s0) const {
  return ModelSpec(alpha_, k_, std::move(s0));
}

MarkovParams::MarkovParams(ModelSpec spec, std::vector<std::vector<double>> cond)
    : spec_(std::move(spec)) {
  const auto alpha = static_cast<std::size_t>(spec_.alpha());
  if (cond.size() != spec_.num_states()) {
    throw InputError("conditional table needs one row per state (alpha^k rows)");
  }
  cond_.reserve(spec_.num_states() * alpha);
  for (const auto& row : cond) {
    if (row.size() != alpha) throw InputError("conditional row must have alpha entries");
    double sum = 0.0;
    for (double p : row) {
      if (!(p > 0.0 && p < 1.0)) throw InputError("conditional probabilities must lie in (0,1)");
      sum += p;
      cond_.push_back(p);
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw InputError("conditional row does not sum to 1");
    }
  }
  log2_cond_.reserve(cond_.size());
  for (double p : cond_) log2_cond_.push_back(std::log2(p));
}

MarkovParams MarkovParams::iid(std::vector<double> probs) {
  const int alpha = static_cast<int>(probs.size());
  return MarkovParams(ModelSpec(alpha, 0), {std::move(probs)});
}

std::vector<std::vector<double>> MarkovParams::rows() const {
  const auto alpha = static_cast<std::size_t>(spec_.alpha());
  std::vector<std::vector<double>> out(spec_.num_states());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].assign(cond_.begin() + static_cast<std::ptrdiff_t>(s * alpha),
                  cond_.begin() + static_cast<std::ptrdiff_t>((s + 1) * alpha));
  }
  return out;
}

RationalParams::RationalParams(ModelSpec spec, std::vector<std::vector<BigRational>> cond)
    : spec_(std::move(spec)) {
  const auto alpha = static_cast<std::size_t>(spec_.alpha());
  if (cond.size() != spec_.num_states()) {
    throw InputError("conditional table needs one row per state (alpha^k rows)");
  }
  for (auto& row : cond) {
    if (row.size() != alpha) throw InputError("conditional row must have alpha entries");
    BigRational sum = 0;
    for (auto& p : row) {
      p.canonicalize();
      if (p <= 0 || p >= 1) throw InputError("conditional probabilities must lie in (0,1)");
      sum += p;
      cond_.push_back(p);
    }
    if (sum != 1) throw InputError("rational conditional row does not sum to exactly 1");
  }
}

MarkovParams RationalParams::to_double() const {
  const auto alpha = static_cast<std::size_t>(spec_.alpha());
  std::vector<std::vector<double>> rows(spec_.num_states(), std::vector<double>(alpha));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t a = 0; a < alpha; ++a) rows[s][a] = big_to_double(cond_[s * alpha + a]);
  }
  return MarkovParams(spec_, std::move(rows));
}

double sequence_log2_probability(const MarkovParams& params, std::span<const int> x) {
  const auto& spec = params.spec();
  spec.validate(x);
  std::size_t s = spec.initial_state_index();
  double lp = 0.0;
  for (int a : x) {
    lp += params.log2_cond(s, a);
    s = spec.next_state(s, a);
  }
  return lp;
}

BigRational sequence_probability(const RationalParams& params, std::span<const int> x) {
  const auto& spec = params.spec();
  spec.validate(x);
  std::size_t s = spec.initial_state_index();
  BigRational p = 1;
  for (int a : x) {
    p *= params.cond(s, a);
    s = spec.next_state(s, a);
  }
  return p;
}

std::vector<double> stationary_distribution(const MarkovParams& params) {
  const auto& spec = params.spec();
  const auto states = static_cast<Eigen::Index>(spec.num_states());
  // Balance equations pi (Q - I) = 0 with the last one replaced by sum(pi) = 1.
  Eigen::MatrixXd system = -Eigen::MatrixXd::Identity(states, states);
  for (Eigen::Index s = 0; s < states; ++s) {
    for (int a = 0; a < spec.alpha(); ++a) {
      const auto t = static_cast<Eigen::Index>(spec.next_state(static_cast<std::size_t>(s), a));
      system(t, s) += params.cond(static_cast<std::size_t>(s), a);
    }
  }
  system.row(states - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states);
  rhs(states - 1) = 1.0;
  const Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + pi.size()};
}

double entropy_rate(const MarkovParams& params) {
  const auto pi = stationary_distribution(params);
  double h = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s) h += pi[s] * row_entropy(params, s);
  return h;
}

double marginal_entropy(const MarkovParams& params, std::size_t n) {
  const auto& spec = params.spec();
  std::vector<double> row_h(spec.num_states());
  for (std::size_t s = 0; s < row_h.size(); ++s) row_h[s] = row_entropy(params, s);

  std::vector<long double> law(spec.num_states(), 0.0L), next(spec.num_states());
  law[spec.initial_state_index()] = 1.0L;
  long double h = 0.0L;
  for (std::size_t t = 0; t < n; ++t) {
    std::fill(next.begin(), next.end(), 0.0L);
    for (std::size_t s = 0; s < law.size(); ++s) {
      if (law[s] == 0.0L) continue;
      h += law[s] * row_h[s];
      for (int a = 0; a < spec.alpha(); ++a) {
        next[spec.next_state(s, a)] += law[s] * params.cond(s, a);
      }
    }
    law.swap(next);
  }
  return static_cast<double>(h);
}

Sampler::Sampler(const MarkovParams& params, std::uint64_t seed)
    : params_(params), engine_(seed), state_(params.spec().initial_state_index()) {
  const auto& spec = params_.spec();
  const auto alpha = static_cast<std::size_t>(spec.alpha());
  cumulative_.resize(spec.num_states() * alpha);
  for (std::size_t s = 0; s < spec.num_states(); ++s) {
    double acc = 0.0;
    for (std::size_t a = 0; a < alpha; ++a) {
      acc += params_.cond(s, static_cast<int>(a));
      cumulative_[s * alpha + a] = acc;
    }
    cumulative_[s * alpha + alpha - 1] = 2.0;  // absorbs rounding in the row sum
  }
}

int Sampler::next() {
  // 53 high bits of the engine output as a uniform double in [0,1).
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  const auto alpha = static_cast<std::size_t>(params_.spec().alpha());
  const double* row = cumulative_.data() + state_ * alpha;
  int a = 0;
  while (u >= row[a]) ++a;
  state_ = params_.spec().next_state(state_, a);
  return a;
}

SymbolSequence sample(const MarkovParams& params, std::size_t n, std::uint64_t seed) {
  Sampler sampler(params, seed);
  SymbolSequence x(n);
  for (auto& a : x) a = sampler.next();
  return x;
}

LoadedModel parse_model(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("alpha") || !j.contains("k") || !j.contains("cond")) {
    throw InputError("model JSON needs \"alpha\", \"k\" and \"cond\"");
  }
  std::vector<int> s0;
  if (j.contains("s0")) s0 = j.at("s0").get<std::vector<int>>();
  ModelSpec spec(j.at("alpha").get<int>(), j.at("k").get<int>(), std::move(s0));

  const auto& cond = j.at("cond");
  if (!cond.is_array()) throw InputError("\"cond\" must be an array of rows");
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<BigRational>> exact_rows;
  bool all_rational = true;
  for (const auto& row : cond) {
    if (!row.is_array()) throw InputError("\"cond\" rows must be arrays");
    auto& r = rows.emplace_back();
    auto& q = exact_rows.emplace_back();
    for (const auto& v : row) {
      if (v.is_string()) {
        q.push_back(parse_rational(v.get<std::string>()));
        r.push_back(big_to_double(q.back()));
      } else if (v.is_number()) {
        all_rational = false;
        r.push_back(v.get<double>());
      } else {
        throw InputError("\"cond\" entries must be numbers or \"num/den\" strings");
      }
    }
  }
  LoadedModel out{MarkovParams(spec, std::move(rows)), std::nullopt};
  if (all_rational) out.exact.emplace(spec, std::move(exact_rows));
  return out;
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string model_to_json(const MarkovParams& params) {
  nlohmann::json j;
  j["alpha"] = params.spec().alpha();
  j["k"] = params.spec().order();
  j["s0"] = params.spec().initial_state();
  j["cond"] = params.rows();
  return j.dump();
}

std::string model_hash(const MarkovParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : model_to_json(params)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tcrng
