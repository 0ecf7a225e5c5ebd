#include "tcrng/harness.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tcrng/errors.hpp"

namespace tcrng {

namespace {

bool needs_quotes(const std::string& cell) {
  return cell.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_cell(const std::string& cell) {
  if (!needs_quotes(cell)) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanAndError mean_and_error(const std::vector<double>& v) {
  MeanAndError out;
  if (v.empty()) return out;
  long double sum = 0.0L;
  for (double x : v) sum += x;
  const long double mean = sum / v.size();
  long double ss = 0.0L;
  for (double x : v) ss += (x - mean) * (x - mean);
  out.mean = static_cast<double>(mean);
  if (v.size() > 1) out.std_error = static_cast<double>(std::sqrt(ss / (v.size() - 1) / v.size()));
  return out;
}

// Chi-square of counts against the uniform law on the cells.
double chi_square_uniform(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  const long double expected = static_cast<long double>(total) / counts.size();
  long double stat = 0.0L;
  for (auto c : counts) {
    const long double d = static_cast<long double>(c) - expected;
    stat += d * d / expected;
  }
  return static_cast<double>(stat);
}

}  // namespace

CsvReport::CsvReport(std::string kind) {
  meta_.emplace_back("report", std::move(kind));
  meta_.emplace_back("tool_version", kToolVersion);
  meta_.emplace_back("schema", kCsvSchema);
}

void CsvReport::meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

void CsvReport::columns(std::vector<std::string> names) { columns_ = std::move(names); }

void CsvReport::row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

std::string CsvReport::str() const {
  std::ostringstream out;
  for (const auto& [k, v] : meta_) out << "# " << k << ": " << v << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
    out << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out.str();
}

void CsvReport::write(const std::string& path, std::ostream& fallback) const {
  if (path.empty()) {
    fallback << str();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << str();
}

std::string format_number(long double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(const BigRational& v) {
  const double d = big_to_double(v);
  if (v == 0 || std::fabs(d) >= 1e-300) return format_number(d);
  mpf_class f(v, 256);
  mp_exp_t exp = 0;
  std::string digits = mpf_get_str(nullptr, &exp, 10, 17, f.get_mpf_t());
  std::string sign;
  if (digits[0] == '-') {
    sign = "-";
    digits.erase(0, 1);
  }
  std::string out = sign + digits.substr(0, 1);
  if (digits.size() > 1) out += "." + digits.substr(1);
  return out + "e" + std::to_string(exp - 1);
}

GroupKeyFn type_group(const ModelSpec& spec) {
  return [spec](std::span<const int> x) { return type_key(counts_of(x, spec)); };
}

UniformityReport exact_fvr_uniformity(const FvrMap& scheme, int alpha, std::size_t n,
                                      const GroupKeyFn& group_of, std::uint64_t bound) {
  const std::uint64_t total = checked_sequence_count(alpha, n, bound);
  std::map<TypeKey, std::map<std::uint64_t, std::vector<std::uint64_t>>> tallies;
  for (std::uint64_t code = 0; code < total; ++code) {
    const auto x = decode_sequence(code, alpha, n);
    const FvrOutput out = scheme(x);
    const std::uint64_t m = big_to_u64(out.M);
    auto& cells = tallies[group_of(x)][m];
    if (cells.empty()) cells.assign(m, 0);
    ++cells[big_to_u64(out.r)];
  }
  UniformityReport rep;
  rep.mode = "exact";
  rep.groups = tallies.size();
  for (const auto& [key, by_m] : tallies) {
    for (const auto& [m, cells] : by_m) {
      if (std::adjacent_find(cells.begin(), cells.end(), std::not_equal_to<>()) != cells.end()) {
        ++rep.discrepancies;
      }
    }
  }
  rep.pass = rep.discrepancies == 0;
  return rep;
}

UniformityReport exact_vfr_uniformity(const VfrMap& scheme, const ModelSpec& spec, std::uint64_t M,
                                      std::size_t N, std::uint64_t bound) {
  const int alpha = spec.alpha();
  const std::uint64_t total = checked_sequence_count(alpha, N, bound);
  std::map<std::pair<std::size_t, TypeKey>, std::vector<std::uint64_t>> tallies;
  std::vector<std::uint64_t> place(N + 1, 1);
  for (std::size_t i = 1; i <= N; ++i) place[i] = place[i - 1] * static_cast<std::uint64_t>(alpha);
  for (std::uint64_t code = 0; code < total; ++code) {
    const auto x = decode_sequence(code, alpha, N);
    const VfrResult res = scheme(x);
    // Count each stopping prefix once: the copy whose unread tail is all zeros.
    if (!res.stopped || code >= place[res.length]) continue;
    if (res.r >= M) {
      UniformityReport bad;
      bad.mode = "exact";
      bad.discrepancies = 1;
      bad.warnings.push_back("label outside [0, M)");
      return bad;
    }
    const std::span<const int> prefix(x.data(), res.length);
    auto& cells = tallies[{res.length, type_key(counts_of(prefix, spec))}];
    if (cells.empty()) cells.assign(M, 0);
    ++cells[res.r];
  }
  UniformityReport rep;
  rep.mode = "exact";
  rep.groups = tallies.size();
  for (const auto& [key, cells] : tallies) {
    if (std::adjacent_find(cells.begin(), cells.end(), std::not_equal_to<>()) != cells.end()) {
      ++rep.discrepancies;
    }
  }
  rep.pass = rep.discrepancies == 0;
  return rep;
}

double chi_square_p_value(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

UniformityReport sampled_fvr_uniformity(const FvrMap& scheme, const MarkovParams& params,
                                        std::size_t n, std::uint64_t trials, std::uint64_t seed) {
  UniformityReport rep;
  rep.mode = "sampled";
  constexpr std::uint64_t kMaxTrials = std::uint64_t{1} << 26;
  while (true) {
    using Cell = std::pair<std::uint64_t, std::uint64_t>;  // (M, r)
    const auto outputs = parallel_map<Cell>(trials, [&](std::size_t i) {
      const auto x = sample(params, n, seed + i);
      const FvrOutput out = scheme(x);
      return Cell{big_to_u64(out.M), big_to_u64(out.r)};
    });
    std::map<std::uint64_t, std::vector<std::uint64_t>> by_m;
    std::map<std::uint64_t, std::uint64_t> totals;
    for (const auto& [m, r] : outputs) {
      ++totals[m];
      if (m > 1 && m <= (std::uint64_t{1} << 24)) {
        auto& cells = by_m[m];
        if (cells.empty()) cells.assign(m, 0);
        ++cells[r];
      }
    }
    double stat = 0.0;
    double dof = 0.0;
    std::uint64_t skipped = 0;
    for (const auto& [m, total] : totals) {
      if (m == 1) continue;
      if (m > (std::uint64_t{1} << 24) || total < 5 * m) {
        skipped += total;
        continue;
      }
      stat += chi_square_uniform(by_m[m], total);
      dof += static_cast<double>(m - 1);
    }
    if (dof == 0.0 && trials < kMaxTrials) {
      rep.warnings.push_back("no output range has 5 expected hits per cell at " + std::to_string(trials) +
                             " trials; doubling");
      trials *= 2;
      continue;
    }
    if (skipped > 0) {
      rep.warnings.push_back(std::to_string(skipped) +
                             " outputs fell in ranges with fewer than 5 expected hits per cell and were not tested");
    }
    rep.trials = trials;
    rep.statistic = stat;
    rep.dof = dof;
    rep.p_value = chi_square_p_value(stat, dof);
    rep.pass = rep.p_value >= 1e-3;
    return rep;
  }
}

UniformityReport sampled_vfr_uniformity(const VfrConfig& cfg, const MarkovParams& params,
                                        std::uint64_t trials, std::uint64_t seed) {
  cfg.validate();
  if (cfg.M > (std::uint64_t{1} << 24)) throw ConfigError("sampled VFR test needs M <= 2^24");
  UniformityReport rep;
  rep.mode = "sampled";
  if (trials < 5 * cfg.M) {
    rep.warnings.push_back("fewer than 5 expected hits per cell; trials raised from " +
                           std::to_string(trials) + " to " + std::to_string(5 * cfg.M));
    trials = 5 * cfg.M;
  }
  const auto results = parallel_map<VfrResult>(trials, [&](std::size_t i) {
    Sampler src(params, seed + i);
    return g2_generate([&] { return src.next(); }, cfg);
  });
  std::vector<std::uint64_t> cells(cfg.M, 0);
  std::uint64_t stopped = 0;
  for (const auto& r : results) {
    if (!r.stopped) continue;
    ++cells[r.r];
    ++stopped;
  }
  if (stopped < trials) {
    rep.warnings.push_back(std::to_string(trials - stopped) + " runs failed at depth N and were not counted");
  }
  rep.trials = trials;
  rep.statistic = stopped ? chi_square_uniform(cells, stopped) : 0.0;
  rep.dof = static_cast<double>(cfg.M - 1);
  rep.p_value = chi_square_p_value(rep.statistic, rep.dof);
  rep.pass = rep.p_value >= 1e-3;
  return rep;
}

FvrMap mock_biased_scheme(const ModelSpec& spec, const TargetSet& target) {
  return [spec, target](std::span<const int> x) {
    FvrOutput out = e2_generate(x, spec, target);
    if (out.M >= 2) out.r = 0;
    return out;
  };
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit_line needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

FvAsymptotics run_fv_asymptotics(const MarkovParams& params, const std::vector<std::size_t>& n_list,
                                 const TargetSet& target, std::uint64_t trials, std::uint64_t seed) {
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw ConfigError("n list must be ascending");
  if (trials < 2) throw ConfigError("need at least 2 trials");
  FvAsymptotics out;
  std::vector<double> xs, ys;
  for (const std::size_t n : n_list) {
    struct Trial {
      double centered = 0.0;  // log2|T| + log2 P(x)
      double e2_length = 0.0;
    };
    const auto samples = parallel_map<Trial>(trials, [&](std::size_t i) {
      const auto x = sample(params, n, seed + i);
      // Large classes are computed directly; caching them would only fill memory.
      const BigCount size = class_size(counts_of(x, params.spec()));
      return Trial{static_cast<double>(big_log2(size)) + sequence_log2_probability(params, x),
                   conditional_length(size, target)};
    });
    std::vector<double> centered, lengths;
    for (const auto& s : samples) {
      centered.push_back(s.centered);
      lengths.push_back(s.e2_length);
    }
    const auto c = mean_and_error(centered);
    FvAsymptoticsRow row;
    row.n = n;
    row.entropy = marginal_entropy(params, n);
    row.mean_log_size = row.entropy + c.mean;
    row.std_error = c.std_error;
    row.gap = -c.mean;
    row.mean_e2_length = mean_and_error(lengths).mean;
    out.rows.push_back(row);
    xs.push_back(std::log2(static_cast<double>(n)));
    ys.push_back(row.gap);
  }
  if (xs.size() >= 2) out.fit = fit_line(xs, ys);
  return out;
}

VfAsymptotics run_vf_asymptotics(const MarkovParams& params, const std::vector<std::uint64_t>& M_list,
                                 std::uint64_t trials, std::uint64_t seed, std::size_t exact_depth) {
  if (!std::is_sorted(M_list.begin(), M_list.end())) throw ConfigError("M list must be ascending");
  if (trials < 2) throw ConfigError("need at least 2 trials");
  VfAsymptotics out;
  out.entropy_rate = entropy_rate(params);
  const double h = out.entropy_rate;
  for (const std::uint64_t M : M_list) {
    VfrConfig cfg{params.spec(), M, std::nullopt, false};
    cfg.validate();
    const auto lengths = parallel_map<double>(trials, [&](std::size_t i) {
      Sampler src(params, seed + i);
      return static_cast<double>(g2_generate([&] { return src.next(); }, cfg).length);
    });
    const auto stats = mean_and_error(lengths);
    VfAsymptoticsRow row;
    row.M = M;
    row.mean_length = stats.mean;
    row.std_error = stats.std_error;
    const double log_m = std::log2(static_cast<double>(M));
    row.delta = row.mean_length * h - log_m;
    row.above_entropy_bound = row.mean_length > log_m / h;
    if (exact_depth > 0) {
      const auto law = vfr_level_stats(params, M, exact_depth);
      row.exact_length = static_cast<double>(law.length[exact_depth]);
      row.exact_tail = static_cast<double>(law.p_fail[exact_depth]);
      row.delta_exact = *row.exact_length * h - log_m;
    }
    out.rows.push_back(row);
  }
  out.delta_non_decreasing = true;
  out.delta_min = out.rows.empty() ? 0.0 : out.rows.front().delta;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.delta_min = std::min(out.delta_min, out.rows[i].delta);
    if (i > 0 && out.rows[i].delta < out.rows[i - 1].delta) out.delta_non_decreasing = false;
  }
  return out;
}

}  // namespace tcrng
