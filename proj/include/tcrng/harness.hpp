#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tcrng/fvr.hpp"
#include "tcrng/markov_model.hpp"
#include "tcrng/twice_universal.hpp"
#include "tcrng/vfr.hpp"

namespace tcrng {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kCsvSchema = "tcrng-csv/1";

// CSV with leading "# key: value" metadata lines. No timestamps, so reruns
// with the same inputs are byte-identical.
class CsvReport {
 public:
  explicit CsvReport(std::string kind);

  void meta(const std::string& key, const std::string& value);
  void columns(std::vector<std::string> names);
  void row(std::vector<std::string> cells);

  std::string str() const;
  // Writes to `path`, or to `fallback` when path is empty.
  void write(const std::string& path, std::ostream& fallback) const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Shortest decimal that round-trips.
std::string format_number(long double v);
std::string format_number(double v);
// 17 significant digits for values below the double range, else as a double.
std::string format_number(const BigRational& v);

// Evaluates fn(i) for i in [0, count) on worker threads; results land at
// index i, so the outcome does not depend on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(count);
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 64);
  if (workers == 1 || count < 2 * workers) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct UniformityReport {
  bool pass = false;
  std::string mode;  // "exact" or "sampled"
  // exact mode: groups checked and groups whose label counts differ
  std::uint64_t groups = 0;
  std::uint64_t discrepancies = 0;
  // sampled mode
  std::uint64_t trials = 0;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::vector<std::string> warnings;
};

// Exact mode for an FVR on inputs of length n: inside each group (by default
// the type of x at `spec`), every M that occurs must receive each r equally often.
using GroupKeyFn = std::function<TypeKey(std::span<const int>)>;
UniformityReport exact_fvr_uniformity(const FvrMap& scheme, int alpha, std::size_t n,
                                      const GroupKeyFn& group_of,
                                      std::uint64_t bound = brute_force_bound());
GroupKeyFn type_group(const ModelSpec& spec);

// Exact mode for a VFR truncated at N: for every stop length n and type of
// x^n, the labels of the stopping prefixes are balanced over [0, M).
using VfrMap = std::function<VfrResult(std::span<const int>)>;
UniformityReport exact_vfr_uniformity(const VfrMap& scheme, const ModelSpec& spec, std::uint64_t M,
                                      std::size_t N, std::uint64_t bound = brute_force_bound());

// Sampled mode. FVR: chi-square of r given M, pooled over the values of M
// whose cells expect at least 5 hits. VFR: chi-square of r over [0, M); trials
// are raised to 5M if fewer were requested. Trial i uses seed + i.
UniformityReport sampled_fvr_uniformity(const FvrMap& scheme, const MarkovParams& params,
                                        std::size_t n, std::uint64_t trials, std::uint64_t seed);
UniformityReport sampled_vfr_uniformity(const VfrConfig& cfg, const MarkovParams& params,
                                        std::uint64_t trials, std::uint64_t seed);

// Upper tail probability of the chi-square law.
double chi_square_p_value(double statistic, double dof);

// Negative control: E2 with label 0 reported whenever the class has at least two members.
FvrMap mock_biased_scheme(const ModelSpec& spec, const TargetSet& target);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct FvAsymptoticsRow {
  std::size_t n = 0;
  double entropy = 0.0;       // H_P(X^n), exact
  double mean_log_size = 0.0;  // estimate of E log2 |T|
  double std_error = 0.0;
  double gap = 0.0;  // H_P(X^n) - mean_log_size
  double mean_e2_length = 0.0;
};
struct FvAsymptotics {
  std::vector<FvAsymptoticsRow> rows;
  LinearFit fit;  // gap against log2 n
};

// E log2|T| is estimated as H_P(X^n) + mean(log2|T(X)| + log2 P(X)): the
// second term has the same mean as log2|T| - H and far smaller variance.
FvAsymptotics run_fv_asymptotics(const MarkovParams& params, const std::vector<std::size_t>& n_list,
                                 const TargetSet& target, std::uint64_t trials, std::uint64_t seed);

struct VfAsymptoticsRow {
  std::uint64_t M = 0;
  double mean_length = 0.0;  // Monte Carlo mean stop length
  double std_error = 0.0;
  std::optional<double> exact_length;  // L_depth from the exact recursion
  std::optional<double> exact_tail;    // P(fail_depth)
  double delta = 0.0;                  // mean_length * H - log2 M
  std::optional<double> delta_exact;
  bool above_entropy_bound = false;  // mean_length > log2 M / H
};
struct VfAsymptotics {
  double entropy_rate = 0.0;
  std::vector<VfAsymptoticsRow> rows;
  bool delta_non_decreasing = false;
  double delta_min = 0.0;
};

// exact_depth = 0 skips the exact evaluation; otherwise the exact partial sum
// is taken to that depth.
VfAsymptotics run_vf_asymptotics(const MarkovParams& params, const std::vector<std::uint64_t>& M_list,
                                 std::uint64_t trials, std::uint64_t seed, std::size_t exact_depth);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

using SizeFn = std::function<BigCount(const TypeCounts&)>;

struct SelftestOptions {
  // Replaces class_size inside the combinatorial suites; used for negative controls.
  SizeFn size;
};

// Desk-scale exact invariant suites of every module.
std::vector<CheckResult> run_selftest(const SelftestOptions& opts = {});

// class_size with the sign of the cofactor flipped.
BigCount corrupted_class_size(const TypeCounts& t);

}  // namespace tcrng
