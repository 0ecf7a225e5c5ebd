// tcrng: command-line front end.
//
// Exit codes: 0 success / PASS, 1 a test reported FAIL, 2 bad configuration or input.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcrng/errors.hpp"
#include "tcrng/fvr.hpp"
#include "tcrng/harness.hpp"
#include "tcrng/markov_model.hpp"
#include "tcrng/twice_universal.hpp"
#include "tcrng/type_classes.hpp"
#include "tcrng/vfr.hpp"

using namespace tcrng;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::string g_command_line;

// Symbols are raw bytes. With ascii set, the characters '0'..'9' are the
// symbols and whitespace is skipped.
class SymbolStream {
 public:
  SymbolStream(const std::string& path, bool ascii, int alpha) : ascii_(ascii), alpha_(alpha) {
    if (path.empty() || path == "-") {
      in_ = &std::cin;
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open input '" + path + "'");
      in_ = &file_;
    }
  }

  std::optional<int> next() {
    while (true) {
      const int c = in_->get();
      if (c == EOF) return std::nullopt;
      int a = c;
      if (ascii_) {
        if (std::isspace(c)) continue;
        if (c < '0' || c > '9') throw InputError("non-digit character in ascii input");
        a = c - '0';
      }
      if (a >= alpha_) {
        throw InputError("symbol " + std::to_string(a) + " at position " + std::to_string(read_) +
                         " is outside the alphabet of size " + std::to_string(alpha_));
      }
      ++read_;
      return a;
    }
  }

  // Exactly n symbols, or nullopt if the stream ends first (partial data is discarded).
  std::optional<SymbolSequence> block(std::size_t n) {
    SymbolSequence x;
    x.reserve(n);
    while (x.size() < n) {
      auto a = next();
      if (!a) return std::nullopt;
      x.push_back(*a);
    }
    return x;
  }

  std::uint64_t read() const { return read_; }

 private:
  std::ifstream file_;
  std::istream* in_ = nullptr;
  bool ascii_;
  int alpha_;
  std::uint64_t read_ = 0;
};

struct SpecArgs {
  std::string model;
  int alpha = 2;
  int k = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--model", model, "Model JSON; only alphabet, order and s0 are used");
    cmd->add_option("--alpha", alpha, "Alphabet size when no model is given")->check(CLI::Range(2, 255));
    cmd->add_option("--k", k, "Markov order when no model is given")->check(CLI::Range(0, 16));
  }
  ModelSpec spec() const { return model.empty() ? ModelSpec(alpha, k) : load_model_file(model).params.spec(); }
};

struct InputArgs {
  std::string path;
  bool ascii = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--in", path, "Input symbol stream, one byte per symbol ('-' for stdin)");
    cmd->add_flag("--ascii", ascii, "Read symbols as decimal digit characters");
  }
};

void common_meta(CsvReport& rep, const std::optional<MarkovParams>& params) {
  if (params) rep.meta("model_hash", model_hash(*params));
  rep.meta("prng", kPrngName);
  rep.meta("command", g_command_line);
}

std::vector<std::uint64_t> parse_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    // Accept 2^e as shorthand.
    if (auto caret = item.find('^'); caret != std::string::npos) {
      const unsigned long long base = std::stoull(item.substr(0, caret));
      const unsigned long long e = std::stoull(item.substr(caret + 1));
      v = 1;
      for (unsigned long long i = 0; i < e; ++i) {
        if (v > (~0ull) / base) throw ConfigError("list value '" + item + "' overflows 64 bits");
        v *= base;
      }
    } else {
      v = std::stoull(item, &pos);
      if (pos != item.size()) throw ConfigError("bad list value '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void print_fvr(const FvrOutput& out, const TargetSet& target) {
  std::cout << out.r.get_str() << ' ' << out.M.get_str();
  if (target.kind() == TargetSet::Kind::PowersOf) {
    if (auto digits = radix_digits(out.r, out.M, target.base()); digits && !digits->empty()) {
      std::cout << " digits";
      for (auto d : *digits) std::cout << ' ' << d;
    }
  }
  std::cout << '\n';
}

std::string report_line(const UniformityReport& rep) {
  std::ostringstream out;
  out << (rep.pass ? "PASS" : "FAIL") << " mode=" << rep.mode;
  if (rep.mode == "exact") {
    out << " groups=" << rep.groups << " discrepancies=" << rep.discrepancies;
  } else {
    out << " trials=" << rep.trials << " chi2=" << format_number(rep.statistic)
        << " dof=" << format_number(rep.dof) << " p=" << format_number(rep.p_value);
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Uniform random integers from finite-memory sources"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);
  std::string out_path;
  std::uint64_t brute_bound = 0;
  app.add_option("--out", out_path, "Write the report to this file instead of stdout");
  app.add_option("--brute-bound", brute_bound, "Cap on exhaustively enumerated sequences (default 2^22)");

  // fv
  auto* fv = app.add_subcommand("fv", "Fixed-to-variable generation (E2) on blocks of n symbols");
  SpecArgs fv_spec;
  InputArgs fv_in;
  std::size_t fv_n = 0;
  std::string fv_target = "int";
  bool fv_sync = false;
  std::size_t fv_blocks = 1;
  bool fv_e1 = false;
  fv_spec.add_to(fv);
  fv_in.add_to(fv);
  fv->add_option("--n", fv_n, "Block length")->required()->check(CLI::PositiveNumber);
  fv->add_option("--target", fv_target, "int | pow2 | pow:<p> | list:<file>[:<bound>]");
  fv->add_flag("--sync-state", fv_sync, "Take the first k symbols of each block as the initial state");
  fv->add_option("--blocks", fv_blocks, "Number of consecutive blocks; 0 runs until input ends");
  fv->add_flag("--e1", fv_e1, "Use the basic scheme (M = |T|) instead of the target set");

  // fv-tu
  auto* fvtu = app.add_subcommand("fv-tu", "Twice-universal fixed-to-variable generation");
  InputArgs tu_in;
  int tu_alpha = 2;
  std::size_t tu_n = 0;
  std::string tu_target = "int", tu_variant = "practical", tu_phi = "mdl";
  std::optional<int> tu_kmax;
  fvtu->add_option("--alpha", tu_alpha, "Alphabet size")->check(CLI::Range(2, 255));
  tu_in.add_to(fvtu);
  fvtu->add_option("--n", tu_n, "Block length")->required()->check(CLI::PositiveNumber);
  fvtu->add_option("--target", tu_target, "int | pow2 | pow:<p> | list:<file>[:<bound>]");
  fvtu->add_option("--variant", tu_variant)->check(CLI::IsMember({"exact", "practical"}));
  fvtu->add_option("--kmax", tu_kmax, "Largest order considered (default floor(log_alpha n) - 1)")
      ->check(CLI::NonNegativeNumber);
  fvtu->add_option("--phi", tu_phi, "mdl | c:<beta> (beta log2 n / n)");

  // vf
  auto* vf = app.add_subcommand("vf", "Variable-to-fixed generation into [0, M)");
  SpecArgs vf_spec;
  InputArgs vf_in;
  std::uint64_t vf_M = 2;
  std::optional<std::size_t> vf_N;
  bool vf_sync = false;
  std::size_t vf_runs = 1;
  vf_spec.add_to(vf);
  vf_in.add_to(vf);
  vf->add_option("--M", vf_M, "Output range")->required();
  vf->add_option("--max-len", vf_N, "Truncation depth N");
  vf->add_flag("--sync-state", vf_sync, "Take the first k symbols as the initial state");
  vf->add_option("--runs", vf_runs, "Consecutive generations; 0 runs until input ends");

  // vf-analyze
  auto* vfa = app.add_subcommand("vf-analyze", "Exact failure probability and partial expected length");
  vfa->alias("analyze-vf");
  std::string vfa_model;
  std::uint64_t vfa_M = 2;
  std::size_t vfa_N = 0;
  bool vfa_float = false;
  vfa->add_option("--model", vfa_model, "Model JSON")->required();
  vfa->add_option("--M", vfa_M, "Output range")->required();
  vfa->add_option("--N", vfa_N, "Depth")->required();
  vfa->add_flag("--float", vfa_float, "Use long double arithmetic even for rational models");

  // analyze-fv
  auto* afv = app.add_subcommand("analyze-fv", "Exact expected output length of E1 and E2");
  std::string afv_model, afv_target = "int", afv_ns;
  afv->add_option("--model", afv_model, "Model JSON")->required();
  afv->add_option("--target", afv_target, "int | pow2 | pow:<p> | list:<file>[:<bound>]");
  afv->add_option("--n-list", afv_ns, "Comma-separated block lengths")->required();

  // enumerate
  auto* en = app.add_subcommand("enumerate", "Type class of a sequence, or all types of a length");
  SpecArgs en_spec;
  std::string en_x;
  std::optional<std::size_t> en_n;
  bool en_members = false;
  en_spec.add_to(en);
  en->add_option("--x", en_x, "Sequence as decimal digits");
  en->add_option("--n", en_n, "List every type of this length");
  en->add_flag("--members", en_members, "Also list the members of the class of --x");

  // selftest
  auto* st = app.add_subcommand("selftest", "Exact invariant suites of every module");
  bool st_corrupt = false;
  st->add_flag("--corrupt-cofactor", st_corrupt, "Negative control: flip the sign of the Whittle cofactor");

  // uniformity
  auto* un = app.add_subcommand("uniformity", "Uniformity test of a generator");
  SpecArgs un_spec;
  std::string un_scheme = "e2", un_mode = "exact", un_target = "int", un_phi = "mdl";
  std::size_t un_n = 8;
  std::uint64_t un_M = 2, un_trials = 100000, un_seed = 1;
  std::optional<std::size_t> un_N;
  std::optional<int> un_kmax;
  un_spec.add_to(un);
  un->add_option("--scheme", un_scheme)
      ->check(CLI::IsMember({"e1", "e2", "tu-exact", "tu-practical", "vf", "mock-biased"}));
  un->add_option("--mode", un_mode)->check(CLI::IsMember({"exact", "sampled"}));
  un->add_option("--n", un_n, "FVR block length");
  un->add_option("--target", un_target, "FVR target set");
  un->add_option("--M", un_M, "VFR output range");
  un->add_option("--N", un_N, "VFR truncation depth");
  un->add_option("--trials", un_trials, "Sampled mode trials");
  un->add_option("--seed", un_seed, "Sampled mode base seed; trial i uses seed + i");
  un->add_option("--kmax", un_kmax, "Twice-universal order range");
  un->add_option("--phi", un_phi, "Twice-universal penalty");

  // fv-asymptotics
  auto* fva = app.add_subcommand("fv-asymptotics", "H(X^n) - E log|T| against log2 n");
  std::string fva_model, fva_ns = "256,512,1024,2048,4096,8192,16384", fva_target = "int";
  std::uint64_t fva_trials = 10000, fva_seed = 1;
  fva->add_option("--model", fva_model, "Model JSON")->required();
  fva->add_option("--n-list", fva_ns, "Ascending block lengths");
  fva->add_option("--target", fva_target);
  fva->add_option("--trials", fva_trials);
  fva->add_option("--seed", fva_seed);

  // vf-asymptotics
  auto* vfs = app.add_subcommand("vf-asymptotics", "Mean stop length and Delta(M) = L H - log2 M");
  std::string vfs_model, vfs_Ms = "2^4,2^8,2^16,2^32";
  std::uint64_t vfs_trials = 10000, vfs_seed = 1;
  std::size_t vfs_depth = 0;
  vfs->add_option("--model", vfs_model, "Model JSON")->required();
  vfs->add_option("--M-list", vfs_Ms, "Ascending output ranges, e.g. 16,2^8");
  vfs->add_option("--trials", vfs_trials);
  vfs->add_option("--seed", vfs_seed);
  vfs->add_option("--exact-depth", vfs_depth, "Also compute the exact partial sum L_N to this depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (brute_bound > 0) setenv("TCRNG_BRUTE_BOUND", std::to_string(brute_bound).c_str(), 1);

    if (*fv) {
      const ModelSpec spec = fv_spec.spec();
      const TargetSet target = TargetSet::parse(fv_target);
      SymbolStream in(fv_in.path, fv_in.ascii, spec.alpha());
      for (std::size_t b = 0; fv_blocks == 0 || b < fv_blocks; ++b) {
        auto x = in.block(fv_n);
        if (!x) {
          if (fv_blocks == 0 && b > 0) break;
          std::cerr << "error: input ended after " << in.read() << " symbols, block " << b + 1 << " needs "
                    << fv_n << "\n";
          return kExitConfig;
        }
        const FvrOptions opts{fv_sync};
        print_fvr(fv_e1 ? e1_generate(*x, spec, opts) : e2_generate(*x, spec, target, opts), target);
      }
      return 0;
    }

    if (*fvtu) {
      const TargetSet target = TargetSet::parse(tu_target);
      const Penalty phi = Penalty::parse(tu_phi);
      if (tu_phi.rfind("c:", 0) == 0) {
        std::cerr << "warning: the order-error guarantee needs phi(n) above a source-dependent "
                     "beta log n / n; this is not checked\n";
      }
      const int k_max = tu_kmax.value_or(default_max_order(tu_alpha, tu_n));
      SymbolStream in(tu_in.path, tu_in.ascii, tu_alpha);
      auto x = in.block(tu_n);
      if (!x) {
        std::cerr << "error: input ended after " << in.read() << " symbols, need " << tu_n << "\n";
        return kExitConfig;
      }
      if (tu_variant == "exact") {
        print_fvr(tu_generate_exact(*x, tu_alpha, target, phi, k_max), target);
        std::cerr << "k_hat " << estimate_order(*x, tu_alpha, phi, k_max).k_hat << "\n";
      } else {
        const auto res = tu_generate_practical(*x, tu_alpha, target, phi, k_max);
        print_fvr(res.output, target);
        std::cerr << "k_hat " << res.k_hat << "\n";
      }
      return 0;
    }

    if (*vf) {
      VfrConfig cfg{vf_spec.spec(), vf_M, vf_N, vf_sync};
      cfg.validate();
      SymbolStream in(vf_in.path, vf_in.ascii, cfg.spec.alpha());
      for (std::size_t run = 0; vf_runs == 0 || run < vf_runs; ++run) {
        SequentialG2 gen(cfg);
        std::optional<VfrResult> res;
        while (!res) {
          auto a = in.next();
          if (!a) break;
          res = gen.push(*a);
        }
        if (!res) {
          if (vf_runs == 0 && gen.consumed() == 0) break;
          std::cerr << "error: input ended after " << in.read() << " symbols before run " << run + 1
                    << " decided\n";
          return kExitConfig;
        }
        if (res->stopped) {
          std::cout << res->r << ' ' << res->length << '\n';
        } else {
          std::cout << "FAIL " << res->length << '\n';
        }
      }
      return 0;
    }

    if (*vfa) {
      const LoadedModel model = load_model_file(vfa_model);
      VfrConfig{model.params.spec(), vfa_M, vfa_N, false}.validate();
      CsvReport rep("vf-analyze");
      common_meta(rep, model.params);
      rep.meta("M", std::to_string(vfa_M));
      rep.meta("N", std::to_string(vfa_N));
      const bool exact = model.exact && !vfa_float;
      rep.meta("arithmetic", exact ? "rational" : "long double");
      rep.columns({"n", "P_fail_exact", "L_partial"});
      if (exact) {
        const auto law = vfr_level_stats(*model.exact, vfa_M, vfa_N);
        for (std::size_t n = 0; n <= vfa_N; ++n) {
          rep.row({std::to_string(n), format_number(law.p_fail[n]), format_number(law.length[n])});
        }
      } else {
        const auto law = vfr_level_stats(model.params, vfa_M, vfa_N);
        for (std::size_t n = 0; n <= vfa_N; ++n) {
          rep.row({std::to_string(n), format_number(law.p_fail[n]), format_number(law.length[n])});
        }
      }
      rep.write(out_path, std::cout);
      return 0;
    }

    if (*afv) {
      const LoadedModel model = load_model_file(afv_model);
      const TargetSet target = TargetSet::parse(afv_target);
      CsvReport rep("analyze-fv");
      common_meta(rep, model.params);
      rep.meta("target", target.describe());
      rep.columns({"n", "H_Xn", "E1_log2M", "E2_log2M", "E2_over_H"});
      for (const auto n : parse_list(afv_ns)) {
        const double h = marginal_entropy(model.params, n);
        const double e1 = expected_output_length_exact(model.params, n, target, FvrScheme::E1);
        const double e2 = expected_output_length_exact(model.params, n, target, FvrScheme::E2);
        rep.row({std::to_string(n), format_number(h), format_number(e1), format_number(e2),
                 format_number(h > 0 ? e2 / h : 0.0)});
      }
      rep.write(out_path, std::cout);
      return 0;
    }

    if (*en) {
      const ModelSpec spec = en_spec.spec();
      if (en_x.empty() == !en_n.has_value()) throw ConfigError("give exactly one of --x and --n");
      if (en_n) {
        CsvReport rep("enumerate");
        common_meta(rep, std::nullopt);
        rep.meta("alpha", std::to_string(spec.alpha()));
        rep.meta("k", std::to_string(spec.order()));
        rep.columns({"type", "size"});
        for (const auto& t : all_types(spec, *en_n)) rep.row({type_to_json(t), big_to_string(class_size(t))});
        rep.write(out_path, std::cout);
        return 0;
      }
      SymbolSequence x;
      for (char c : en_x) x.push_back(c - '0');
      spec.validate(x);
      const auto t = counts_of(x, spec);
      std::cout << "type " << type_to_json(t) << "\n";
      std::cout << "size " << big_to_string(class_size(t)) << "\n";
      std::cout << "rank " << big_to_string(rank(x, spec)) << "\n";
      if (en_members) {
        const BigCount size = class_size(t);
        if (size > big_from_u64(brute_force_bound())) throw ResourceError("class exceeds the brute-force bound");
        for (BigCount i = 0; i < size; ++i) {
          for (int a : unrank(t, i)) std::cout << a;
          std::cout << "\n";
        }
      }
      return 0;
    }

    if (*st) {
      SelftestOptions opts;
      if (st_corrupt) opts.size = corrupted_class_size;
      const auto t0 = std::chrono::steady_clock::now();
      const auto results = run_selftest(opts);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      bool all = true;
      for (const auto& r : results) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
      }
      if (secs > 300) std::cerr << "warning: selftest took " << secs << " s, over the 5 minute budget\n";
      std::cout << (all ? "PASS" : "FAIL") << " selftest (" << results.size() << " suites)\n";
      return all ? 0 : kExitFail;
    }

    if (*un) {
      const std::optional<LoadedModel> model =
          un_spec.model.empty() ? std::nullopt : std::optional<LoadedModel>(load_model_file(un_spec.model));
      const ModelSpec spec = un_spec.spec();
      if (un_mode == "sampled" && !model) throw ConfigError("sampled mode needs --model");
      CsvReport rep("uniformity");
      common_meta(rep, model ? std::optional<MarkovParams>(model->params) : std::nullopt);
      rep.meta("scheme", un_scheme);
      rep.meta("mode", un_mode);
      if (un_mode == "sampled") {
        rep.meta("seed", std::to_string(un_seed));
        rep.meta("trials_requested", std::to_string(un_trials));
      }
      UniformityReport res;
      if (un_scheme == "vf") {
        rep.meta("M", std::to_string(un_M));
        const VfrConfig cfg{spec, un_M, un_N, false};
        cfg.validate();
        if (un_mode == "exact") {
          if (!un_N) throw ConfigError("exact VFR mode needs --N");
          res = exact_vfr_uniformity([&](std::span<const int> x) { return g2_generate(x, cfg); }, spec, un_M, *un_N);
        } else {
          res = sampled_vfr_uniformity(cfg, model->params, un_trials, un_seed);
        }
      } else {
        const TargetSet target = TargetSet::parse(un_target);
        rep.meta("n", std::to_string(un_n));
        rep.meta("target", target.describe());
        const Penalty phi = Penalty::parse(un_phi);
        const int k_max = un_kmax.value_or(default_max_order(spec.alpha(), un_n));
        const int alpha = spec.alpha();
        FvrMap scheme;
        GroupKeyFn group = type_group(spec);
        std::optional<UClassPartition> part;
        if (un_scheme == "e1") {
          scheme = [&](std::span<const int> x) { return e1_generate(x, spec); };
        } else if (un_scheme == "e2") {
          scheme = [&](std::span<const int> x) { return e2_generate(x, spec, target); };
        } else if (un_scheme == "mock-biased") {
          scheme = mock_biased_scheme(spec, target);
        } else {
          // Both variants are uniform given the estimated order and the type at that order.
          group = [&, alpha](std::span<const int> x) {
            const int k_hat = estimate_order(x, alpha, phi, k_max).k_hat;
            TypeKey key = type_key(counts_of(x, ModelSpec(alpha, k_hat)));
            key.insert(key.begin(), static_cast<std::uint32_t>(k_hat));
            return key;
          };
          if (un_scheme == "tu-exact") {
            part.emplace(alpha, un_n, phi, k_max);
            scheme = [&](std::span<const int> x) { return part->generate(sequence_code(x, alpha), target); };
          } else {
            scheme = [&](std::span<const int> x) { return tu_generate_practical(x, alpha, target, phi, k_max).output; };
          }
        }
        if (un_mode == "exact") {
          res = exact_fvr_uniformity(scheme, alpha, un_n, group);
        } else {
          res = sampled_fvr_uniformity(scheme, model->params, un_n, un_trials, un_seed);
        }
      }
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      rep.columns({"result", "mode", "groups", "discrepancies", "trials", "chi2", "dof", "p_value"});
      rep.row({res.pass ? "PASS" : "FAIL", res.mode, std::to_string(res.groups), std::to_string(res.discrepancies),
               std::to_string(res.trials), format_number(res.statistic), format_number(res.dof),
               format_number(res.p_value)});
      rep.write(out_path, std::cout);
      std::cerr << report_line(res) << "\n";
      return res.pass ? 0 : kExitFail;
    }

    if (*fva) {
      const LoadedModel model = load_model_file(fva_model);
      const TargetSet target = TargetSet::parse(fva_target);
      std::vector<std::size_t> ns;
      for (auto v : parse_list(fva_ns)) ns.push_back(v);
      const auto res = run_fv_asymptotics(model.params, ns, target, fva_trials, fva_seed);
      CsvReport rep("fv-asymptotics");
      common_meta(rep, model.params);
      rep.meta("target", target.describe());
      rep.meta("trials", std::to_string(fva_trials));
      rep.meta("seed", std::to_string(fva_seed));
      rep.meta("fit_slope", format_number(res.fit.slope));
      rep.meta("fit_intercept", format_number(res.fit.intercept));
      rep.meta("fit_r_squared", format_number(res.fit.r_squared));
      rep.meta("free_parameters_half", format_number(model.params.spec().free_parameters() / 2.0));
      rep.columns({"n", "H_Xn", "E_log2_T", "std_error", "gap", "mean_E2_log2M"});
      for (const auto& r : res.rows) {
        rep.row({std::to_string(r.n), format_number(r.entropy), format_number(r.mean_log_size),
                 format_number(r.std_error), format_number(r.gap), format_number(r.mean_e2_length)});
      }
      rep.write(out_path, std::cout);
      return 0;
    }

    if (*vfs) {
      const LoadedModel model = load_model_file(vfs_model);
      const auto res = run_vf_asymptotics(model.params, parse_list(vfs_Ms), vfs_trials, vfs_seed, vfs_depth);
      CsvReport rep("vf-asymptotics");
      common_meta(rep, model.params);
      rep.meta("trials", std::to_string(vfs_trials));
      rep.meta("seed", std::to_string(vfs_seed));
      rep.meta("entropy_rate", format_number(res.entropy_rate));
      rep.meta("delta_non_decreasing", res.delta_non_decreasing ? "true" : "false");
      rep.meta("delta_min", format_number(res.delta_min));
      rep.columns({"M", "mean_length", "std_error", "delta", "above_entropy_bound", "L_partial_exact",
                   "P_fail_exact", "delta_exact"});
      auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
      for (const auto& r : res.rows) {
        rep.row({std::to_string(r.M), format_number(r.mean_length), format_number(r.std_error),
                 format_number(r.delta), r.above_entropy_bound ? "true" : "false", opt(r.exact_length),
                 opt(r.exact_tail), opt(r.delta_exact)});
      }
      rep.write(out_path, std::cout);
      return 0;
    }
  } catch (const InputExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {  // InputError, ConfigError, bad numbers
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
