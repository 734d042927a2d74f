#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linsys/closure.hpp"
#include "linsys/designs.hpp"
#include "linsys/io.hpp"
#include "linsys/testkit.hpp"

namespace {

using namespace linsys;

constexpr int kExitReject = 3;
constexpr int kExitNonMember = 4;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 65;
constexpr int kExitNumeric = 70;

struct CommonOpts {
  std::string method = "screening";
  Index jstar = 0;  // 1-based; 0 = default (last column)
  std::string cn = "high";
  double alpha = 0.05;
  std::uint64_t seed = 0;
  Index splits = 1;
  double sigma_floor = kDefaultSigmaFloor;
  double split_fraction = 0.5;
  double rank_tau = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--method", c.method, "direct or screening")
      ->check(CLI::IsMember({"direct", "screening"}));
  cmd->add_option("--jstar", c.jstar, "screened column (1-based; default: last)");
  cmd->add_option("--cn", c.cn, "complement weight regime")
      ->check(CLI::IsMember({"low", "high"}));
  cmd->add_option("--alpha", c.alpha, "significance level in (0, 0.5)");
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--splits", c.splits, "sample-split repetitions");
  cmd->add_option("--sigma-floor", c.sigma_floor, "variance floor");
  cmd->add_option("--split-fraction", c.split_fraction, "first-split share");
  cmd->add_option("--rank-tau", c.rank_tau, "min-singular-value gate (0 disables)");
}

MethodChoice to_method(const CommonOpts& c) {
  const CnRegime regime = c.cn == "low" ? CnRegime::LowDim : CnRegime::HighDim;
  if (c.method == "direct") return MethodChoice::direct(regime);
  if (c.jstar > 0) return MethodChoice::screening(c.jstar - 1, regime);
  return MethodChoice::screening(std::nullopt, regime);
}

TestOptions to_options(const CommonOpts& c) {
  TestOptions o;
  o.alpha = c.alpha;
  o.seed = c.seed;
  o.splits = c.splits;
  o.sigma_floor = c.sigma_floor;
  o.split_fraction = c.split_fraction;
  o.rank_tau = c.rank_tau;
  return o;
}

Design to_design(const std::string& name, Index H) {
  if (name == "cox") return Design::cox(H);
  if (name == "goff") return Design::goff();
  if (name == "fh") return Design::fh();
  throw std::invalid_argument("unknown design: " + name);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

// Inputs: either --model/--data files, or --design with generated data.
struct SourceOpts {
  std::string model_path, data_path;
  std::string design;
  Index H = 3;
  Index n = 0;
  std::uint64_t gen_seed = 1;
  std::optional<double> value;  // absent: keep the model file's stored value
};

void add_source(CLI::App* cmd, SourceOpts& s, bool with_value) {
  cmd->add_option("--model", s.model_path, "model JSON path");
  cmd->add_option("--data", s.data_path, "data CSV path");
  cmd->add_option("--design", s.design, "built-in design: cox, goff, fh")
      ->check(CLI::IsMember({"cox", "goff", "fh"}));
  cmd->add_option("--H", s.H, "Cox panel count");
  cmd->add_option("--n", s.n, "generated sample size (with --design)");
  cmd->add_option("--gen-seed", s.gen_seed, "data-generation seed (with --design)");
  if (with_value) cmd->add_option("--value", s.value, "hypothesized value");
}

Dataset load_data(const SourceOpts& s) {
  if (!s.data_path.empty()) return parse_dataset_csv(read_text_file(s.data_path));
  if (s.design.empty())
    throw std::invalid_argument("need --data or --design");
  if (s.n <= 0) throw std::invalid_argument("--design needs --n");
  return to_design(s.design, s.H).data(s.n, s.gen_seed);
}

struct LoadedFamily {
  std::function<MomentModel(double)> family;
  double base_value = 0.0;  // the model file's stored value; 0 for designs
};

LoadedFamily load_family(const SourceOpts& s) {
  if (!s.model_path.empty()) {
    const MomentModel base = parse_model_json(read_text_file(s.model_path));
    return {[base](double v) {
              MomentModel m = base;
              m.null_value = v;
              return m;
            },
            base.null_value};
  }
  if (s.design.empty())
    throw std::invalid_argument("need --model or --design");
  const Design d = to_design(s.design, s.H);
  return {[d](double v) { return d.model(v); }, 0.0};
}

int run(int argc, char** argv) {
  CLI::App app{"Tests whether an estimated linear system admits a nonnegative solution"};
  app.require_subcommand(1);

  auto* cc = app.add_subcommand("closure-check",
                                "population membership in the solvability closure");
  std::string cc_in, cc_out;
  double cc_tol = 1e-8;
  cc->add_option("--in", cc_in, "triple JSON path")->required();
  cc->add_option("--out", cc_out, "output path (default stdout)");
  cc->add_option("--tol", cc_tol, "feasibility tolerance");

  auto* tc = app.add_subcommand("test", "one-sided test on a data set");
  CommonOpts t_common;
  SourceOpts t_src;
  std::string t_out, t_format = "json";
  add_source(tc, t_src, true);
  add_common(tc, t_common);
  tc->add_option("--out", t_out, "output path (default stdout)");
  tc->add_option("--format", t_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* iv = app.add_subcommand("invert", "confidence set by test inversion");
  CommonOpts i_common;
  SourceOpts i_src;
  std::string i_out, i_format = "json", i_grid, i_policy = "reuse";
  add_source(iv, i_src, false);
  add_common(iv, i_common);
  iv->add_option("--grid", i_grid, "lo:hi:step")->required();
  iv->add_option("--seed-policy", i_policy, "reuse or per-point")
      ->check(CLI::IsMember({"reuse", "per-point"}));
  iv->add_option("--out", i_out, "output path (default stdout)");
  iv->add_option("--format", i_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* sim = app.add_subcommand("simulate", "Monte Carlo rejection curve");
  CommonOpts s_common;
  std::string s_design, s_grid, s_out;
  Index s_H = 3, s_n = 0, s_reps = 0;
  sim->add_option("--design", s_design, "cox, goff, or fh")
      ->required()
      ->check(CLI::IsMember({"cox", "goff", "fh"}));
  sim->add_option("--H", s_H, "Cox panel count");
  sim->add_option("--n", s_n, "sample size per rep")->required();
  sim->add_option("--reps", s_reps, "replications per grid point")->required();
  sim->add_option("--grid", s_grid, "lo:hi:step")->required();
  add_common(sim, s_common);
  sim->add_option("--out", s_out, "CSV output path (default stdout)");

  auto* pl = app.add_subcommand("plot", "render a rejection-curve CSV as SVG");
  std::string p_in, p_out, p_band;
  pl->add_option("--in", p_in, "rejection-curve CSV path")->required();
  pl->add_option("--out", p_out, "SVG output path (default stdout)");
  pl->add_option("--band", p_band, "shaded band lo:hi");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  if (cc->parsed()) {
    const Triple t = parse_triple_json(read_text_file(cc_in));
    ClosureOptions opts;
    opts.feasibility_tol = cc_tol;
    opts.c0_tol = cc_tol;
    const MembershipReport report = member_closure(t, opts);
    emit(report_to_json(report), cc_out);
    return report.in_closure ? 0 : kExitNonMember;
  }

  if (tc->parsed()) {
    const Dataset data = load_data(t_src);
    const LoadedFamily fam = load_family(t_src);
    const MomentModel model = fam.family(t_src.value.value_or(fam.base_value));
    const TestOutcome o = run_test(model, data, to_method(t_common), to_options(t_common));
    emit(t_format == "csv" ? outcome_to_csv(o) : outcome_to_json(o), t_out);
    return o.reject ? kExitReject : 0;
  }

  if (iv->parsed()) {
    const Dataset data = load_data(i_src);
    const auto family = load_family(i_src).family;
    const std::vector<double> grid = parse_grid(i_grid);
    const SeedPolicy policy =
        i_policy == "per-point" ? SeedPolicy::PerPoint : SeedPolicy::Reuse;
    const ConfidenceSet ci = invert_ci(family, data, to_method(i_common),
                                       to_options(i_common), grid, policy);
    emit(i_format == "csv" ? confidence_to_csv(ci) : confidence_to_json(ci), i_out);
    return 0;
  }

  if (sim->parsed()) {
    const Design design = to_design(s_design, s_H);
    const std::vector<double> grid = parse_grid(s_grid);
    const CnRegime regime = s_common.cn == "low" ? CnRegime::LowDim : CnRegime::HighDim;
    const MethodChoice direct = MethodChoice::direct(regime);
    const MethodChoice screening =
        s_common.jstar > 0 ? MethodChoice::screening(s_common.jstar - 1, regime)
                           : MethodChoice::screening(std::nullopt, regime);
    const RejectionCurve curve = monte_carlo(design, grid, s_reps, s_n, direct,
                                             screening, to_options(s_common),
                                             s_common.seed);
    emit(curve_to_csv(curve), s_out);
    return 0;
  }

  const RejectionCurve curve = parse_curve_csv(read_text_file(p_in));
  std::optional<std::pair<double, double>> band;
  if (!p_band.empty()) {
    const auto colon = p_band.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--band needs lo:hi");
    band = {std::stod(p_band.substr(0, colon)), std::stod(p_band.substr(colon + 1))};
  }
  emit(curve_to_svg(curve, band), p_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // CLI11 refuses option values that begin with '-'; splice grid-style
  // values onto their flag so "--grid -1:1:0.1" works.
  std::vector<std::string> args;
  std::vector<char*> argp;
  args.reserve(static_cast<std::size_t>(argc));
  for (int i = 0; i < argc; ++i) {
    std::string a = argv[i];
    if ((a == "--grid" || a == "--band") && i + 1 < argc && argv[i + 1][0] == '-' &&
        argv[i + 1][1] != '-') {
      a += "=";
      a += argv[++i];
    }
    args.push_back(std::move(a));
  }
  argp.reserve(args.size());
  for (auto& a : args) argp.push_back(a.data());

  try {
    return run(static_cast<int>(argp.size()), argp.data());
  } catch (const linsys::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const linsys::numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
