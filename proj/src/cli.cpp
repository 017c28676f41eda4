#include "pgp/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pgp/errors.hpp"
#include "pgp/eval.hpp"
#include "pgp/io.hpp"
#include "pgp/optimizer.hpp"
#include "pgp/pruning.hpp"
#include "pgp/synthetic.hpp"

namespace pgp {

namespace {

// Thrown for bad flag combinations that CLI11 cannot detect on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sidecar_path(const std::string& graph_path) {
  return std::filesystem::path(graph_path).replace_extension(".gt").string();
}

Sigma3 sigma_from(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw UsageError(std::string(flag) + " expects three values x,y,theta");
  return {v[0], v[1], v[2]};
}

// Pruning thresholds: preset, then config file, then flags (CLI11 merges the
// latter two, so an option counts as set when either supplied it).
struct PruneFlags {
  std::string preset = "p_aggressive";
  double s_hat = 0.0, d_hat = 0.0, gate = 0.0;
  std::size_t N_hat = 0, n_hat = 0, m_hat = 0, e_hat = 0;
  CLI::Option *s_opt{}, *N_opt{}, *n_opt{}, *m_opt{}, *e_opt{}, *d_opt{}, *gate_opt{};

  void add_to(CLI::App& app) {
    app.add_option("--preset", preset, "p_aggressive, p_cautious or p_reference (no pruning)")
        ->check(CLI::IsMember({"p_aggressive", "p_cautious", "p_reference"}))
        ->capture_default_str();
    s_opt = app.add_option("--s-hat", s_hat, "density threshold (1/m)");
    N_opt = app.add_option("--N-hat", N_hat, "neighbours in the truncated density");
    n_opt = app.add_option("--n-hat", n_hat, "minimum number of prunable vertices kept");
    m_opt = app.add_option("--m-hat", m_hat, "most recent vertices never pruned");
    e_opt = app.add_option("--e-hat", e_hat, "maximum edges per vertex");
    d_opt = app.add_option("--d-hat", d_hat, "maximum detour ratio of a removed edge");
    gate_opt = app.add_option("--gate", gate, "squared Mahalanobis gate for merging edges");
  }

  bool reference() const { return preset == "p_reference"; }

  PruningConfig config() const {
    PruningConfig c = preset == "p_cautious" ? p_cautious() : p_aggressive();
    if (s_opt->count()) c.s_hat = s_hat;
    if (N_opt->count()) c.N_hat = N_hat;
    if (n_opt->count()) c.n_hat = n_hat;
    if (m_opt->count()) c.m_hat = m_hat;
    if (e_opt->count()) c.e_hat = e_hat;
    if (d_opt->count()) c.d_hat = d_hat;
    if (gate_opt->count()) c.mahalanobis_gate = gate;
    c.validate();
    return c;
  }
};

struct OptimizerFlags {
  std::string kernel = "none";
  double delta = kMonteCarloHuberDelta;
  int max_iterations = OptimizerConfig{}.max_iterations;

  void add_to(CLI::App& app, const std::string& default_kernel) {
    kernel = default_kernel;
    app.add_option("--kernel", kernel, "robust kernel: none or huber")
        ->check(CLI::IsMember({"none", "huber"}))
        ->capture_default_str();
    app.add_option("--huber-delta", delta, "Huber threshold in Mahalanobis units")->capture_default_str();
    app.add_option("--max-iterations", max_iterations)->capture_default_str();
  }

  OptimizerConfig config() const {
    OptimizerConfig c;
    c.max_iterations = max_iterations;
    if (kernel == "huber") c.kernel = RobustKernel::huber(delta);
    c.validate();
    return c;
  }
};

void print_summary(std::ostream& out, const std::string& name, const MetricResult& m) {
  out << name << " trans " << format_double(m.summary.trans_mean) << " +- " << format_double(m.summary.trans_sd)
      << " m, rot " << format_double(m.summary.rot_mean) << " +- " << format_double(m.summary.rot_sd) << " deg";
  if (m.mean_pair_distance) out << ", mean pair distance " << format_double(*m.mean_pair_distance) << " m";
  out << '\n';
}
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Replaces `--config FILE` by the flags listed in FILE (`key=value` lines,
// `#` comments). They go right after the subcommand name so that flags given
// on the command line, which come later, take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw UsageError("--config expects a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  std::string text;
  try {
    text = read_file(*path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> flags;
  std::istringstream lines(text);
  std::size_t number = 0;
  for (std::string line; std::getline(lines, line);) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(*path + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    flags.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, flags.begin(), flags.end());
  return args;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-graph pruning experiments", "pgp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  // Repeated options keep the last value, so command-line flags override the config file.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  // generate -----------------------------------------------------------------
  auto* generate = app.add_subcommand("generate", "Write a synthetic pose graph and its ground truth (.gt)");
  generate->require_subcommand(1);
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  bool gen_noise = false;
  std::vector<double> odom_sigma{kDefaultOdometrySigma.x, kDefaultOdometrySigma.y, kDefaultOdometrySigma.theta};
  std::vector<double> loop_sigma{kDefaultLoopSigma.x, kDefaultLoopSigma.y, kDefaultLoopSigma.theta};
  double corrupt_fraction = 0.0;
  auto add_common_generate = [&](CLI::App* cmd) {
    cmd->add_option("--out", gen_out, "output graph file, ground truth goes next to it (default: standard output)");
    cmd->add_option("--seed", gen_seed, "random seed")->capture_default_str();
    cmd->add_flag("--noise", gen_noise, "perturb measurements and re-initialize estimates by dead reckoning");
    cmd->add_option("--odom-sigma", odom_sigma, "odometry noise x,y,theta")->delimiter(',')->expected(3);
    cmd->add_option("--loop-sigma", loop_sigma, "loop closure noise x,y,theta")->delimiter(',')->expected(3);
    cmd->add_option("--corrupt", corrupt_fraction, "fraction of loop closures replaced by wrong matches")
        ->check(CLI::Range(0.0, 1.0));
  };
  GridSpec grid_spec;
  auto* gen_grid_cmd = generate->add_subcommand("grid", "Boustrophedon grid");
  gen_grid_cmd->add_option("--rows", grid_spec.rows)->required();
  gen_grid_cmd->add_option("--cols", grid_spec.cols)->required();
  gen_grid_cmd->add_option("--spacing", grid_spec.spacing)->required();
  gen_grid_cmd->add_option("--loop-radius-factor", grid_spec.loop_radius_factor)->capture_default_str();
  add_common_generate(gen_grid_cmd);
  TrajectorySpec traj_spec;
  auto* gen_random_cmd = generate->add_subcommand("random", "Random walk inside a box");
  gen_random_cmd->add_option("--steps", traj_spec.steps)->required();
  gen_random_cmd->add_option("--step-length", traj_spec.step_length)->capture_default_str();
  gen_random_cmd->add_option("--max-turn", traj_spec.max_turn)->capture_default_str();
  gen_random_cmd->add_option("--loop-radius", traj_spec.loop_radius)->capture_default_str();
  gen_random_cmd->add_option("--width", traj_spec.bounds.max_x)->capture_default_str();
  gen_random_cmd->add_option("--height", traj_spec.bounds.max_y)->capture_default_str();
  add_common_generate(gen_random_cmd);

  // prune --------------------------------------------------------------------
  auto* prune = app.add_subcommand("prune", "Vertex pruning followed by edge pruning");
  prune->add_option("--config", config_path, "key=value file with default flag values");
  std::string prune_in, prune_out, prune_log;
  std::string prune_method = "sid";
  bool skip_edges = false;
  PruneFlags prune_flags;
  prune->add_option("input", prune_in, "input graph")->required()->check(CLI::ExistingFile);
  prune->add_option("--out", prune_out, "pruned graph")->required();
  prune->add_option("--log", prune_log, "prune log (default: <out>.log)");
  prune->add_option("--method", prune_method, "marginalization: sid or chow_liu")
      ->check(CLI::IsMember({"sid", "chow_liu"}))
      ->capture_default_str();
  prune->add_flag("--no-edge-pruning", skip_edges, "only prune vertices");
  prune_flags.add_to(*prune);

  // optimize -----------------------------------------------------------------
  auto* opt = app.add_subcommand("optimize", "Levenberg-Marquardt optimization");
  opt->add_option("--config", config_path, "key=value file with default flag values");
  std::string opt_in, opt_out, opt_trace;
  OptimizerFlags opt_flags;
  opt->add_option("input", opt_in, "input graph")->required()->check(CLI::ExistingFile);
  opt->add_option("--out", opt_out, "optimized graph")->required();
  opt->add_option("--trace", opt_trace, "chi2 per accepted iteration");
  opt_flags.add_to(*opt, "none");

  // eval ---------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Compare a graph with a reference graph or ground-truth file");
  std::string eval_est, eval_ref;
  eval->add_option("estimate", eval_est, "estimated graph")->required()->check(CLI::ExistingFile);
  eval->add_option("reference", eval_ref, "reference graph or .gt file")->required()->check(CLI::ExistingFile);

  // montecarlo ---------------------------------------------------------------
  auto* mc = app.add_subcommand("montecarlo", "Corruption sweep over repeated noisy grids");
  mc->add_option("--config", config_path, "key=value file with default flag values");
  MonteCarloSpec mc_spec;
  std::string mc_fractions = "0,0.05,0.1,0.15,0.2";
  std::string mc_methods = "none,sid,chow_liu";
  std::string mc_out, mc_runs_out, mc_format = "csv";
  double mc_sigma = 1.0;
  PruneFlags mc_prune;
  OptimizerFlags mc_opt;
  mc->add_option("--runs", mc_spec.runs)->capture_default_str();
  mc->add_option("--fractions", mc_fractions, "comma separated corruption fractions")->capture_default_str();
  mc->add_option("--methods", mc_methods, "comma separated subset of none,sid,chow_liu")->capture_default_str();
  mc->add_option("--sigma", mc_sigma, "scale applied to the default noise sigmas")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  mc->add_option("--rows", mc_spec.grid.rows)->capture_default_str();
  mc->add_option("--cols", mc_spec.grid.cols)->capture_default_str();
  mc->add_option("--spacing", mc_spec.grid.spacing)->capture_default_str();
  mc->add_option("--seed", mc_spec.seed, "global seed")->capture_default_str();
  mc->add_option("--jobs", mc_spec.jobs, "parallel runs")->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--format", mc_format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
  mc->add_option("--out", mc_out, "quantile table (default: standard output)");
  mc->add_option("--runs-out", mc_runs_out, "per-run report");
  mc->add_flag("--timings", mc_spec.record_timings, "record wall-clock times in the per-run report");
  mc_prune.add_to(*mc);
  mc_opt.add_to(*mc, "huber");

  try {
    const std::vector<std::string> expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      SyntheticGraph s = gen_grid_cmd->parsed() ? gen_grid(grid_spec) : [&] {
        traj_spec.seed = gen_seed;
        return gen_random_trajectory(traj_spec);
      }();
      PoseGraph g = std::move(s.graph);
      if (gen_noise) {
        g = add_noise(std::move(g), {sigma_from(odom_sigma, "--odom-sigma"), sigma_from(loop_sigma, "--loop-sigma"),
                                     run_seed(gen_seed, 1)});
      }
      if (corrupt_fraction > 0.0) {
        double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
        bool first = true;
        for (const auto& [_, p] : s.truth) {
          min_x = first ? p.x : std::min(min_x, p.x);
          max_x = first ? p.x : std::max(max_x, p.x);
          min_y = first ? p.y : std::min(min_y, p.y);
          max_y = first ? p.y : std::max(max_y, p.y);
          first = false;
        }
        const CorruptionResult c = corrupt_loop_closures(std::move(g), {corrupt_fraction, run_seed(gen_seed, 2),
                                                                         {min_x, max_x, min_y, max_y}});
        if (c.warned_no_loops) err << "warning: graph has no loop closures to corrupt\n";
        g = c.graph;
      }
      if (gen_noise || corrupt_fraction > 0.0) g = dead_reckoning(std::move(g));
      if (gen_out.empty()) {
        out << serialize_graph(g);
        return kExitOk;
      }
      write_file(gen_out, serialize_graph(g));
      write_file(sidecar_path(gen_out), serialize_poses(s.truth));
      out << "wrote " << g.vertex_count() << " vertices and " << g.edge_count() << " edges to " << gen_out << '\n';
      return kExitOk;
    }

    if (prune->parsed()) {
      const std::string text = read_file(prune_in);
      PoseGraph g = parse_graph(text).graph;
      const std::string log_path = prune_log.empty() ? prune_out + ".log" : prune_log;
      out << "before: " << g.vertex_count() << " vertices, " << g.edge_count() << " edges\n";
      if (prune_flags.reference()) {
        write_file(prune_out, text);
        write_file(log_path, serialize_prune_log({}));
        out << "after: " << g.vertex_count() << " vertices, " << g.edge_count() << " edges\n";
        return kExitOk;
      }
      const PruningConfig cfg = prune_flags.config();
      PruneResult r = prune_vertices(std::move(g), cfg, parse_marginalization_method(prune_method));
      if (!skip_edges) {
        PruneResult e = prune_edges(std::move(r.graph), cfg);
        r.graph = std::move(e.graph);
        r.log.append(e.log);
      }
      write_file(prune_out, serialize_graph(r.graph));
      write_file(log_path, serialize_prune_log(r.log));
      out << "after: " << r.graph.vertex_count() << " vertices, " << r.graph.edge_count() << " edges\n";
      return kExitOk;
    }

    if (opt->parsed()) {
      PoseGraph g = parse_graph(read_file(opt_in)).graph;
      const OptimizeResult r = optimize(std::move(g), opt_flags.config());
      write_file(opt_out, serialize_graph(r.graph));
      std::ostringstream trace;
      for (std::size_t i = 0; i < r.stats.chi2.size(); ++i) trace << i << ' ' << format_double(r.stats.chi2[i]) << '\n';
      if (!opt_trace.empty()) write_file(opt_trace, trace.str());
      out << "iterations " << r.stats.iterations << ", chi2 " << format_double(r.stats.chi2.front()) << " -> "
          << format_double(r.stats.chi2.back()) << (r.stats.converged ? "" : " (not converged)") << '\n';
      return kExitOk;
    }

    if (eval->parsed()) {
      const PoseGraph g = parse_graph(read_file(eval_est)).graph;
      const auto reference = poses_of(parse_graph(read_file(eval_ref)).graph);
      const MetricResult me = map_error(g, reference);
      std::vector<Pose2> estimates, truth;
      for (VertexId id : g.ids_by_seq()) {
        estimates.push_back(g.vertex(id).pose);
        truth.push_back(reference.at(id));
      }
      print_summary(out, "TE ", trajectory_error(estimates, truth));
      print_summary(out, "ME ", me);
      if (g.vertex_count() >= 2) print_summary(out, "RME", relative_map_error(g, reference));
      return kExitOk;
    }

    if (mc->parsed()) {
      mc_spec.fractions.clear();
      for (const auto& f : split_list(mc_fractions)) {
        try {
          mc_spec.fractions.push_back(std::stod(f));
        } catch (const std::exception&) {
          throw UsageError("malformed fraction '" + f + "'");
        }
      }
      mc_spec.methods.clear();
      for (const auto& m : split_list(mc_methods)) mc_spec.methods.push_back(parse_eval_method(m));
      const bool prunes = std::any_of(mc_spec.methods.begin(), mc_spec.methods.end(),
                                      [](EvalMethod m) { return m != EvalMethod::none; });
      if (mc_prune.reference() && prunes) throw UsageError("p_reference disables pruning; use --methods none");
      if (!mc_prune.reference()) mc_spec.pruning = mc_prune.config();
      mc_spec.optimizer = mc_opt.config();
      auto scaled = [mc_sigma](Sigma3 s) { return Sigma3{s.x * mc_sigma, s.y * mc_sigma, s.theta * mc_sigma}; };
      mc_spec.odometry_sigma = scaled(kDefaultOdometrySigma);
      mc_spec.loop_sigma = scaled(kDefaultLoopSigma);
      const ReportFormat format = parse_report_format(mc_format);
      const MonteCarloResult r = run_monte_carlo(mc_spec);
      const std::string table = export_monte_carlo(r, format);
      if (mc_out.empty()) out << table;
      else write_file(mc_out, table);
      if (!mc_runs_out.empty()) write_file(mc_runs_out, export_report(r.report, format));
      err << "bookkeeping: sid runs " << r.audit.sid_runs << " (violations " << r.audit.sid_violations
          << "), chow_liu checks " << r.audit.chow_liu_checks << " (violations " << r.audit.chow_liu_violations
          << ")\n";
      return r.audit.sid_violations || r.audit.chow_liu_violations ? kExitData : kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace pgp
