#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pgp/errors.hpp"
#include "pgp/eval.hpp"

namespace pgp {

std::string_view to_string(EvalMethod method) {
  switch (method) {
    case EvalMethod::none: return "none";
    case EvalMethod::sid: return "sid";
    case EvalMethod::chow_liu: return "chow_liu";
  }
  return "none";
}

EvalMethod parse_eval_method(std::string_view name) {
  if (name == "none") return EvalMethod::none;
  if (name == "sid") return EvalMethod::sid;
  if (name == "chow_liu") return EvalMethod::chow_liu;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

const MonteCarloCell& MonteCarloResult::cell(EvalMethod method, double fraction) const {
  for (const auto& c : cells) {
    if (c.method == method && c.fraction == fraction) return c;
  }
  throw std::out_of_range("no Monte Carlo cell for " + std::string(to_string(method)) + " at fraction " +
                          format_double(fraction));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct MethodOutcome {
  double error = kInf;
  RunRecord record;
};

struct TaskOutcome {
  std::vector<MethodOutcome> methods;  // in spec.methods order
  BookkeepingAudit audit;
};

// Mean position error of the surviving vertices, +inf for a failed estimate.
double position_error(const PoseGraph& g, const GroundTruth& truth, RunRecord& rec) {
  rec.me = map_error(g, truth).summary;
  if (g.vertex_count() >= 2) rec.rme = relative_map_error(g, truth).summary;
  return std::isfinite(rec.me.trans_mean) ? rec.me.trans_mean : kInf;
}

MetricSummary not_measured() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan, nan};
}

struct Stopwatch {
  bool enabled;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed() const { return enabled ? seconds_since(start) : 0.0; }
};

TaskOutcome run_task(const MonteCarloSpec& spec, const SyntheticGraph& grid, std::uint64_t seed, double fraction) {
  TaskOutcome out;
  const PoseGraph noisy = add_noise(grid.graph, {spec.odometry_sigma, spec.loop_sigma, splitmix64(seed ^ 0x1)});
  const CorruptionResult corrupted =
      corrupt_loop_closures(noisy, {fraction, splitmix64(seed ^ 0x2), grid_arena(spec.grid)});
  const PoseGraph initial = dead_reckoning(corrupted.graph);

  std::optional<PoseGraph> baseline;
  double baseline_seconds = 0.0;
  try {
    const Stopwatch watch{spec.record_timings};
    OptimizeResult r = optimize(initial, spec.optimizer);
    baseline_seconds = watch.elapsed();
    baseline = std::move(r.graph);
  } catch (const OptimizerError&) {
  }

  for (EvalMethod method : spec.methods) {
    MethodOutcome m;
    RunRecord& rec = m.record;
    rec.config = spec.config_name;
    rec.seed = seed;
    rec.corruption_fraction = fraction;
    rec.method = std::string(to_string(method));
    rec.te = not_measured();
    rec.me = not_measured();
    rec.rme = not_measured();
    rec.vertices_before = initial.vertex_count();
    rec.edges_before = initial.edge_count();
    rec.vertices_after = rec.vertices_before;
    rec.edges_after = rec.edges_before;

    if (method == EvalMethod::none) {
      rec.optimize_seconds = baseline_seconds;
      if (baseline) m.error = position_error(*baseline, grid.truth, rec);
      out.methods.push_back(std::move(m));
      continue;
    }

    // Densities are evaluated at the best available estimate.
    const PoseGraph& start = baseline ? *baseline : initial;
    const auto marginalization =
        method == EvalMethod::sid ? MarginalizationMethod::sid : MarginalizationMethod::chow_liu;
    MarginalizationObserver observer;
    if (method == EvalMethod::chow_liu) {
      observer = [&out](const PoseGraph& g, VertexId v) {
        std::size_t corrupted_spokes = 0;
        const auto spokes = g.neighbors(v);
        for (VertexId u : spokes) {
          const auto between_edges = g.edges_between(v, u);
          if (std::any_of(between_edges.begin(), between_edges.end(),
                          [&g](EdgeId e) { return g.edge(e).is_corrupted(); })) {
            ++corrupted_spokes;
          }
        }
        if (corrupted_spokes != 1) return;
        const auto candidates = chow_liu_candidates(g, v);
        const auto corrupted_candidates = std::count_if(
            candidates.begin(), candidates.end(), [](const ChowLiuCandidate& c) { return c.edge.is_corrupted(); });
        ++out.audit.chow_liu_checks;
        if (static_cast<std::size_t>(corrupted_candidates) != spokes.size() - 1) ++out.audit.chow_liu_violations;
      };
    }

    const Stopwatch prune_watch{spec.record_timings};
    PruneResult pruned = prune_vertices(start, spec.pruning, marginalization, observer);
    rec.prune_seconds = prune_watch.elapsed();
    rec.vertices_after = pruned.graph.vertex_count();
    rec.edges_after = pruned.graph.edge_count();

    if (method == EvalMethod::sid) {
      ++out.audit.sid_runs;
      if (pruned.graph.count_corrupted(EdgeKind::loop_closure) > start.count_corrupted(EdgeKind::loop_closure)) {
        ++out.audit.sid_violations;
      }
    }

    try {
      const Stopwatch watch{spec.record_timings};
      OptimizeResult r = optimize(std::move(pruned.graph), spec.optimizer);
      rec.optimize_seconds = watch.elapsed();
      m.error = position_error(r.graph, grid.truth, rec);
    } catch (const OptimizerError&) {
      m.error = kInf;
    }
    out.methods.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::uint64_t run_seed(std::uint64_t global_seed, std::uint64_t index) {
  return splitmix64(splitmix64(global_seed) + index);
}

void MonteCarloSpec::validate() const {
  grid.validate();
  pruning.validate();
  optimizer.validate();
  if (runs < 1) throw std::invalid_argument("Monte Carlo needs at least one run");
  if (fractions.empty()) throw std::invalid_argument("Monte Carlo needs at least one corruption fraction");
  if (methods.empty()) throw std::invalid_argument("Monte Carlo needs at least one method");
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("corruption fractions must lie in [0, 1]");
  }
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

MonteCarloResult run_monte_carlo(const MonteCarloSpec& spec) {
  spec.validate();
  const SyntheticGraph grid = gen_grid(spec.grid);

  MonteCarloResult result;
  for (std::size_t r = 0; r < spec.runs; ++r) result.seeds.push_back(run_seed(spec.seed, r));

  const std::size_t tasks = spec.runs * spec.fractions.size();
  std::vector<TaskOutcome> outcomes(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t; (t = next++) < tasks;) {
      try {
        outcomes[t] = run_task(spec, grid, result.seeds[t / spec.fractions.size()],
                               spec.fractions[t % spec.fractions.size()]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(spec.jobs, tasks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Deterministic reduction: runs in seed order, fractions and methods in spec order.
  for (std::size_t k = 0; k < spec.methods.size(); ++k) {
    for (std::size_t f = 0; f < spec.fractions.size(); ++f) {
      MonteCarloCell cell;
      cell.method = spec.methods[k];
      cell.fraction = spec.fractions[f];
      for (std::size_t r = 0; r < spec.runs; ++r) {
        cell.errors.push_back(outcomes[r * spec.fractions.size() + f].methods[k].error);
      }
      cell.q25 = quantile(cell.errors, 0.25);
      cell.median = quantile(cell.errors, 0.5);
      cell.q75 = quantile(cell.errors, 0.75);
      result.cells.push_back(std::move(cell));
    }
  }
  for (const auto& o : outcomes) {
    for (const auto& m : o.methods) result.report.runs.push_back(m.record);
    result.audit.sid_runs += o.audit.sid_runs;
    result.audit.sid_violations += o.audit.sid_violations;
    result.audit.chow_liu_checks += o.audit.chow_liu_checks;
    result.audit.chow_liu_violations += o.audit.chow_liu_violations;
  }
  return result;
}

std::string export_monte_carlo(const MonteCarloResult& result, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << "method,corruption_fraction,runs,q25,median,q75\n";
    for (const auto& c : result.cells) {
      out << to_string(c.method) << ',' << format_double(c.fraction) << ',' << c.errors.size() << ','
          << format_double(c.q25) << ',' << format_double(c.median) << ',' << format_double(c.q75) << '\n';
    }
    return out.str();
  }
  auto number = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return format_double(v);
  };
  for (const auto& c : result.cells) {
    nlohmann::ordered_json j;
    j["method"] = to_string(c.method);
    j["corruption_fraction"] = number(c.fraction);
    j["runs"] = c.errors.size();
    j["q25"] = number(c.q25);
    j["median"] = number(c.median);
    j["q75"] = number(c.q75);
    j["seeds"] = result.seeds;
    auto errors = nlohmann::ordered_json::array();
    for (double e : c.errors) errors.push_back(number(e));
    j["errors"] = std::move(errors);
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace pgp
