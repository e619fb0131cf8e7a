#include "ddinv/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <fmt/format.h>

namespace ddinv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SweepCell solve_cell(const SweepConfig& cfg, const PlatoonModel& model, Eigen::Index T,
                     double delta, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepCell cell{T, delta, seed, cell_data_seed(seed, T, cfg.nested), "", 0.0, 0.0, ""};
  try {
    const ExperimentData data = generate_platoon_data(model, T, delta, cell.data_seed, cfg.input_bound);
    const SynthesisResult r =
        synthesize_thm1(data, model.S, {model.D, delta}, std::nullopt, cfg.options);
    cell.status = to_string(r.status);
    cell.solve_seconds = r.diagnostics.solve_seconds;
    if (r.status != SynthesisStatus::kFeasible) cell.message = r.diagnostics.message;
  } catch (const std::exception& e) {
    cell.status = "error";
    cell.message = e.what();
  }
  cell.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

/// Runs `count` tasks on a pool of `jobs` threads.
template <class F>
void run_pool(std::size_t count, int jobs, F&& task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs))));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
}

}  // namespace

std::uint64_t cell_data_seed(std::uint64_t seed, Eigen::Index T, bool nested) {
  if (nested) return seed;
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(T)));
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (step <= 0.0 || stop < start) throw std::invalid_argument("make_grid: bad range");
  std::vector<double> g;
  for (long k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > stop + step * 1e-3) break;
    g.push_back(std::round(v * 1e12) / 1e12);
  }
  return g;
}

std::vector<SweepCell> run_sweep(const SweepConfig& config) {
  if (config.T_grid.empty() || config.delta_grid.empty() || config.seeds.empty()) {
    throw std::invalid_argument("run_sweep: T grid, delta grid and seeds must be nonempty");
  }
  std::vector<double> deltas = config.delta_grid;
  std::sort(deltas.begin(), deltas.end());
  const PlatoonModel model = make_platoon(config.platoon);
  std::vector<SweepCell> cells;

  if (!config.threshold_search) {
    struct Job { Eigen::Index T; std::uint64_t seed; double delta; };
    std::vector<Job> jobs;
    for (auto T : config.T_grid) {
      for (auto s : config.seeds) {
        for (double d : deltas) jobs.push_back({T, s, d});
      }
    }
    cells.resize(jobs.size());
    run_pool(jobs.size(), config.jobs, [&](std::size_t i) {
      cells[i] = solve_cell(config, model, jobs[i].T, jobs[i].delta, jobs[i].seed);
    });
    return cells;
  }

  // One bisection per (T, seed); the pool runs these chains concurrently.
  struct Chain { Eigen::Index T; std::uint64_t seed; };
  std::vector<Chain> chains;
  for (auto T : config.T_grid) {
    for (auto s : config.seeds) chains.push_back({T, s});
  }
  std::vector<std::vector<SweepCell>> per_chain(chains.size());
  run_pool(chains.size(), config.jobs, [&](std::size_t c) {
    long lo = -1, hi = static_cast<long>(deltas.size());
    while (hi - lo > 1) {
      const long mid = (lo + hi) / 2;
      SweepCell cell = solve_cell(config, model, chains[c].T, deltas[static_cast<std::size_t>(mid)],
                                  chains[c].seed);
      const bool feasible = cell.status == "feasible";
      per_chain[c].push_back(std::move(cell));
      (feasible ? lo : hi) = mid;
    }
  });
  for (auto& pc : per_chain) {
    std::sort(pc.begin(), pc.end(), [](const SweepCell& a, const SweepCell& b) { return a.delta < b.delta; });
    std::move(pc.begin(), pc.end(), std::back_inserter(cells));
  }
  return cells;
}

double max_feasible_delta(const std::vector<SweepCell>& cells, Eigen::Index T, std::uint64_t seed) {
  double best = -1.0;
  for (const auto& c : cells) {
    if (c.T == T && c.seed == seed && c.status == "feasible") best = std::max(best, c.delta);
  }
  return best;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepCell>& cells) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
  out << "T,delta,seed,status,solve_seconds,data_seed,total_seconds,message\n";
  for (const auto& c : cells) {
    std::string msg = c.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << fmt::format("{},{},{},{},{:.6f},{},{:.6f},{}\n", c.T, c.delta, c.seed, c.status,
                       c.solve_seconds, c.data_seed, c.total_seconds, msg);
  }
}

}  // namespace ddinv
