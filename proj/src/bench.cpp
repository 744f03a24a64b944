#include "hlamkit/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hlamkit/errors.hpp"

namespace hlamkit {

double lower_median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];  // lower median for even counts
}

double quartile(std::vector<double> v, int which) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  // Nearest-rank on the sorted sample: rank = ceil(q * n).
  const double q = which == 1 ? 0.25 : 0.75;
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

GridSpec cell_grid(const BenchSpec& spec, int ranks) {
  GridSpec g = spec.base_grid;
  if (spec.mode == BenchMode::Weak) g.nz *= ranks;  // constant rows per rank
  return g;
}

struct CellKey {
  std::string method, backend;
  int ranks;
  bool operator<(const CellKey& o) const {
    return std::tie(method, backend, ranks) <
           std::tie(o.method, o.backend, o.ranks);
  }
};

}  // namespace

EfficiencyTable run_bench(const BenchSpec& spec) {
  if (spec.repetitions < 1) throw SetupError("repetitions must be >= 1");
  if (spec.rank_counts.empty() || spec.methods.empty() ||
      spec.backends.empty())
    throw SetupError("bench sweep is empty");

  EfficiencyTable table;
  table.mode = spec.mode;
  table.seed = spec.seed;

  // Generated systems cached per grid; cells run serially to avoid timing
  // interference.
  std::map<std::string, LinearSystem> systems;
  auto system_for = [&](const GridSpec& g) -> const LinearSystem& {
    std::ostringstream key;
    key << g.nx << 'x' << g.ny << 'x' << g.nz << ':' << stencil_name(g.stencil);
    auto it = systems.find(key.str());
    if (it == systems.end())
      it = systems.emplace(key.str(), generate(g)).first;
    return it->second;
  };

  std::map<CellKey, std::vector<double>> times;
  std::map<CellKey, int> valid_counts;

  for (Method m : spec.methods) {
    for (Backend b : spec.backends) {
      for (int ranks : spec.rank_counts) {
        const GridSpec g = cell_grid(spec, ranks);
        const CellKey key{method_name(m), backend_name(b), ranks};
        for (int rep = 0; rep < spec.repetitions; ++rep) {
          BenchSample sample;
          sample.method = key.method;
          sample.backend = key.backend;
          sample.ranks = ranks;
          sample.rep = rep;
          try {
            SolverConfig cfg = spec.solver;
            cfg.method = m;
            const int workers =
                spec.workers > 0 ? spec.workers : default_workers(ranks);
            SolveOutcome out =
                run_solve(system_for(g), g, cfg, b, ranks, workers);
            if (!out.report.converged)
              throw BreakdownError("solve did not converge");
            sample.seconds = out.report.wall_seconds;
            sample.iterations = out.report.iterations;
            times[key].push_back(sample.seconds);
            ++valid_counts[key];
          } catch (const Error& e) {
            // A failed solve invalidates the sample, not the sweep.
            sample.ok = false;
            sample.error = e.what();
          }
          table.samples.push_back(std::move(sample));
        }
      }
    }
  }

  const int ref_ranks =
      *std::min_element(spec.rank_counts.begin(), spec.rank_counts.end());
  auto ref_median_for = [&](Method m) -> double {
    const CellKey ref{method_name(classical_counterpart(m)),
                      backend_name(Backend::Sequential), ref_ranks};
    auto it = times.find(ref);
    if (it == times.end() || it->second.empty()) return 0.0;
    return lower_median(it->second);
  };

  for (Method m : spec.methods) {
    for (Backend b : spec.backends) {
      for (int ranks : spec.rank_counts) {
        const CellKey key{method_name(m), backend_name(b), ranks};
        BenchCell cell;
        cell.method = key.method;
        cell.backend = key.backend;
        cell.ranks = ranks;
        const auto it = times.find(key);
        if (it != times.end() && !it->second.empty()) {
          cell.valid = true;
          cell.valid_samples = valid_counts[key];
          cell.median_seconds = lower_median(it->second);
          cell.q1_seconds = quartile(it->second, 1);
          cell.q3_seconds = quartile(it->second, 3);
          cell.min_seconds = *std::min_element(it->second.begin(),
                                               it->second.end());
          cell.max_seconds = *std::max_element(it->second.begin(),
                                               it->second.end());
          const double ref = ref_median_for(m);
          if (ref > 0.0 && cell.median_seconds > 0.0) {
            if (spec.mode == BenchMode::Weak) {
              cell.efficiency = ref / cell.median_seconds;
            } else {
              cell.efficiency = ref * ref_ranks /
                                (static_cast<double>(ranks) *
                                 cell.median_seconds);
            }
          }
        }
        table.cells.push_back(std::move(cell));
      }
    }
  }
  return table;
}

void write_samples_csv(const EfficiencyTable& t, std::ostream& os) {
  os << "method,backend,ranks,rep,seconds,iterations\n";
  for (const BenchSample& s : t.samples) {
    if (!s.ok) continue;
    os << s.method << ',' << s.backend << ',' << s.ranks << ',' << s.rep << ','
       << s.seconds << ',' << s.iterations << '\n';
  }
}

void write_summary_csv(const EfficiencyTable& t, std::ostream& os) {
  os << "method,backend,ranks,samples,median_s,q1_s,q3_s,min_s,max_s,"
        "efficiency\n";
  for (const BenchCell& c : t.cells) {
    if (!c.valid) {
      os << c.method << ',' << c.backend << ',' << c.ranks
         << ",0,,,,,,invalid\n";
      continue;
    }
    os << c.method << ',' << c.backend << ',' << c.ranks << ','
       << c.valid_samples << ',' << c.median_seconds << ',' << c.q1_seconds
       << ',' << c.q3_seconds << ',' << c.min_seconds << ',' << c.max_seconds
       << ',' << c.efficiency << '\n';
  }
}

std::string to_json(const EfficiencyTable& t) {
  nlohmann::json j;
  j["mode"] = t.mode == BenchMode::Weak ? "weak" : "strong";
  j["seed"] = t.seed;
  nlohmann::json samples = nlohmann::json::array();
  for (const BenchSample& s : t.samples)
    samples.push_back({{"method", s.method},
                       {"backend", s.backend},
                       {"ranks", s.ranks},
                       {"rep", s.rep},
                       {"seconds", s.seconds},
                       {"iterations", s.iterations},
                       {"ok", s.ok},
                       {"error", s.error}});
  j["samples"] = samples;
  nlohmann::json cells = nlohmann::json::array();
  for (const BenchCell& c : t.cells)
    cells.push_back({{"method", c.method},
                     {"backend", c.backend},
                     {"ranks", c.ranks},
                     {"valid", c.valid},
                     {"samples", c.valid_samples},
                     {"median_s", c.median_seconds},
                     {"q1_s", c.q1_seconds},
                     {"q3_s", c.q3_seconds},
                     {"min_s", c.min_seconds},
                     {"max_s", c.max_seconds},
                     {"efficiency", c.efficiency}});
  j["cells"] = cells;
  return j.dump(2);
}

}  // namespace hlamkit
