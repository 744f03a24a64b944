#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hlamkit/driver.hpp"

namespace hlamkit {

enum class BenchMode { Weak, Strong };

// Weak mode scales the grid's z extent with the rank count (constant rows
// per rank); strong mode keeps the global grid fixed.
struct BenchSpec {
  BenchMode mode = BenchMode::Weak;
  GridSpec base_grid;
  std::vector<int> rank_counts;
  std::vector<Backend> backends;
  std::vector<Method> methods;
  int repetitions = 10;
  int workers = 0;       // per rank; 0 -> default_workers
  std::uint64_t seed = 0;  // recorded for provenance; generation is
                           // deterministic, so no randomness consumes it yet
  SolverConfig solver;  // epsilon etc.; method overwritten per cell
};

struct BenchSample {
  std::string method;
  std::string backend;
  int ranks = 0;
  int rep = 0;
  double seconds = 0.0;
  int iterations = 0;
  bool ok = true;
  std::string error;
};

struct BenchCell {
  std::string method;
  std::string backend;
  int ranks = 0;
  int valid_samples = 0;
  double median_seconds = 0.0;  // lower median for even sample counts
  double q1_seconds = 0.0;
  double q3_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
  double efficiency = 0.0;  // relative parallel efficiency
  bool valid = false;
};

// Reference cell for a method's curve: its classical counterpart on the
// Sequential backend at the smallest rank count of the sweep (the MPI-only
// classical analogue). Weak: E = T_ref / T; strong: E = T_ref * n_ref /
// (n * T).
struct EfficiencyTable {
  BenchMode mode = BenchMode::Weak;
  std::uint64_t seed = 0;
  std::vector<BenchSample> samples;
  std::vector<BenchCell> cells;
};

EfficiencyTable run_bench(const BenchSpec& spec);

// CSV columns: method,backend,ranks,rep,seconds,iterations (failed
// repetitions are omitted; cell validity lives in the summary).
void write_samples_csv(const EfficiencyTable& t, std::ostream& os);
// CSV columns: method,backend,ranks,samples,median_s,q1_s,q3_s,min_s,max_s,
// efficiency
void write_summary_csv(const EfficiencyTable& t, std::ostream& os);
std::string to_json(const EfficiencyTable& t);

// Lower median / nearest-rank quartiles on a sorted copy.
double lower_median(std::vector<double> v);
double quartile(std::vector<double> v, int which);  // which in {1,3}

}  // namespace hlamkit
