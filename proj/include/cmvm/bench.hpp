#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmvm/cse.hpp"
#include "cmvm/matrix.hpp"

namespace cmvm {

/// m x m matrix with entries drawn uniformly from [2^(bw-1) + 1, 2^bw - 1],
/// deterministic in `seed`.
Matrix random_matrix(int m, int bw, std::uint64_t seed);

/// Seed of trial `trial` at matrix size `size` within a suite seeded `seed`.
std::uint64_t trial_seed(std::uint64_t seed, int size, int trial);

struct TrialRecord {
  int size = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  int adders = 0;
  int depth = 0;
  std::int64_t cost = 0;
  double ms = 0.0;
};

struct SuiteRow {
  int size = 0;
  int trials = 0;
  double mean_step = 0.0;
  double mean_adders = 0.0;
  double sd_adders = 0.0;
  double mean_ms = 0.0;
};

struct SuiteResult {
  int bw = 8;
  int dc = -1;
  std::vector<SuiteRow> rows;
  std::vector<TrialRecord> records;  ///< ordered by (size, trial)

  std::string csv() const;
  std::string json() const;
};

struct SuiteOptions {
  int workers = 1;  ///< trials solved concurrently; each solve stays serial
  Weighting weighting = Weighting::weighted;
  BitWidthSpec input{true, 8, 8};
};

/// Solves `trials` random matrices per size and reports means. Adder and depth
/// statistics do not depend on `workers`.
SuiteResult run_suite(const std::vector<int>& sizes, int bw, int dc, int trials, std::uint64_t seed,
                      const SuiteOptions& options = {});

struct ScalingPoint {
  int size = 0;
  double n = 0.0;  ///< m^2 * bw
  double mean_ms = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double slope = 0.0;  ///< least-squares slope of log(ms) against log(n)
  int fit_min_size = 8;
};

/// Runtime of solve alone per size; sizes below `fit_min_size` are measured
/// but left out of the fit.
ScalingResult scaling_study(const std::vector<int>& sizes, int bw, int dc, int trials, std::uint64_t seed,
                            int fit_min_size = 8);

} // namespace cmvm
