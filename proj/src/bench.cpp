#include "cmvm/bench.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cmvm/verify.hpp"
#include "json.hpp"

namespace cmvm {

Matrix random_matrix(int m, int bw, std::uint64_t seed) {
  if (m < 1 || bw < 2 || bw > 62) throw std::invalid_argument("random_matrix: need m >= 1 and 2 <= bw <= 62");
  const std::int64_t lo = (std::int64_t(1) << (bw - 1)) + 1;
  const std::uint64_t span = (std::uint64_t(1) << (bw - 1)) - 1;  // hi - lo + 1
  SplitMix64 rng(seed);
  Matrix out(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const auto k = static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng.next()) * span) >> 64);
      out(r, c) = Dyadic(lo + std::int64_t(k));
    }
  return out;
}

std::uint64_t trial_seed(std::uint64_t seed, int size, int trial) {
  SplitMix64 rng(seed ^ (std::uint64_t(size) << 32) ^ std::uint64_t(trial));
  return rng.next();
}

SuiteResult run_suite(const std::vector<int>& sizes, int bw, int dc, int trials, std::uint64_t seed,
                      const SuiteOptions& options) {
  if (trials < 1) throw std::invalid_argument("run_suite: trials must be >= 1");
  SuiteResult res;
  res.bw = bw;
  res.dc = dc;
  for (int size : sizes)
    for (int t = 0; t < trials; ++t) res.records.push_back({size, t, trial_seed(seed, size, t), 0, 0, 0, 0.0});

  SolveOptions so;
  so.dc = dc;
  so.weighting = options.weighting;
  const int n = static_cast<int>(res.records.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.workers))
  for (int i = 0; i < n; ++i) {
    TrialRecord& r = res.records[i];
    const Solution s = solve(random_matrix(r.size, bw, r.seed), options.input, so);
    r.adders = s.stats.adders;
    r.depth = s.stats.depth;
    r.cost = s.stats.cost;
    r.ms = s.elapsed_ms;
  }

  for (std::size_t k = 0; k < sizes.size(); ++k) {
    SuiteRow row;
    row.size = sizes[k];
    row.trials = trials;
    double sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      const TrialRecord& r = res.records[k * trials + t];
      row.mean_step += r.depth;
      row.mean_adders += r.adders;
      row.mean_ms += r.ms;
      sq += double(r.adders) * r.adders;
    }
    row.mean_step /= trials;
    row.mean_adders /= trials;
    row.mean_ms /= trials;
    row.sd_adders = trials > 1 ? std::sqrt(std::max(0.0, (sq - trials * row.mean_adders * row.mean_adders) / (trials - 1))) : 0.0;
    res.rows.push_back(row);
  }
  return res;
}

std::string SuiteResult::csv() const {
  std::ostringstream os;
  os << "size,trial,seed,bw,dc,adders,depth,cost,ms\n";
  for (const auto& r : records)
    os << r.size << "," << r.trial << "," << r.seed << "," << bw << "," << dc << "," << r.adders << "," << r.depth
       << "," << r.cost << "," << r.ms << "\n";
  return os.str();
}

std::string SuiteResult::json() const {
  nlohmann::ordered_json j;
  j["bw"] = bw;
  j["dc"] = dc;
  j["summary"] = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    j["summary"].push_back({{"size", r.size},
                            {"trials", r.trials},
                            {"mean_step", r.mean_step},
                            {"mean_adders", r.mean_adders},
                            {"sd_adders", r.sd_adders},
                            {"mean_ms", r.mean_ms}});
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& r : records)
    j["trials"].push_back({{"size", r.size},
                           {"trial", r.trial},
                           {"seed", r.seed},
                           {"adders", r.adders},
                           {"depth", r.depth},
                           {"cost", r.cost},
                           {"ms", r.ms}});
  return j.dump(2) + "\n";
}

ScalingResult scaling_study(const std::vector<int>& sizes, int bw, int dc, int trials, std::uint64_t seed,
                            int fit_min_size) {
  ScalingResult out;
  out.fit_min_size = fit_min_size;
  const SuiteResult suite = run_suite(sizes, bw, dc, trials, seed);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& row : suite.rows) {
    const double n = double(row.size) * row.size * bw;
    out.points.push_back({row.size, n, row.mean_ms});
    if (row.size < fit_min_size || row.mean_ms <= 0) continue;
    const double x = std::log(n), y = std::log(row.mean_ms);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  if (k >= 2) out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return out;
}

} // namespace cmvm
