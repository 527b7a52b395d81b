#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmvm/graph.hpp"
#include "cmvm/matrix.hpp"

namespace cmvm {

/// Raised by check_exhaustive when the input space exceeds the limit.
class SpaceTooLarge : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exact y^T = x^T M. Throws std::invalid_argument on a length mismatch.
std::vector<Dyadic> oracle(const Matrix& m, std::span<const Dyadic> x);

/// SplitMix64. Trial t of check_random draws its inputs from the stream
/// seeded with `seed + (t + 1) * 0x9E3779B97F4A7C15`, one 64-bit draw per
/// input, mapped to a grid index by (draw * count) >> 64.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();

private:
  std::uint64_t state_;
};

struct Mismatch {
  std::uint64_t index = 0;  ///< vector number in enumeration or trial order
  std::vector<Dyadic> x;
  std::vector<Dyadic> expected;
  std::vector<Dyadic> got;
};

struct Report {
  std::string mode;  ///< "exhaustive" or "random"
  std::uint64_t vectors = 0;
  std::optional<Mismatch> mismatch;  ///< first one by vector index
  std::vector<int> interval_violations;  ///< nodes whose value left their QInterval
  std::vector<Dyadic> observed_low;  ///< per node, over all vectors
  std::vector<Dyadic> observed_high;

  bool equivalent() const { return !mismatch && interval_violations.empty(); }
  std::string text() const;
  std::string json() const;
};

struct VerifyOptions {
  std::uint64_t limit = std::uint64_t(1) << 20;  ///< exhaustive space cap
  bool parallel = false;
};

/// Every input vector on the grid of the graph's declared input intervals.
/// Throws SpaceTooLarge when the grid has more than `limit` points.
Report check_exhaustive(const AdderGraph& g, const Matrix& m, const VerifyOptions& options = {});

/// `trials` pseudo-random grid vectors; deterministic in `seed` and
/// independent of `parallel`.
Report check_random(const AdderGraph& g, const Matrix& m, std::uint64_t trials, std::uint64_t seed,
                    const VerifyOptions& options = {});

/// Number of grid points of the graph's input space, saturating at 2^64 - 1.
std::uint64_t input_space_size(const AdderGraph& g);

/// Output indices whose node's observed range equals its QInterval endpoints.
std::vector<int> tight_outputs(const AdderGraph& g, const Report& r);

} // namespace cmvm
