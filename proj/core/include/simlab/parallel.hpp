#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <vector>

namespace simlab {

/// Number of workers used by parallel loops. Reads SIMLAB_THREADS, falls back to
/// the hardware concurrency. A positive override takes precedence over both.
std::size_t worker_count();
void set_worker_count(std::size_t workers);

/// Runs body(i) for i in [0, count). Work is split into contiguous blocks;
/// results must be written to per-index slots so reductions stay ordered.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

}  // namespace simlab
