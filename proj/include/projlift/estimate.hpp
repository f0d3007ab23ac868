#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace projlift {

/// A growth-rate statistic in nats per step. std_error is the sample standard
/// deviation across independent repetitions divided by sqrt(repetitions).
struct GrowthEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t horizon = 1;
  int repetitions = 1;
};

inline GrowthEstimate estimate_from_samples(std::span<const double> samples, std::int64_t horizon) {
  GrowthEstimate e;
  e.horizon = horizon;
  e.repetitions = static_cast<int>(samples.size());
  if (samples.empty()) return e;
  // Summation in index order keeps results independent of thread scheduling.
  long double sum = 0.0L;
  for (double s : samples) sum += s;
  const long double mean = sum / static_cast<long double>(samples.size());
  e.value = static_cast<double>(mean);
  if (samples.size() >= 2) {
    long double ss = 0.0L;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const long double var = ss / static_cast<long double>(samples.size() - 1);
    e.std_error = static_cast<double>(std::sqrt(var / static_cast<long double>(samples.size())));
  }
  return e;
}

/// sqrt(a^2 + b^2) of two standard errors.
inline double combined_error(double a, double b) { return std::hypot(a, b); }
inline double combined_error(const GrowthEstimate& a, const GrowthEstimate& b) {
  return combined_error(a.std_error, b.std_error);
}

}  // namespace projlift
