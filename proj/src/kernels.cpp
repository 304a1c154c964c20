#include "loadpat/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace loadpat::kernels {

namespace {

inline void nearest_one(const double* x, std::span<const double> centroids, std::size_t dim, int& label,
                        double& best) {
  const std::size_t k = centroids.size() / dim;
  best = std::numeric_limits<double>::infinity();
  label = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double* m = centroids.data() + c * dim;
    double d = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = x[j] - m[j];
      d += diff * diff;
    }
    if (d < best) {
      best = d;
      label = static_cast<int>(c);
    }
  }
}

inline double merit_of(std::uint64_t mask, std::span<const double> target_su, std::span<const double> su,
                       std::size_t n) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mask >> i & 1U)) continue;
    num += target_su[i];
    for (std::size_t j = 0; j < n; ++j)
      if (mask >> j & 1U) den += su[i * n + j];
  }
  return den > 0.0 ? num / std::sqrt(den) : 0.0;
}

}  // namespace

void assign_nearest_serial(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                           std::span<int> labels, std::span<double> dist2) {
  const std::size_t n = points.size() / dim;
  for (std::size_t i = 0; i < n; ++i) nearest_one(points.data() + i * dim, centroids, dim, labels[i], dist2[i]);
}

void assign_nearest_omp(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                        std::span<int> labels, std::span<double> dist2) {
  const auto n = static_cast<std::int64_t>(points.size() / dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) nearest_one(points.data() + i * dim, centroids, dim, labels[i], dist2[i]);
}

std::vector<double> subset_merits_serial(std::span<const double> target_su, std::span<const double> su,
                                         std::size_t n) {
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> merits(total, 0.0);
  for (std::uint64_t mask = 1; mask < total; ++mask) merits[mask] = merit_of(mask, target_su, su, n);
  return merits;
}

std::vector<double> subset_merits_omp(std::span<const double> target_su, std::span<const double> su,
                                      std::size_t n) {
  const auto total = static_cast<std::int64_t>(std::uint64_t{1} << n);
  std::vector<double> merits(static_cast<std::size_t>(total), 0.0);
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::int64_t mask = 1; mask < total; ++mask)
    merits[mask] = merit_of(static_cast<std::uint64_t>(mask), target_su, su, n);
  return merits;
}

}  // namespace loadpat::kernels
