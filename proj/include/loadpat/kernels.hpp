#pragma once

// Data-parallel inner loops. Each kernel has a serial reference used by the
// tests and an OpenMP variant that must produce bit-identical output.

#include <cstddef>
#include <span>
#include <vector>

namespace loadpat::kernels {

/// For each row of `points` (n x dim, row-major) find the nearest of the
/// `centroids` (k x dim). Ties go to the lowest centroid index.
void assign_nearest_serial(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                           std::span<int> labels, std::span<double> dist2);

void assign_nearest_omp(std::span<const double> points, std::span<const double> centroids, std::size_t dim,
                        std::span<int> labels, std::span<double> dist2);

/// Subset merit for every bitmask over n features (entry 0 is unused and 0):
///   sum_{i in S} target_su[i] / sqrt(sum_{i,j in S} su[i*n + j]).
std::vector<double> subset_merits_serial(std::span<const double> target_su, std::span<const double> su,
                                         std::size_t n);

std::vector<double> subset_merits_omp(std::span<const double> target_su, std::span<const double> su,
                                      std::size_t n);

}  // namespace loadpat::kernels
