#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadpat/ingest.hpp"

namespace loadpat {

/// Dense row-major point set.
struct PointMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  void push_back(std::span<const double> p);

  static PointMatrix from_profiles(std::span<const NormalizedProfile> profiles);
};

struct KMeansOptions {
  int k = 2;
  std::uint64_t seed = 0;
  int restarts = 25;
  int max_iters = 300;
  double tol = 1e-6;
  bool parallel = true;
};

struct ClusterModel {
  std::string day_type;  // free-form tag, "workday" / "weekend" in the pipeline
  int k = 0;
  std::size_t dim = 0;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  int restarts = 0;
  int iterations = 0;                 // Lloyd iterations of the winning run
  std::vector<double> inertia_trace;  // winning run, after each assignment step or transfer pass
};

/// Lloyd iterations from k-means++ seeding, then Hartigan single-point
/// transfers; best of `restarts` runs.
/// Throws Error{TooFewPoints} when there are fewer points than clusters.
ClusterModel kmeans(const PointMatrix& points, const KMeansOptions& opts);

/// Single seeded run: k-means++, Lloyd, then Hartigan transfers.
ClusterModel kmeans_single_run(const PointMatrix& points, int k, std::uint64_t seed, int max_iters, double tol,
                               bool parallel);

double inertia(const ClusterModel& model, const PointMatrix& points);

/// Nearest centroid, lowest index on ties.
int assign(std::span<const double> point, const ClusterModel& model);

struct KneeCurve {
  std::vector<int> k_values;
  std::vector<double> inertias;   // best-of-restarts D(K)
  std::vector<double> repaired;   // running minimum of inertias
  std::vector<double> difference; // normalized distance below the diagonal
  int k_star = 0;
  bool no_knee = false;  // set when the fallback to k_min was taken
};

struct KneeOptions {
  int k_min = 2;
  int k_max = 15;
  std::uint64_t seed = 0;
  int restarts = 25;
  int max_iters = 300;
  double tol = 1e-6;
  bool parallel = true;
};

/// Index of the knee of a decreasing curve (Kneedle without smoothing), or
/// nullopt if the curve never dips below the chord joining its ends.
std::optional<std::size_t> kneedle_decreasing(std::span<const double> x, std::span<const double> y,
                                              std::vector<double>* difference = nullptr);

/// Seed used for the K-cluster fit inside select_k.
std::uint64_t knee_seed_for(std::uint64_t seed, int k);

KneeCurve select_k(const PointMatrix& points, const KneeOptions& opts);

struct PatternShares {
  std::string consumer_id;
  std::string day_type;
  std::vector<int> counts;
  std::vector<double> shares;
  std::size_t n_days = 0;

  int dominant() const;
};

/// Share of each consumer's days falling in each cluster, one entry per
/// distinct consumer id (sorted).
std::vector<PatternShares> pattern_shares(const ClusterModel& model, std::span<const NormalizedProfile> profiles);

/// As above but for an explicit consumer list, in that order. Throws
/// Error{NoProfilesForConsumer} if any listed consumer has no profile.
std::vector<PatternShares> pattern_shares(const ClusterModel& model, std::span<const NormalizedProfile> profiles,
                                          std::span<const std::string> consumers);

}  // namespace loadpat
