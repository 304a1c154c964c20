#include "loadpat/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "loadpat/error.hpp"
#include "loadpat/kernels.hpp"
#include "loadpat/rng.hpp"

namespace loadpat {

void PointMatrix::push_back(std::span<const double> p) {
  if (dim == 0) dim = p.size();
  if (p.size() != dim) throw Error(ErrorCode::ShapeMismatch, "point dimension mismatch");
  data.insert(data.end(), p.begin(), p.end());
}

PointMatrix PointMatrix::from_profiles(std::span<const NormalizedProfile> profiles) {
  PointMatrix m;
  m.dim = kHoursPerDay;
  m.data.reserve(profiles.size() * kHoursPerDay);
  for (const auto& p : profiles) m.data.insert(m.data.end(), p.values.begin(), p.values.end());
  return m;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

void assign_all(const PointMatrix& points, const std::vector<double>& centroids, std::vector<int>& labels,
                std::vector<double>& dist2, bool parallel) {
  if (parallel)
    kernels::assign_nearest_omp(points.data, centroids, points.dim, labels, dist2);
  else
    kernels::assign_nearest_serial(points.data, centroids, points.dim, labels, dist2);
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

std::vector<double> kmeanspp_seed(const PointMatrix& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.dim;
  std::vector<double> centroids;
  centroids.reserve(k * dim);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  auto first = points.row(pick(rng));
  centroids.insert(centroids.end(), first.begin(), first.end());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points.row(i), first);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = ordered_sum(d2);
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    auto row = points.row(chosen);
    centroids.insert(centroids.end(), row.begin(), row.end());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points.row(i), row));
  }
  return centroids;
}

}  // namespace

ClusterModel kmeans_single_run(const PointMatrix& points, int k, std::uint64_t seed, int max_iters, double tol,
                               bool parallel) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.dim;
  if (k < 1) throw Error(ErrorCode::TooFewPoints, "k must be at least 1");
  if (n < static_cast<std::size_t>(k))
    throw Error(ErrorCode::TooFewPoints,
                std::to_string(n) + " points cannot form " + std::to_string(k) + " clusters");

  Rng rng(seed);
  std::vector<double> centroids = kmeanspp_seed(points, k, rng);
  std::vector<int> labels(n, -1), prev_labels;
  std::vector<double> dist2(n);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);

  ClusterModel model;
  model.k = k;
  model.dim = dim;
  model.seed = seed;
  model.restarts = 1;

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    prev_labels = labels;
    assign_all(points, centroids, labels, dist2, parallel);
    model.inertia_trace.push_back(ordered_sum(dist2));
    if (labels == prev_labels) break;

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[labels[i]];
    // Empty cluster: move the point farthest from its centroid into it.
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (counts[labels[i]] > 1 && (far == n || dist2[i] > dist2[far])) far = i;
      --counts[labels[far]];
      labels[far] = c;
      dist2[far] = 0.0;
      counts[c] = 1;
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = points.row(i);
      double* s = sums.data() + labels[i] * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += row[j];
    }
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double updated = sums[c * dim + j] / static_cast<double>(counts[c]);
        movement = std::max(movement, std::abs(updated - centroids[c * dim + j]));
        centroids[c * dim + j] = updated;
      }
    }
    if (movement < tol) {
      ++iter;
      break;
    }
  }
  model.iterations = iter;

  // Hartigan single-point transfers from the Lloyd fixed point.
  assign_all(points, centroids, labels, dist2, parallel);
  std::fill(counts.begin(), counts.end(), 0);
  std::fill(sums.begin(), sums.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) ++counts[labels[i]];
  for (int c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = n;
    for (std::size_t i = 0; i < n; ++i)
      if (counts[labels[i]] > 1 && (far == n || dist2[i] > dist2[far])) far = i;
    --counts[labels[far]];
    labels[far] = c;
    dist2[far] = 0.0;
    counts[c] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = points.row(i);
    for (std::size_t j = 0; j < dim; ++j) sums[labels[i] * dim + j] += row[j];
  }
  for (int c = 0; c < k; ++c)
    for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
  auto centroid = [&](int c) { return std::span<const double>(centroids.data() + c * dim, dim); };
  for (int pass = 0; pass < max_iters; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = labels[i];
      if (counts[a] < 2) continue;
      auto row = points.row(i);
      const double na = static_cast<double>(counts[a]);
      const double removal = na / (na - 1.0) * sq_dist(row, centroid(a));
      int to = a;
      double best = removal * (1.0 - 1e-12);
      for (int b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = static_cast<double>(counts[b]);
        const double added = nb / (nb + 1.0) * sq_dist(row, centroid(b));
        if (added < best) {
          best = added;
          to = b;
        }
      }
      if (to == a) continue;
      --counts[a];
      ++counts[to];
      for (std::size_t j = 0; j < dim; ++j) {
        sums[a * dim + j] -= row[j];
        sums[to * dim + j] += row[j];
        centroids[a * dim + j] = sums[a * dim + j] / static_cast<double>(counts[a]);
        centroids[to * dim + j] = sums[to * dim + j] / static_cast<double>(counts[to]);
      }
      labels[i] = to;
      moved = true;
    }
    if (!moved) break;
    // Exact centroids of the new partition.
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) sums[labels[i] * dim + j] += row[j];
    }
    for (int c = 0; c < k; ++c)
      for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += sq_dist(points.row(i), centroid(labels[i]));
    model.inertia_trace.push_back(total);
  }

  assign_all(points, centroids, labels, dist2, parallel);
  model.inertia = ordered_sum(dist2);
  model.centroids.resize(k);
  for (int c = 0; c < k; ++c) model.centroids[c].assign(centroids.begin() + c * dim, centroids.begin() + (c + 1) * dim);
  return model;
}

ClusterModel kmeans(const PointMatrix& points, const KMeansOptions& opts) {
  if (opts.restarts < 1) throw Error(ErrorCode::BadConfig, "restarts must be at least 1");
  if (points.rows() < static_cast<std::size_t>(std::max(opts.k, 1)))
    throw Error(ErrorCode::TooFewPoints,
                std::to_string(points.rows()) + " points cannot form " + std::to_string(opts.k) + " clusters");
  std::vector<ClusterModel> runs(opts.restarts);
  if (opts.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < opts.restarts; ++r)
      runs[r] = kmeans_single_run(points, opts.k, derive_seed(opts.seed, static_cast<std::uint64_t>(r)),
                                  opts.max_iters, opts.tol, false);
  } else {
    for (int r = 0; r < opts.restarts; ++r)
      runs[r] = kmeans_single_run(points, opts.k, derive_seed(opts.seed, static_cast<std::uint64_t>(r)),
                                  opts.max_iters, opts.tol, false);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  ClusterModel model = std::move(runs[best]);
  model.seed = opts.seed;
  model.restarts = opts.restarts;
  return model;
}

double inertia(const ClusterModel& model, const PointMatrix& points) {
  if (points.dim != model.dim) throw Error(ErrorCode::ShapeMismatch, "point and centroid dimensions differ");
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : model.centroids) best = std::min(best, sq_dist(points.row(i), c));
    total += best;
  }
  return total;
}

int assign(std::span<const double> point, const ClusterModel& model) {
  if (point.size() != model.dim) throw Error(ErrorCode::ShapeMismatch, "point and centroid dimensions differ");
  int label = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    const double d = sq_dist(point, model.centroids[c]);
    if (d < best) {
      best = d;
      label = static_cast<int>(c);
    }
  }
  return label;
}

std::optional<std::size_t> kneedle_decreasing(std::span<const double> x, std::span<const double> y,
                                              std::vector<double>* difference) {
  const std::size_t n = x.size();
  std::vector<double> diff(n, 0.0);
  std::optional<std::size_t> knee;
  if (n >= 3 && y.size() == n) {
    const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
    const double xspan = x.back() - x.front();
    const double yspan = *yhi - *ylo;
    if (xspan > 0.0 && yspan > 0.0) {
      double best = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xn = (x[i] - x.front()) / xspan;
        const double yn = (y[i] - *ylo) / yspan;
        diff[i] = (1.0 - xn) - yn;
      }
      constexpr double kFlat = 1e-12;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (diff[i] > best + kFlat) {
          best = diff[i];
          knee = i;
        }
      }
    }
  }
  if (difference) *difference = std::move(diff);
  return knee;
}

std::uint64_t knee_seed_for(std::uint64_t seed, int k) {
  return derive_seed(seed, static_cast<std::uint64_t>(k) << 32);
}

KneeCurve select_k(const PointMatrix& points, const KneeOptions& opts) {
  if (opts.k_min < 2 || opts.k_max <= opts.k_min)
    throw Error(ErrorCode::BadConfig, "knee search needs 2 <= k_min < k_max");
  if (points.rows() < static_cast<std::size_t>(opts.k_max))
    throw Error(ErrorCode::TooFewPoints, "fewer points than k_max");
  KneeCurve curve;
  for (int k = opts.k_min; k <= opts.k_max; ++k) {
    KMeansOptions ko{k, knee_seed_for(opts.seed, k), opts.restarts, opts.max_iters,
                     opts.tol, opts.parallel};
    curve.k_values.push_back(k);
    curve.inertias.push_back(kmeans(points, ko).inertia);
  }
  curve.repaired = curve.inertias;
  for (std::size_t i = 1; i < curve.repaired.size(); ++i)
    curve.repaired[i] = std::min(curve.repaired[i], curve.repaired[i - 1]);

  std::vector<double> x(curve.k_values.begin(), curve.k_values.end());
  auto knee = kneedle_decreasing(x, curve.repaired, &curve.difference);
  if (knee) {
    curve.k_star = curve.k_values[*knee];
  } else {
    curve.k_star = opts.k_min;
    curve.no_knee = true;
  }
  return curve;
}

int PatternShares::dominant() const {
  return static_cast<int>(std::max_element(shares.begin(), shares.end()) - shares.begin());
}

std::vector<PatternShares> pattern_shares(const ClusterModel& model, std::span<const NormalizedProfile> profiles,
                                          std::span<const std::string> consumers) {
  std::map<std::string, std::vector<int>, std::less<>> counts;
  for (const auto& p : profiles) {
    auto& c = counts[p.consumer_id];
    if (c.empty()) c.assign(model.k, 0);
    ++c[assign(p.values, model)];
  }
  std::vector<PatternShares> out;
  out.reserve(consumers.size());
  for (const auto& id : consumers) {
    auto it = counts.find(id);
    if (it == counts.end())
      throw Error(ErrorCode::NoProfilesForConsumer, "consumer '" + id + "' has no " + model.day_type + " profiles");
    PatternShares s;
    s.consumer_id = id;
    s.day_type = model.day_type;
    s.counts = it->second;
    s.n_days = static_cast<std::size_t>(std::accumulate(s.counts.begin(), s.counts.end(), 0));
    for (int c : s.counts) s.shares.push_back(static_cast<double>(c) / static_cast<double>(s.n_days));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PatternShares> pattern_shares(const ClusterModel& model, std::span<const NormalizedProfile> profiles) {
  std::vector<std::string> ids;
  for (const auto& p : profiles) ids.push_back(p.consumer_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return pattern_shares(model, profiles, ids);
}

}  // namespace loadpat
