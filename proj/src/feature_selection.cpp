#include "loadpat/feature_selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>

#include "loadpat/error.hpp"
#include "loadpat/kernels.hpp"

namespace loadpat {

CategoricalColumn CategoricalColumn::from_labels(std::string name, std::vector<int> labels, int arity) {
  CategoricalColumn c{std::move(name), std::move(labels), arity};
  if (c.arity <= 0) c.arity = c.labels.empty() ? 1 : *std::max_element(c.labels.begin(), c.labels.end()) + 1;
  return c;
}

namespace {

void check_labels(const CategoricalColumn& col) {
  if (col.labels.empty()) throw Error(ErrorCode::EmptyColumn, "column '" + col.name + "' is empty");
  if (col.arity < 1) throw Error(ErrorCode::LabelOutOfRange, "column '" + col.name + "' has arity < 1");
  for (int l : col.labels)
    if (l < 0 || l >= col.arity)
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(l) + " outside arity of '" + col.name + "'");
}

double entropy_of_counts(const std::vector<std::size_t>& counts, double n) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double entropy(const CategoricalColumn& col) {
  check_labels(col);
  std::vector<std::size_t> counts(col.arity, 0);
  for (int l : col.labels) ++counts[l];
  return entropy_of_counts(counts, static_cast<double>(col.labels.size()));
}

double mutual_information(const CategoricalColumn& u, const CategoricalColumn& v) {
  if (u.labels.size() != v.labels.size())
    throw Error(ErrorCode::LengthMismatch, "columns '" + u.name + "' and '" + v.name + "' differ in length");
  check_labels(u);
  check_labels(v);
  const double n = static_cast<double>(u.labels.size());
  std::vector<std::size_t> cu(u.arity, 0), cv(v.arity, 0), joint(static_cast<std::size_t>(u.arity) * v.arity, 0);
  for (std::size_t i = 0; i < u.labels.size(); ++i) {
    ++cu[u.labels[i]];
    ++cv[v.labels[i]];
    ++joint[static_cast<std::size_t>(u.labels[i]) * v.arity + v.labels[i]];
  }
  double mi = 0.0;
  for (int a = 0; a < u.arity; ++a) {
    for (int b = 0; b < v.arity; ++b) {
      const std::size_t c = joint[static_cast<std::size_t>(a) * v.arity + b];
      if (c == 0) continue;
      // P(a,b) / (P(a) P(b)) = c n / (cu cv)
      mi += (static_cast<double>(c) / n) *
            std::log2(static_cast<double>(c) * n / (static_cast<double>(cu[a]) * static_cast<double>(cv[b])));
    }
  }
  return std::max(mi, 0.0);
}

SymmetricUncertainty symmetric_uncertainty_flagged(const CategoricalColumn& u, const CategoricalColumn& v) {
  const double mi = mutual_information(u, v);
  const double hsum = entropy(u) + entropy(v);
  if (hsum <= 0.0) return {0.0, true};
  return {std::clamp(2.0 * mi / hsum, 0.0, 1.0), false};
}

double symmetric_uncertainty(const CategoricalColumn& u, const CategoricalColumn& v) {
  return symmetric_uncertainty_flagged(u, v).value;
}

CategoricalColumn DiscretizedTarget::as_column() const {
  return CategoricalColumn{"pattern_" + std::to_string(pattern + 1), bins,
                           static_cast<int>(bin_edges.size()) - 1};
}

int share_bin(double share, int bins) {
  if (!(share > 0.0)) return 0;
  if (share >= 1.0) return bins - 1;
  // Edges are b / bins; compare against them directly so that a share equal
  // to an edge lands in the upper bin.
  int b = static_cast<int>(share * bins);
  while (b > 0 && share < static_cast<double>(b) / bins) --b;
  while (b + 1 < bins && share >= static_cast<double>(b + 1) / bins) ++b;
  return b;
}

DiscretizedTarget discretize_target(std::span<const PatternShares> shares, int pattern, int bins) {
  if (bins < 2) throw Error(ErrorCode::BadConfig, "target discretization needs at least 2 bins");
  DiscretizedTarget t;
  t.pattern = pattern;
  for (int b = 0; b <= bins; ++b) t.bin_edges.push_back(static_cast<double>(b) / bins);
  for (const auto& s : shares) {
    if (pattern < 0 || static_cast<std::size_t>(pattern) >= s.shares.size())
      throw Error(ErrorCode::ShapeMismatch, "pattern index out of range");
    t.bins.push_back(share_bin(s.shares[pattern], bins));
  }
  return t;
}

SelectionReport select_features(std::span<const CategoricalColumn> features, const DiscretizedTarget& target,
                                bool parallel) {
  const std::size_t n = features.size();
  if (n == 0) throw Error(ErrorCode::EmptyColumn, "no features to select from");
  if (n > kMaxExhaustiveFeatures)
    throw Error(ErrorCode::TooManyFeatures,
                std::to_string(n) + " features exceed the exhaustive limit of " +
                    std::to_string(kMaxExhaustiveFeatures));
  const CategoricalColumn tcol = target.as_column();

  SelectionReport rep;
  rep.subset.pattern = target.pattern;
  rep.target_su.resize(n);
  rep.su_matrix.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    rep.feature_names.push_back(features[i].name);
    rep.target_su[i] = symmetric_uncertainty(features[i], tcol);
    rep.su_matrix[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double su = symmetric_uncertainty(features[i], features[j]);
      rep.su_matrix[i * n + j] = su;
      rep.su_matrix[j * n + i] = su;
    }
  }

  const auto merits = parallel ? kernels::subset_merits_omp(rep.target_su, rep.su_matrix, n)
                               : kernels::subset_merits_serial(rep.target_su, rep.su_matrix, n);

  auto sorted_names = [&](std::uint64_t mask) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) names.push_back(features[i].name);
    std::sort(names.begin(), names.end());
    return names;
  };
  constexpr double kTieTol = 1e-12;
  std::uint64_t best = 1;
  for (std::uint64_t mask = 2; mask < merits.size(); ++mask) {
    const double m = merits[mask];
    const double b = merits[best];
    if (m > b + kTieTol) {
      best = mask;
    } else if (m >= b - kTieTol) {
      const int pm = std::popcount(mask);
      const int pb = std::popcount(best);
      if (pm < pb || (pm == pb && sorted_names(mask) < sorted_names(best))) best = mask;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (best >> i & 1U) rep.subset.members.push_back(features[i].name);
  rep.subset.merit = merits[best];
  return rep;
}

FeatureSubset select_subset(std::span<const CategoricalColumn> features, const DiscretizedTarget& target,
                            bool parallel) {
  return select_features(features, target, parallel).subset;
}

std::vector<CategoricalColumn> feature_columns(const EncodedMetadata& meta, std::span<const std::string> consumers) {
  std::map<std::string_view, const SocioRecord*> by_id;
  for (const auto& r : meta.records) by_id.emplace(r.consumer_id, &r);
  std::vector<CategoricalColumn> cols;
  for (const auto& m : meta.maps) {
    CategoricalColumn col{m.feature, {}, m.arity()};
    for (const auto& id : consumers) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::MissingAttribute, "no metadata for consumer '" + id + "'");
      auto label = it->second->label(m.feature);
      if (!label) throw Error(ErrorCode::MissingAttribute, "consumer '" + id + "' lacks '" + m.feature + "'");
      col.labels.push_back(*label);
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

}  // namespace loadpat
