#pragma once

#include <span>
#include <string>
#include <vector>

#include "loadpat/clustering.hpp"
#include "loadpat/ingest.hpp"

namespace loadpat {

struct CategoricalColumn {
  std::string name;
  std::vector<int> labels;
  int arity = 1;

  /// Arity defaults to max label + 1.
  static CategoricalColumn from_labels(std::string name, std::vector<int> labels, int arity = 0);
};

/// Shannon entropy in bits of the empirical label distribution.
double entropy(const CategoricalColumn& col);

/// Empirical mutual information in bits.
double mutual_information(const CategoricalColumn& u, const CategoricalColumn& v);

struct SymmetricUncertainty {
  double value = 0.0;
  bool degenerate = false;  // both columns constant; value forced to 0
};

SymmetricUncertainty symmetric_uncertainty_flagged(const CategoricalColumn& u, const CategoricalColumn& v);

/// 2 MI(u,v) / (H(u) + H(v)), 0 when both columns are constant.
double symmetric_uncertainty(const CategoricalColumn& u, const CategoricalColumn& v);

struct DiscretizedTarget {
  int pattern = 0;
  std::vector<int> bins;
  std::vector<double> bin_edges;  // B + 1 equal-width edges over [0, 1]

  CategoricalColumn as_column() const;
};

/// Equal-width bin of a share in [0,1]; the last bin is right-closed.
int share_bin(double share, int bins);

DiscretizedTarget discretize_target(std::span<const PatternShares> shares, int pattern, int bins);

struct FeatureSubset {
  int pattern = 0;
  std::vector<std::string> members;  // in input feature order
  double merit = 0.0;
};

inline constexpr std::size_t kMaxExhaustiveFeatures = 20;

struct SelectionReport {
  FeatureSubset subset;
  std::vector<std::string> feature_names;
  std::vector<double> target_su;  // SU(feature, target) in feature order
  std::vector<double> su_matrix;  // n x n, diagonal fixed at 1
};

/// Exhaustive search over all non-empty subsets for the best
///   sum SU(U, target) / sqrt(sum_{U,V} SU(U, V)).
/// Ties go to the smaller subset, then to the lexicographically smaller
/// sorted list of member names. Throws Error{TooManyFeatures}.
SelectionReport select_features(std::span<const CategoricalColumn> features, const DiscretizedTarget& target,
                                bool parallel = true);

FeatureSubset select_subset(std::span<const CategoricalColumn> features, const DiscretizedTarget& target,
                            bool parallel = true);

/// Feature columns for `consumers` (in order) built from encoded metadata.
std::vector<CategoricalColumn> feature_columns(const EncodedMetadata& meta, std::span<const std::string> consumers);

}  // namespace loadpat
