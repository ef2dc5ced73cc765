#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peakcast/core.hpp"

namespace peakcast {

enum class CorrMethod { Pearson, Spearman };

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rho;  // symmetric, diagonal 1, NaN = undefined

    std::size_t size() const { return names.size(); }
    /// Clustering distance 1 - |rho|; undefined coefficients count as
    /// maximally distant (1), the diagonal as 0.
    double distance(std::size_t i, std::size_t j) const;
};

/// Pairwise coefficients over the rows where both columns are unmasked.
/// Spearman is Pearson on average ranks (ties averaged). A zero-variance
/// column yields undefined (NaN) coefficients.
CorrelationMatrix correlation_matrix(const FeatureMatrix& fm, CorrMethod method);

/// One agglomerative merge step; ids < n are leaves, id n + k is the cluster
/// created by merge k (scipy linkage convention).
struct LinkageMerge {
    int left = 0;
    int right = 0;
    double distance = 0.0;
    int size = 0;
};

/// Full average-linkage dendrogram on distances 1 - |rho|.
std::vector<LinkageMerge> linkage(const CorrelationMatrix& cm);

struct FeatureCluster {
    int id = 0;                     // 1-based, ordered by smallest member column
    std::vector<int> member_cols;   // ascending column indices
    std::vector<std::string> members;
};

/// Flat clusters from cutting the average-linkage dendrogram at the given
/// threshold (merges with distance <= threshold are applied).
std::vector<FeatureCluster> cluster_features(const CorrelationMatrix& cm, double threshold);

/// Same cut applied to an already-computed dendrogram.
std::vector<FeatureCluster> flat_clusters(const std::vector<LinkageMerge>& merges,
                                          const std::vector<std::string>& names,
                                          double threshold);

/// Model predictions for an evaluation matrix (the model under study is
/// only ever consulted through this).
using PredictFn = std::function<std::vector<double>(const FeatureMatrix&)>;
/// Higher-is-better score of predictions against targets.
using ScoreFn = std::function<double(std::span<const double> predictions,
                                     std::span<const double> targets)>;

struct ImportanceEntry {
    int cluster_id = 0;
    std::vector<std::string> members;
    double mean_drop = 0.0;
    double std_drop = 0.0;  // sample std over repetitions
    int repetitions = 0;
};

struct ImportanceReport {
    double baseline_score = 0.0;
    std::vector<ImportanceEntry> entries;
};

/// Permutation feature importance: mean score drop over K reshuffles of
/// each column. The evaluation data is never mutated.
ImportanceReport pfi(const PredictFn& model, const FeatureMatrix& evalset,
                     std::span<const double> targets, const ScoreFn& scorer, int repetitions,
                     std::uint64_t rng_seed);

/// Clustered PFI: all columns of a cluster are reshuffled with one shared
/// row permutation per repetition. Clusters must partition the columns.
ImportanceReport cpfi(const PredictFn& model, const FeatureMatrix& evalset,
                      std::span<const double> targets, const ScoreFn& scorer,
                      const std::vector<FeatureCluster>& clusters, int repetitions,
                      std::uint64_t rng_seed);

/// Clusters whose mean drop clears three standard deviations above zero.
std::set<int> informative_clusters(const ImportanceReport& report);

std::string importance_report_csv(const ImportanceReport& report,
                                  const std::set<int>& informative);
std::string linkage_csv(const std::vector<LinkageMerge>& merges,
                        const std::vector<std::string>& leaf_names);

}  // namespace peakcast
