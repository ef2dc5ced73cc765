#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "peakcast/core.hpp"

namespace peakcast {

/// Non-overlapping block sums of k consecutive steps. The series must start
/// on a block boundary of the day and cover whole blocks; the result keeps
/// the block-start timestamps with step_hours multiplied by k.
HourlySeries aggregate_series(const HourlySeries& s, int k);

/// Summing structure of one day: one row per aggregate node (scales in
/// descending order, chronological within a scale) stacked above the
/// bottom identity block.
struct HierarchyStructure {
    std::vector<int> scales;        // descending, bottom scale 1 last
    int bottom_len = 24;
    std::vector<std::vector<std::uint8_t>> summing;  // rows x bottom_len
    std::vector<std::string> node_labels;

    std::size_t n_rows() const { return summing.size(); }
    std::size_t bottom_offset() const { return n_rows() - static_cast<std::size_t>(bottom_len); }
};

/// Scales must each divide the bottom length and include 1.
HierarchyStructure build_summing_matrix(std::span<const int> scales, int bottom_len = 24);

struct BaseForecasts {
    std::vector<double> mean;
    std::vector<double> var;  // > 0, one per node
};

struct ReconciledForecasts {
    std::vector<double> mean;  // coherent across all nodes
    std::vector<double> var;
};

/// GLS projection onto the coherent subspace with W = diag(base variances):
/// bottom = (S'W^-1 S)^-1 S'W^-1 yhat, node means S*bottom, node variances
/// diag(S (S'W^-1 S)^-1 S').
ReconciledForecasts reconcile(const BaseForecasts& base, const HierarchyStructure& hs);

/// Per-day reconciliation of a multi-day horizon given one DistForecast per
/// scale (keyed by scale, covering the same days). Returns the bottom-level
/// forecast; per-node detail for each day is appended to `report` when
/// non-null.
struct ReconciliationRow {
    int day_index = 0;
    std::string node;
    double base_mean = 0, base_var = 0;
    double rec_mean = 0, rec_var = 0;
};

DistForecast reconcile_horizon(const std::map<int, DistForecast>& per_scale,
                               const HierarchyStructure& hs,
                               std::vector<ReconciliationRow>* report = nullptr);

}  // namespace peakcast
