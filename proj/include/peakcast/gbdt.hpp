#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "peakcast/core.hpp"

namespace peakcast {

struct TreeNode {
    int feature = -1;          // split feature (schema index), -1 for leaves
    double threshold = 0.0;    // x < threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;        // leaf output
    double gain = 0.0;         // split gain (internal nodes)

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict_row(const FeatureMatrix& fm, std::size_t row,
                       std::span<const int> col_map) const;
};

struct DartConfig {
    bool enabled = false;
    double drop_rate = 0.1;      // in [0,1)
    bool empty_fallback = true;  // drop one uniformly random tree when the sample is empty
    std::uint64_t rng_seed = 0;
};

struct BoostConfig {
    int num_iterations = 300;
    double learning_rate = 0.05;
    int max_leaves = 31;
    double min_samples_leaf = 20.0;  // minimum sum of row weights per leaf
    double lambda_l2 = 1.0;
    DartConfig dart;

    void validate() const;
};

enum class BoostMode { L2, GaussianNLL };

/// Additive tree model. L2 mode uses the mu side only; GaussianNLL mode
/// carries parallel ensembles for mu and s = log sigma.
struct TreeEnsemble {
    BoostMode mode = BoostMode::L2;
    double base_mu = 0.0;
    double base_s = 0.0;
    std::vector<Tree> mu_trees;
    std::vector<double> mu_scales;
    std::vector<Tree> s_trees;
    std::vector<double> s_scales;
    std::vector<std::string> schema;  // training column names
    BoostConfig config;

    std::vector<double> predict(const FeatureMatrix& fm) const;
    /// (mean, sigma) per row; GaussianNLL mode only.
    std::pair<std::vector<double>, std::vector<double>> predict_dist(const FeatureMatrix& fm) const;
};

struct FitDiagnostics {
    std::vector<double> train_loss;  // weighted mean loss after each iteration
    std::vector<int> drop_counts;    // |D| per iteration (DART)
};

/// Gaussian negative log-likelihood at (mu, s = log sigma) and its first
/// and second derivatives in both parameters.
double gaussian_nll(double y, double mu, double s);
struct NllDerivs {
    double g_mu, h_mu, g_s, h_s;
};
NllDerivs gaussian_nll_derivs(double y, double mu, double s);

/// One second-order regression tree on explicit gradients/hessians.
/// Rows with zero weight or a missing cell contribute nothing.
Tree fit_tree(const FeatureMatrix& fm, std::span<const double> gradients,
              std::span<const double> hessians, std::span<const double> weights,
              const BoostConfig& cfg);

TreeEnsemble fit_gbm(const FeatureMatrix& fm, std::span<const double> y, const BoostConfig& cfg,
                     FitDiagnostics* diag = nullptr);

TreeEnsemble fit_gbm_lss(const FeatureMatrix& fm, std::span<const double> y,
                         const BoostConfig& cfg, FitDiagnostics* diag = nullptr);

/// Incremental trainer behind fit_gbm / fit_gbm_lss; exposed so a single
/// boosting (or DART) iteration can be driven and inspected.
class GbmTrainer {
public:
    GbmTrainer(const FeatureMatrix& fm, std::span<const double> y, const BoostConfig& cfg,
               BoostMode mode);
    ~GbmTrainer();
    GbmTrainer(GbmTrainer&&) noexcept;

    void step();  // one boosting iteration (DART-aware)
    int iterations_done() const;
    int last_drop_count() const;
    double train_loss() const;          // current weighted mean loss
    const TreeEnsemble& ensemble() const;
    TreeEnsemble finish() &&;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string ensemble_to_json(const TreeEnsemble& e);
TreeEnsemble ensemble_from_json(const std::string& text);

/// Total split gain per schema column, summed over every tree of the
/// ensemble (both parameter ensembles in GaussianNLL mode).
std::vector<std::pair<std::string, double>> gain_importance(const TreeEnsemble& e);
std::string gain_importance_csv(const TreeEnsemble& e);

}  // namespace peakcast
