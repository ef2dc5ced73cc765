#include "peakcast/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace peakcast {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct SplitCand {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;

    bool beats(const SplitCand& o) const {
        if (gain != o.gain) return gain > o.gain;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

/// Training-side view: active rows in canonical order with presorted
/// per-feature row positions. All later arithmetic runs in this order so
/// the fitted model is invariant to permutations of the input rows.
struct TrainData {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::vector<double>> x;           // [d][n]
    std::vector<double> w;                        // [n]
    std::vector<double> y;                        // [n]
    std::vector<std::vector<std::int32_t>> order; // [d][n], positions sorted by x[c]
};

TrainData build_train_data(const FeatureMatrix& fm, std::span<const double> y_opt) {
    TrainData td;
    td.d = fm.n_cols();
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < fm.rows; ++r)
        if (fm.weights[r] > 0.0 && fm.row_valid(r)) active.push_back(r);
    if (active.empty()) throw std::runtime_error("gbdt: no usable training rows");

    auto row_less = [&](std::size_t a, std::size_t b) {
        for (std::size_t c = 0; c < td.d; ++c) {
            if (fm.cols[c][a] < fm.cols[c][b]) return true;
            if (fm.cols[c][a] > fm.cols[c][b]) return false;
        }
        if (!y_opt.empty()) {
            if (y_opt[a] < y_opt[b]) return true;
            if (y_opt[a] > y_opt[b]) return false;
        }
        return fm.weights[a] < fm.weights[b];
    };
    std::stable_sort(active.begin(), active.end(), row_less);

    td.n = active.size();
    td.x.assign(td.d, std::vector<double>(td.n));
    td.w.resize(td.n);
    td.y.resize(td.n);
    for (std::size_t i = 0; i < td.n; ++i) {
        td.w[i] = fm.weights[active[i]];
        td.y[i] = y_opt.empty() ? 0.0 : y_opt[active[i]];
        for (std::size_t c = 0; c < td.d; ++c) td.x[c][i] = fm.cols[c][active[i]];
    }
    td.order.assign(td.d, {});
    for (std::size_t c = 0; c < td.d; ++c) {
        auto& ord = td.order[c];
        ord.resize(td.n);
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(), [&](std::int32_t a, std::int32_t b) {
            return td.x[c][a] < td.x[c][b];
        });
    }
    return td;
}

/// Best-first tree grower over one TrainData and one gradient/hessian set.
class TreeBuilder {
public:
    TreeBuilder(const TrainData& td, const BoostConfig& cfg) : td_(td), cfg_(cfg) {
        ord_ = td.order;  // working copy, partitioned per leaf as the tree grows
        scratch_.resize(td.n);
        in_left_.resize(td.n);
    }

    Tree build(std::span<const double> g, std::span<const double> h) {
        g_ = g;
        h_ = h;
        Tree tree;
        tree.nodes.push_back(TreeNode{});

        struct LeafState {
            int node = 0;
            std::size_t begin = 0, end = 0;
            double sum_g = 0, sum_h = 0, sum_w = 0;
            SplitCand best;
        };
        std::vector<LeafState> leaves;
        LeafState root;
        root.node = 0;
        root.begin = 0;
        root.end = td_.n;
        leaf_stats(root);
        tree.nodes[0].value = leaf_value(root.sum_g, root.sum_h);
        root.best = best_split(root);
        leaves.push_back(root);

        int n_leaves = 1;
        while (n_leaves < cfg_.max_leaves) {
            int pick = -1;
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                if (leaves[i].best.feature < 0) continue;
                if (pick < 0 || leaves[i].best.beats(leaves[pick].best))
                    pick = static_cast<int>(i);
            }
            if (pick < 0) break;

            LeafState leaf = leaves[pick];
            leaves.erase(leaves.begin() + pick);
            const int c = leaf.best.feature;
            const double thr = leaf.best.threshold;

            // membership of the split feature decides the side for every row
            for (std::size_t k = leaf.begin; k < leaf.end; ++k) {
                const std::int32_t r = ord_[c][k];
                in_left_[r] = td_.x[c][r] < thr;
            }
            // stable partition every feature's block so each child stays
            // contiguous and value-sorted
            std::size_t n_left = 0;
            for (std::size_t f = 0; f < td_.d; ++f) {
                std::size_t lo = leaf.begin, hi = 0;
                for (std::size_t k = leaf.begin; k < leaf.end; ++k) {
                    const std::int32_t r = ord_[f][k];
                    if (in_left_[r])
                        ord_[f][lo++] = r;
                    else
                        scratch_[hi++] = r;
                }
                std::copy(scratch_.begin(), scratch_.begin() + hi, ord_[f].begin() + lo);
                n_left = lo - leaf.begin;
            }

            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(TreeNode{});
            const int ri = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(TreeNode{});
            tree.nodes[leaf.node].feature = c;
            tree.nodes[leaf.node].threshold = thr;
            tree.nodes[leaf.node].left = li;
            tree.nodes[leaf.node].right = ri;
            tree.nodes[leaf.node].value = 0.0;
            tree.nodes[leaf.node].gain = leaf.best.gain;

            LeafState left, right;
            left.node = li;
            left.begin = leaf.begin;
            left.end = leaf.begin + n_left;
            right.node = ri;
            right.begin = left.end;
            right.end = leaf.end;
            for (LeafState* child : {&left, &right}) {
                leaf_stats(*child);
                tree.nodes[child->node].value = leaf_value(child->sum_g, child->sum_h);
                child->best = best_split(*child);
                leaves.push_back(*child);
            }
            ++n_leaves;
        }
        return tree;
    }

private:
    template <typename L>
    void leaf_stats(L& leaf) const {
        leaf.sum_g = leaf.sum_h = leaf.sum_w = 0.0;
        const auto& ord = ord_[0];
        for (std::size_t k = leaf.begin; k < leaf.end; ++k) {
            const std::int32_t r = ord[k];
            leaf.sum_g += td_.w[r] * g_[r];
            leaf.sum_h += td_.w[r] * h_[r];
            leaf.sum_w += td_.w[r];
        }
    }

    double leaf_value(double sum_g, double sum_h) const {
        const double denom = sum_h + cfg_.lambda_l2;
        return denom > 0.0 ? -sum_g / denom : 0.0;
    }

    double score(double sum_g, double sum_h) const {
        const double denom = sum_h + cfg_.lambda_l2;
        return denom > 0.0 ? sum_g * sum_g / denom : 0.0;
    }

    template <typename L>
    SplitCand scan_features(const L& leaf, double parent, double min_gain, std::size_t c_begin,
                            std::size_t c_end) const {
        SplitCand best;
        for (std::size_t c = c_begin; c < c_end; ++c) {
            const auto& ord = ord_[c];
            const auto& xs = td_.x[c];
            double gl = 0, hl = 0, wl = 0;
            for (std::size_t k = leaf.begin; k + 1 < leaf.end; ++k) {
                const std::int32_t r = ord[k];
                gl += td_.w[r] * g_[r];
                hl += td_.w[r] * h_[r];
                wl += td_.w[r];
                const double v1 = xs[r], v2 = xs[ord[k + 1]];
                if (!(v1 < v2)) continue;
                if (wl < cfg_.min_samples_leaf || leaf.sum_w - wl < cfg_.min_samples_leaf)
                    continue;
                const double thr = v1 + (v2 - v1) / 2.0;
                if (!(v1 < thr)) continue;  // ulp-adjacent values
                const double gain =
                    score(gl, hl) + score(leaf.sum_g - gl, leaf.sum_h - hl) - parent;
                if (gain <= min_gain) continue;
                SplitCand cand{gain, static_cast<int>(c), thr};
                if (best.feature < 0 || cand.beats(best)) best = cand;
            }
        }
        return best;
    }

    template <typename L>
    SplitCand best_split(const L& leaf) const {
        const double parent = score(leaf.sum_g, leaf.sum_h);
        // floor scaled by the leaf's mass so prefix-sum roundoff on large
        // leaves cannot masquerade as a real gain
        const double min_gain = 1e-12 * (1.0 + std::abs(parent) + leaf.sum_w);

        // features scan independently; chunk results reduce in feature order,
        // so the chosen split is identical with and without threads
        const std::size_t workers = worker_count(leaf.end - leaf.begin);
        if (workers <= 1) return scan_features(leaf, parent, min_gain, 0, td_.d);

        std::vector<std::future<SplitCand>> parts;
        const std::size_t chunk = (td_.d + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t c0 = w * chunk;
            const std::size_t c1 = std::min(td_.d, c0 + chunk);
            if (c0 >= c1) break;
            parts.push_back(std::async(std::launch::async, [this, &leaf, parent, min_gain, c0,
                                                            c1] {
                return scan_features(leaf, parent, min_gain, c0, c1);
            }));
        }
        SplitCand best;
        for (auto& p : parts) {
            const SplitCand cand = p.get();
            if (cand.feature < 0) continue;
            if (best.feature < 0 || cand.beats(best)) best = cand;
        }
        return best;
    }

    std::size_t worker_count(std::size_t leaf_len) const {
        static const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
        if (hw == 1 || td_.d < 8 || leaf_len * td_.d < (1u << 16)) return 1;
        return std::min<std::size_t>({hw, 4, td_.d / 4});
    }

    const TrainData& td_;
    const BoostConfig& cfg_;
    std::span<const double> g_, h_;
    std::vector<std::vector<std::int32_t>> ord_;
    std::vector<std::int32_t> scratch_;
    std::vector<char> in_left_;
};

}  // namespace

double gaussian_nll(double y, double mu, double s) {
    const double r = y - mu;
    return 0.5 * kLog2Pi + s + 0.5 * r * r * std::exp(-2.0 * s);
}

NllDerivs gaussian_nll_derivs(double y, double mu, double s) {
    const double r = y - mu;
    const double inv_var = std::exp(-2.0 * s);
    return {-r * inv_var, inv_var, 1.0 - r * r * inv_var, 2.0 * r * r * inv_var};
}

void BoostConfig::validate() const {
    if (num_iterations < 0) throw std::runtime_error("boost config: num_iterations < 0");
    if (learning_rate <= 0.0) throw std::runtime_error("boost config: learning_rate <= 0");
    if (max_leaves < 2) throw std::runtime_error("boost config: max_leaves < 2");
    if (min_samples_leaf < 1.0) throw std::runtime_error("boost config: min_samples_leaf < 1");
    if (lambda_l2 < 0.0) throw std::runtime_error("boost config: lambda_l2 < 0");
    if (dart.enabled && (dart.drop_rate < 0.0 || dart.drop_rate >= 1.0))
        throw std::runtime_error("boost config: dart drop_rate must be in [0,1)");
}

double Tree::predict_row(const FeatureMatrix& fm, std::size_t row,
                         std::span<const int> col_map) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
        const double v = fm.cols[col_map[node->feature]][row];
        node = &nodes[v < node->threshold ? node->left : node->right];
    }
    return node->value;
}

namespace {

std::vector<int> map_schema(const TreeEnsemble& e, const FeatureMatrix& fm) {
    std::vector<int> map(e.schema.size());
    std::string missing;
    for (std::size_t i = 0; i < e.schema.size(); ++i) {
        map[i] = fm.column_index(e.schema[i]);
        if (map[i] < 0) missing += (missing.empty() ? "" : ", ") + e.schema[i];
    }
    if (!missing.empty())
        throw std::runtime_error("predict: feature matrix is missing columns: " + missing);
    return map;
}

}  // namespace

std::vector<double> TreeEnsemble::predict(const FeatureMatrix& fm) const {
    const auto col_map = map_schema(*this, fm);
    std::vector<double> out(fm.rows, base_mu);
    for (std::size_t t = 0; t < mu_trees.size(); ++t)
        for (std::size_t r = 0; r < fm.rows; ++r)
            out[r] += mu_scales[t] * mu_trees[t].predict_row(fm, r, col_map);
    return out;
}

std::pair<std::vector<double>, std::vector<double>> TreeEnsemble::predict_dist(
    const FeatureMatrix& fm) const {
    if (mode != BoostMode::GaussianNLL)
        throw std::runtime_error("predict_dist: ensemble was not trained in GaussianNLL mode");
    const auto col_map = map_schema(*this, fm);
    std::vector<double> mu(fm.rows, base_mu), s(fm.rows, base_s);
    for (std::size_t t = 0; t < mu_trees.size(); ++t)
        for (std::size_t r = 0; r < fm.rows; ++r)
            mu[r] += mu_scales[t] * mu_trees[t].predict_row(fm, r, col_map);
    for (std::size_t t = 0; t < s_trees.size(); ++t)
        for (std::size_t r = 0; r < fm.rows; ++r)
            s[r] += s_scales[t] * s_trees[t].predict_row(fm, r, col_map);
    for (double& v : s) v = std::exp(v);
    return {std::move(mu), std::move(s)};
}

Tree fit_tree(const FeatureMatrix& fm, std::span<const double> gradients,
              std::span<const double> hessians, std::span<const double> weights,
              const BoostConfig& cfg) {
    cfg.validate();
    if (gradients.size() != fm.rows || hessians.size() != fm.rows || weights.size() != fm.rows)
        throw std::runtime_error("fit_tree: gradient/hessian/weight length mismatch");
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < fm.rows; ++r)
        if (weights[r] > 0.0 && fm.row_valid(r)) active.push_back(r);
    if (active.empty()) throw std::runtime_error("fit_tree: no usable rows (sum of weights is 0)");

    // canonical order must also break ties on g/h so identical feature rows
    // with different targets still sort deterministically
    auto row_less = [&](std::size_t a, std::size_t b) {
        for (std::size_t c = 0; c < fm.n_cols(); ++c) {
            if (fm.cols[c][a] < fm.cols[c][b]) return true;
            if (fm.cols[c][a] > fm.cols[c][b]) return false;
        }
        if (gradients[a] != gradients[b]) return gradients[a] < gradients[b];
        if (hessians[a] != hessians[b]) return hessians[a] < hessians[b];
        return weights[a] < weights[b];
    };
    std::stable_sort(active.begin(), active.end(), row_less);

    TrainData td;
    td.n = active.size();
    td.d = fm.n_cols();
    td.x.assign(td.d, std::vector<double>(td.n));
    td.w.resize(td.n);
    std::vector<double> g(td.n), h(td.n);
    for (std::size_t i = 0; i < td.n; ++i) {
        td.w[i] = weights[active[i]];
        g[i] = gradients[active[i]];
        h[i] = hessians[active[i]];
        for (std::size_t c = 0; c < td.d; ++c) td.x[c][i] = fm.cols[c][active[i]];
    }
    td.order.assign(td.d, {});
    for (std::size_t c = 0; c < td.d; ++c) {
        auto& ord = td.order[c];
        ord.resize(td.n);
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(),
                         [&](std::int32_t a, std::int32_t b) { return td.x[c][a] < td.x[c][b]; });
    }
    return TreeBuilder(td, cfg).build(g, h);
}

// ---------------------------------------------------------------------------
// GbmTrainer
// ---------------------------------------------------------------------------

struct GbmTrainer::Impl {
    TrainData td;
    BoostConfig cfg;
    BoostMode mode;
    TreeEnsemble ens;
    std::mt19937_64 dart_rng;

    std::vector<double> pred_mu;  // running ensemble output on training rows
    std::vector<double> pred_s;
    std::vector<std::vector<double>> tree_out_mu;  // unscaled per-tree outputs
    std::vector<std::vector<double>> tree_out_s;
    std::vector<double> g, h;   // scratch
    int last_drop = 0;
    int iters = 0;

    Impl(const FeatureMatrix& fm, std::span<const double> y, const BoostConfig& config,
         BoostMode m)
        : cfg(config), mode(m), dart_rng(config.dart.rng_seed) {
        cfg.validate();
        if (y.size() != fm.rows) throw std::runtime_error("gbdt: target length mismatch");
        for (double v : y)
            if (!std::isfinite(v)) throw std::runtime_error("gbdt: non-finite target value");
        td = build_train_data(fm, y);
        ens.mode = mode;
        ens.schema = fm.names;
        ens.config = cfg;

        double sw = 0, swy = 0;
        for (std::size_t i = 0; i < td.n; ++i) {
            sw += td.w[i];
            swy += td.w[i] * td.y[i];
        }
        ens.base_mu = swy / sw;
        if (mode == BoostMode::GaussianNLL) {
            double ss = 0;
            for (std::size_t i = 0; i < td.n; ++i)
                ss += td.w[i] * (td.y[i] - ens.base_mu) * (td.y[i] - ens.base_mu);
            const double sd = std::sqrt(ss / sw);
            const double floor = 1e-9 * (1.0 + std::abs(ens.base_mu));
            ens.base_s = std::log(std::max(sd, floor));
        }
        pred_mu.assign(td.n, ens.base_mu);
        pred_s.assign(td.n, ens.base_s);
        g.resize(td.n);
        h.resize(td.n);
    }

    std::vector<std::size_t> sample_drop_set() {
        std::vector<std::size_t> drop;
        const std::size_t n_trees = ens.mu_trees.size();
        if (!cfg.dart.enabled || n_trees == 0) return drop;
        for (std::size_t t = 0; t < n_trees; ++t)
            if (uniform01(dart_rng) < cfg.dart.drop_rate) drop.push_back(t);
        if (drop.empty() && cfg.dart.empty_fallback)
            drop.push_back(static_cast<std::size_t>(dart_rng() % n_trees));
        return drop;
    }

    void step() {
        const auto drop = sample_drop_set();
        last_drop = static_cast<int>(drop.size());
        const double k = static_cast<double>(drop.size());

        // model output with the dropped trees removed
        std::vector<double>*mu_eff = &pred_mu, *s_eff = &pred_s;
        std::vector<double> mu_view, s_view;
        if (!drop.empty()) {
            mu_view = pred_mu;
            s_view = pred_s;
            for (std::size_t t : drop) {
                for (std::size_t i = 0; i < td.n; ++i)
                    mu_view[i] -= ens.mu_scales[t] * tree_out_mu[t][i];
                if (mode == BoostMode::GaussianNLL)
                    for (std::size_t i = 0; i < td.n; ++i)
                        s_view[i] -= ens.s_scales[t] * tree_out_s[t][i];
            }
            mu_eff = &mu_view;
            s_eff = &s_view;
        }

        const double new_scale = cfg.learning_rate / (k + 1.0);
        TreeBuilder builder(td, cfg);

        if (mode == BoostMode::L2) {
            for (std::size_t i = 0; i < td.n; ++i) {
                g[i] = (*mu_eff)[i] - td.y[i];
                h[i] = 1.0;
            }
            Tree tree = builder.build(g, h);
            std::vector<double> out(td.n);
            for (std::size_t i = 0; i < td.n; ++i)
                out[i] = tree_predict_train(tree, i);
            rescale_dropped(drop, k);
            for (std::size_t i = 0; i < td.n; ++i) pred_mu[i] += new_scale * out[i];
            ens.mu_trees.push_back(std::move(tree));
            ens.mu_scales.push_back(new_scale);
            tree_out_mu.push_back(std::move(out));
        } else {
            // gradients of the NLL at the dropped-ensemble predictions
            std::vector<double> gs(td.n), hs(td.n);
            for (std::size_t i = 0; i < td.n; ++i) {
                const NllDerivs d = gaussian_nll_derivs(td.y[i], (*mu_eff)[i], (*s_eff)[i]);
                g[i] = d.g_mu;
                h[i] = d.h_mu;
                gs[i] = d.g_s;
                hs[i] = d.h_s;
            }
            Tree mu_tree = builder.build(g, h);
            TreeBuilder builder_s(td, cfg);
            Tree s_tree = builder_s.build(gs, hs);
            std::vector<double> out_mu(td.n), out_s(td.n);
            for (std::size_t i = 0; i < td.n; ++i) {
                out_mu[i] = tree_predict_train(mu_tree, i);
                out_s[i] = tree_predict_train(s_tree, i);
            }
            rescale_dropped(drop, k);
            for (std::size_t i = 0; i < td.n; ++i) {
                pred_mu[i] += new_scale * out_mu[i];
                pred_s[i] += new_scale * out_s[i];
            }
            ens.mu_trees.push_back(std::move(mu_tree));
            ens.mu_scales.push_back(new_scale);
            tree_out_mu.push_back(std::move(out_mu));
            ens.s_trees.push_back(std::move(s_tree));
            ens.s_scales.push_back(new_scale);
            tree_out_s.push_back(std::move(out_s));
        }
        ++iters;
    }

    double tree_predict_train(const Tree& tree, std::size_t row) const {
        const TreeNode* node = &tree.nodes[0];
        while (!node->is_leaf()) {
            const double v = td.x[node->feature][row];
            node = &tree.nodes[v < node->threshold ? node->left : node->right];
        }
        return node->value;
    }

    void rescale_dropped(const std::vector<std::size_t>& drop, double k) {
        if (drop.empty()) return;
        const double factor = k / (k + 1.0);
        for (std::size_t t : drop) {
            const double old_mu = ens.mu_scales[t];
            ens.mu_scales[t] = old_mu * factor;
            for (std::size_t i = 0; i < td.n; ++i)
                pred_mu[i] -= (old_mu - ens.mu_scales[t]) * tree_out_mu[t][i];
            if (mode == BoostMode::GaussianNLL) {
                const double old_s = ens.s_scales[t];
                ens.s_scales[t] = old_s * factor;
                for (std::size_t i = 0; i < td.n; ++i)
                    pred_s[i] -= (old_s - ens.s_scales[t]) * tree_out_s[t][i];
            }
        }
    }

    double loss() const {
        double acc = 0, sw = 0;
        for (std::size_t i = 0; i < td.n; ++i) {
            sw += td.w[i];
            if (mode == BoostMode::L2) {
                const double r = td.y[i] - pred_mu[i];
                acc += td.w[i] * r * r;
            } else {
                acc += td.w[i] * gaussian_nll(td.y[i], pred_mu[i], pred_s[i]);
            }
        }
        return acc / sw;
    }
};

GbmTrainer::GbmTrainer(const FeatureMatrix& fm, std::span<const double> y,
                       const BoostConfig& cfg, BoostMode mode)
    : impl_(std::make_unique<Impl>(fm, y, cfg, mode)) {}
GbmTrainer::~GbmTrainer() = default;
GbmTrainer::GbmTrainer(GbmTrainer&&) noexcept = default;

void GbmTrainer::step() { impl_->step(); }
int GbmTrainer::iterations_done() const { return impl_->iters; }
int GbmTrainer::last_drop_count() const { return impl_->last_drop; }
double GbmTrainer::train_loss() const { return impl_->loss(); }
const TreeEnsemble& GbmTrainer::ensemble() const { return impl_->ens; }
TreeEnsemble GbmTrainer::finish() && { return std::move(impl_->ens); }

namespace {

TreeEnsemble run_fit(const FeatureMatrix& fm, std::span<const double> y, const BoostConfig& cfg,
                     BoostMode mode, FitDiagnostics* diag) {
    GbmTrainer trainer(fm, y, cfg, mode);
    for (int it = 0; it < cfg.num_iterations; ++it) {
        trainer.step();
        if (diag) {
            diag->train_loss.push_back(trainer.train_loss());
            diag->drop_counts.push_back(trainer.last_drop_count());
        }
    }
    return std::move(trainer).finish();
}

}  // namespace

TreeEnsemble fit_gbm(const FeatureMatrix& fm, std::span<const double> y, const BoostConfig& cfg,
                     FitDiagnostics* diag) {
    return run_fit(fm, y, cfg, BoostMode::L2, diag);
}

TreeEnsemble fit_gbm_lss(const FeatureMatrix& fm, std::span<const double> y,
                         const BoostConfig& cfg, FitDiagnostics* diag) {
    return run_fit(fm, y, cfg, BoostMode::GaussianNLL, diag);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"v", n.value},
                         {"g", n.gain}});
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at("f").get<int>();
        node.threshold = n.at("t").get<double>();
        node.left = n.at("l").get<int>();
        node.right = n.at("r").get<int>();
        node.value = n.at("v").get<double>();
        node.gain = n.at("g").get<double>();
        t.nodes.push_back(node);
    }
    return t;
}

json trees_to_json(const std::vector<Tree>& trees, const std::vector<double>& scales) {
    json arr = json::array();
    for (std::size_t i = 0; i < trees.size(); ++i)
        arr.push_back({{"scale", scales[i]}, {"nodes", tree_to_json(trees[i])}});
    return arr;
}

}  // namespace

std::string ensemble_to_json(const TreeEnsemble& e) {
    json j;
    j["format_version"] = 1;
    j["mode"] = e.mode == BoostMode::L2 ? "l2" : "gaussian_nll";
    j["base_mu"] = e.base_mu;
    j["base_s"] = e.base_s;
    j["schema"] = e.schema;
    j["mu_trees"] = trees_to_json(e.mu_trees, e.mu_scales);
    j["s_trees"] = trees_to_json(e.s_trees, e.s_scales);
    j["config"] = {{"num_iterations", e.config.num_iterations},
                   {"learning_rate", e.config.learning_rate},
                   {"max_leaves", e.config.max_leaves},
                   {"min_samples_leaf", e.config.min_samples_leaf},
                   {"lambda_l2", e.config.lambda_l2},
                   {"dart_enabled", e.config.dart.enabled},
                   {"dart_drop_rate", e.config.dart.drop_rate},
                   {"dart_empty_fallback", e.config.dart.empty_fallback},
                   {"dart_rng_seed", e.config.dart.rng_seed}};
    return j.dump(2);
}

std::vector<std::pair<std::string, double>> gain_importance(const TreeEnsemble& e) {
    std::vector<double> total(e.schema.size(), 0.0);
    auto accumulate = [&](const std::vector<Tree>& trees) {
        for (const auto& t : trees)
            for (const auto& n : t.nodes)
                if (!n.is_leaf()) total[static_cast<std::size_t>(n.feature)] += n.gain;
    };
    accumulate(e.mu_trees);
    accumulate(e.s_trees);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(e.schema.size());
    for (std::size_t c = 0; c < e.schema.size(); ++c) out.emplace_back(e.schema[c], total[c]);
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::string gain_importance_csv(const TreeEnsemble& e) {
    std::ostringstream out;
    out << "# peakcast 1\nfeature,total_gain\n";
    char buf[40];
    for (const auto& [name, gain] : gain_importance(e)) {
        std::snprintf(buf, sizeof(buf), "%.17g", gain);
        out << name << "," << buf << "\n";
    }
    return out.str();
}

TreeEnsemble ensemble_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("model file: unsupported format version");
    TreeEnsemble e;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "l2")
        e.mode = BoostMode::L2;
    else if (mode == "gaussian_nll")
        e.mode = BoostMode::GaussianNLL;
    else
        throw std::runtime_error("model file: unknown mode '" + mode + "'");
    e.base_mu = j.at("base_mu").get<double>();
    e.base_s = j.at("base_s").get<double>();
    e.schema = j.at("schema").get<std::vector<std::string>>();
    for (const auto& t : j.at("mu_trees")) {
        e.mu_trees.push_back(tree_from_json(t.at("nodes")));
        e.mu_scales.push_back(t.at("scale").get<double>());
    }
    for (const auto& t : j.at("s_trees")) {
        e.s_trees.push_back(tree_from_json(t.at("nodes")));
        e.s_scales.push_back(t.at("scale").get<double>());
    }
    const auto& c = j.at("config");
    e.config.num_iterations = c.at("num_iterations").get<int>();
    e.config.learning_rate = c.at("learning_rate").get<double>();
    e.config.max_leaves = c.at("max_leaves").get<int>();
    e.config.min_samples_leaf = c.at("min_samples_leaf").get<double>();
    e.config.lambda_l2 = c.at("lambda_l2").get<double>();
    e.config.dart.enabled = c.at("dart_enabled").get<bool>();
    e.config.dart.drop_rate = c.at("dart_drop_rate").get<double>();
    e.config.dart.empty_fallback = c.at("dart_empty_fallback").get<bool>();
    e.config.dart.rng_seed = c.at("dart_rng_seed").get<std::uint64_t>();
    return e;
}

}  // namespace peakcast
