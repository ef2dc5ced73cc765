#include "peakcast/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace peakcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for (cluster keyed by its smallest column, repetition); keyed
/// this way a singleton cluster and plain per-feature PFI draw identical
/// permutations under the same top-level seed.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t key, std::uint64_t rep) {
    return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc908ULL) ^ splitmix64(key * 2654435761ULL) ^
                      splitmix64(rep + 0x243f6a8885a308d3ULL));
}

void fisher_yates(std::span<std::size_t> idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return kNaN;
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // average 1-based rank
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double CorrelationMatrix::distance(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    const double r = rho[i][j];
    if (std::isnan(r)) return 1.0;
    return 1.0 - std::abs(r);
}

CorrelationMatrix correlation_matrix(const FeatureMatrix& fm, CorrMethod method) {
    const std::size_t d = fm.n_cols();
    CorrelationMatrix cm;
    cm.names = fm.names;
    cm.rho.assign(d, std::vector<double>(d, 0.0));

    // Common fast path: every column shares one valid-row set (lag/rolling
    // warm-ups produce exactly this), so ranks can be computed per column.
    std::vector<std::size_t> valid;
    for (std::size_t r = 0; r < fm.rows; ++r)
        if (fm.row_valid(r)) valid.push_back(r);
    bool uniform = true;
    for (std::size_t c = 0; c < d && uniform; ++c) {
        std::size_t miss_count = 0;
        for (std::size_t r = 0; r < fm.rows; ++r) miss_count += fm.miss[c][r] ? 1 : 0;
        uniform = miss_count == fm.rows - valid.size();
    }

    auto column_view = [&](std::size_t c, const std::vector<std::size_t>& rows) {
        std::vector<double> v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) v[i] = fm.cols[c][rows[i]];
        return v;
    };

    if (uniform) {
        if (valid.size() < 2) throw std::runtime_error("correlation_matrix: fewer than 2 valid rows");
        std::vector<std::vector<double>> data(d);
        for (std::size_t c = 0; c < d; ++c) {
            data[c] = column_view(c, valid);
            if (method == CorrMethod::Spearman) data[c] = average_ranks(data[c]);
        }
        for (std::size_t i = 0; i < d; ++i) {
            cm.rho[i][i] = 1.0;
            for (std::size_t j = i + 1; j < d; ++j)
                cm.rho[i][j] = cm.rho[j][i] = pearson(data[i], data[j]);
        }
        return cm;
    }

    for (std::size_t i = 0; i < d; ++i) {
        cm.rho[i][i] = 1.0;
        for (std::size_t j = i + 1; j < d; ++j) {
            std::vector<std::size_t> both;
            for (std::size_t r = 0; r < fm.rows; ++r)
                if (!fm.miss[i][r] && !fm.miss[j][r]) both.push_back(r);
            if (both.size() < 2)
                throw std::runtime_error("correlation_matrix: fewer than 2 shared rows for '" +
                                         fm.names[i] + "' and '" + fm.names[j] + "'");
            std::vector<double> a = column_view(i, both), b = column_view(j, both);
            if (method == CorrMethod::Spearman) {
                a = average_ranks(a);
                b = average_ranks(b);
            }
            cm.rho[i][j] = cm.rho[j][i] = pearson(a, b);
        }
    }
    return cm;
}

std::vector<LinkageMerge> linkage(const CorrelationMatrix& cm) {
    const std::size_t n = cm.size();
    std::vector<LinkageMerge> merges;
    if (n < 2) return merges;

    // active clusters: id, size, and pairwise average-linkage distances
    struct Cluster {
        int id;
        int size;
    };
    std::vector<Cluster> act;
    std::vector<std::vector<double>> dist(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        act.push_back({static_cast<int>(i), 1});
        for (std::size_t j = 0; j < n; ++j) dist[i][j] = cm.distance(i, j);
    }

    int next_id = static_cast<int>(n);
    while (act.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < act.size(); ++i)
            for (std::size_t j = i + 1; j < act.size(); ++j)
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
        LinkageMerge m;
        m.left = std::min(act[bi].id, act[bj].id);
        m.right = std::max(act[bi].id, act[bj].id);
        m.distance = best;
        m.size = act[bi].size + act[bj].size;
        // Lance-Williams update for average linkage
        const double wi = act[bi].size, wj = act[bj].size;
        for (std::size_t k = 0; k < act.size(); ++k) {
            if (k == bi || k == bj) continue;
            dist[bi][k] = dist[k][bi] = (wi * dist[bi][k] + wj * dist[bj][k]) / (wi + wj);
        }
        act[bi] = {next_id++, m.size};
        act.erase(act.begin() + bj);
        // compact the distance matrix by dropping row/col bj
        dist.erase(dist.begin() + bj);
        for (auto& row : dist) row.erase(row.begin() + bj);
        merges.push_back(m);
    }
    return merges;
}

std::vector<FeatureCluster> cluster_features(const CorrelationMatrix& cm, double threshold) {
    return flat_clusters(linkage(cm), cm.names, threshold);
}

std::vector<FeatureCluster> flat_clusters(const std::vector<LinkageMerge>& merges,
                                          const std::vector<std::string>& names,
                                          double threshold) {
    if (!(threshold > 0.0 && threshold < 2.0))
        throw std::runtime_error("cluster_features: threshold must be in (0,2)");
    const std::size_t n = names.size();

    // union-find over leaf ids, applying merges with distance <= threshold
    std::vector<int> parent(n + merges.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    int next_id = static_cast<int>(n);
    for (const auto& m : merges) {
        const int created = next_id++;
        if (m.distance <= threshold) {
            parent[find(m.left)] = created;
            parent[find(m.right)] = created;
        }
    }

    std::map<int, std::vector<int>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(static_cast<int>(i))].push_back(i);

    std::vector<FeatureCluster> clusters;
    for (auto& [root, cols] : groups) {
        FeatureCluster fc;
        fc.member_cols = cols;  // already ascending (leaves visited in order)
        for (int c : cols) fc.members.push_back(names[c]);
        clusters.push_back(std::move(fc));
    }
    std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
        return a.member_cols.front() < b.member_cols.front();
    });
    for (std::size_t i = 0; i < clusters.size(); ++i)
        clusters[i].id = static_cast<int>(i) + 1;
    return clusters;
}

ImportanceReport cpfi(const PredictFn& model, const FeatureMatrix& evalset,
                      std::span<const double> targets, const ScoreFn& scorer,
                      const std::vector<FeatureCluster>& clusters, int repetitions,
                      std::uint64_t rng_seed) {
    if (repetitions < 1) throw std::runtime_error("cpfi: repetitions must be >= 1");
    if (targets.size() != evalset.rows) throw std::runtime_error("cpfi: target length mismatch");
    std::vector<char> seen(evalset.n_cols(), 0);
    for (const auto& c : clusters)
        for (int col : c.member_cols) {
            if (col < 0 || col >= static_cast<int>(evalset.n_cols()))
                throw std::runtime_error("cpfi: cluster references unknown column");
            if (seen[col]) throw std::runtime_error("cpfi: overlapping clusters");
            seen[col] = 1;
        }
    for (std::size_t c = 0; c < evalset.n_cols(); ++c)
        if (!seen[c])
            throw std::runtime_error("cpfi: clusters do not cover column '" + evalset.names[c] +
                                     "'");

    // rows eligible for scoring and shuffling: fully valid rows only
    std::vector<std::size_t> valid;
    for (std::size_t r = 0; r < evalset.rows; ++r)
        if (evalset.row_valid(r)) valid.push_back(r);
    if (valid.empty()) throw std::runtime_error("cpfi: evaluation set has no valid rows");
    std::vector<double> y(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) y[i] = targets[valid[i]];

    auto score_matrix = [&](const FeatureMatrix& m) {
        const std::vector<double> full = model(m);
        std::vector<double> preds(valid.size());
        for (std::size_t i = 0; i < valid.size(); ++i) preds[i] = full[valid[i]];
        return scorer(preds, y);
    };

    const double baseline = score_matrix(evalset);

    FeatureMatrix work = evalset;  // evalset itself stays untouched
    ImportanceReport report;
    report.baseline_score = baseline;

    std::vector<std::size_t> perm(valid.size());
    for (const auto& cluster : clusters) {
        const std::uint64_t key = static_cast<std::uint64_t>(cluster.member_cols.front());
        std::vector<double> drops(repetitions);
        for (int k = 0; k < repetitions; ++k) {
            std::mt19937_64 rng(sub_seed(rng_seed, key, static_cast<std::uint64_t>(k)));
            std::iota(perm.begin(), perm.end(), 0);
            fisher_yates(perm, rng);
            for (int col : cluster.member_cols)
                for (std::size_t i = 0; i < valid.size(); ++i)
                    work.cols[col][valid[i]] = evalset.cols[col][valid[perm[i]]];
            drops[k] = baseline - score_matrix(work);
            for (int col : cluster.member_cols) work.cols[col] = evalset.cols[col];
        }
        ImportanceEntry e;
        e.cluster_id = cluster.id;
        e.members = cluster.members;
        e.repetitions = repetitions;
        double m = 0;
        for (double v : drops) m += v;
        m /= repetitions;
        e.mean_drop = m;
        if (repetitions > 1) {
            double ss = 0;
            for (double v : drops) ss += (v - m) * (v - m);
            e.std_drop = std::sqrt(ss / (repetitions - 1));
        }
        report.entries.push_back(std::move(e));
    }
    return report;
}

ImportanceReport pfi(const PredictFn& model, const FeatureMatrix& evalset,
                     std::span<const double> targets, const ScoreFn& scorer, int repetitions,
                     std::uint64_t rng_seed) {
    std::vector<FeatureCluster> singletons;
    for (std::size_t c = 0; c < evalset.n_cols(); ++c) {
        FeatureCluster fc;
        fc.id = static_cast<int>(c) + 1;
        fc.member_cols = {static_cast<int>(c)};
        fc.members = {evalset.names[c]};
        singletons.push_back(std::move(fc));
    }
    return cpfi(model, evalset, targets, scorer, singletons, repetitions, rng_seed);
}

std::set<int> informative_clusters(const ImportanceReport& report) {
    std::set<int> kept;
    for (const auto& e : report.entries) {
        if (e.repetitions < 2)
            throw std::runtime_error("informative_clusters: needs >= 2 repetitions");
        if (e.mean_drop - 3.0 * e.std_drop > 0.0) kept.insert(e.cluster_id);
    }
    return kept;
}

std::string importance_report_csv(const ImportanceReport& report,
                                  const std::set<int>& informative) {
    std::ostringstream out;
    out << "# peakcast 1\ncluster_id,members,mean_drop,std_drop,repetitions,kept\n";
    char buf[40];
    for (const auto& e : report.entries) {
        out << e.cluster_id << ",\"";
        for (std::size_t i = 0; i < e.members.size(); ++i)
            out << (i ? ";" : "") << e.members[i];
        out << "\",";
        std::snprintf(buf, sizeof(buf), "%.17g", e.mean_drop);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", e.std_drop);
        out << buf << "," << e.repetitions << "," << (informative.count(e.cluster_id) ? 1 : 0)
            << "\n";
    }
    return out.str();
}

std::string linkage_csv(const std::vector<LinkageMerge>& merges,
                        const std::vector<std::string>& leaf_names) {
    std::ostringstream out;
    out << "# peakcast 1\nstep,left,right,distance,size,left_name,right_name\n";
    char buf[40];
    const int n = static_cast<int>(leaf_names.size());
    for (std::size_t k = 0; k < merges.size(); ++k) {
        const auto& m = merges[k];
        std::snprintf(buf, sizeof(buf), "%.17g", m.distance);
        out << k << "," << m.left << "," << m.right << "," << buf << "," << m.size << ","
            << (m.left < n ? leaf_names[m.left] : "") << ","
            << (m.right < n ? leaf_names[m.right] : "") << "\n";
    }
    return out.str();
}

}  // namespace peakcast
