#include "peakcast/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace peakcast {

HourlySeries aggregate_series(const HourlySeries& s, int k) {
    if (k < 1) throw std::runtime_error("aggregate_series: scale must be >= 1");
    if (k == 1) return s;
    if (24 % (k * s.step_hours) != 0)
        throw std::runtime_error("aggregate_series: scale " + std::to_string(k * s.step_hours) +
                                 " does not divide 24");
    if ((s.start.hour - 1) % (k * s.step_hours) != 0)
        throw std::runtime_error("aggregate_series: series start " + s.start.to_string() +
                                 " is not aligned to " + std::to_string(k * s.step_hours) +
                                 "-hour blocks");
    if (s.size() % static_cast<std::size_t>(k) != 0)
        throw std::runtime_error("aggregate_series: length " + std::to_string(s.size()) +
                                 " is not a multiple of " + std::to_string(k));
    HourlySeries out;
    out.start = s.start;
    out.name = s.name;
    out.step_hours = s.step_hours * k;
    out.values.reserve(s.size() / k);
    for (std::size_t b = 0; b < s.size(); b += k) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i) acc += s.values[b + i];
        out.values.push_back(acc);
    }
    return out;
}

HierarchyStructure build_summing_matrix(std::span<const int> scales, int bottom_len) {
    if (bottom_len < 1) throw std::runtime_error("build_summing_matrix: empty bottom level");
    std::vector<int> sorted(scales.begin(), scales.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<int>());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.empty() || sorted.back() != 1)
        throw std::runtime_error("build_summing_matrix: scales must include the bottom scale 1");
    for (int k : sorted)
        if (k < 1 || bottom_len % k != 0)
            throw std::runtime_error("build_summing_matrix: scale " + std::to_string(k) +
                                     " does not divide the day length " +
                                     std::to_string(bottom_len));

    HierarchyStructure hs;
    hs.scales = sorted;
    hs.bottom_len = bottom_len;
    for (int k : sorted) {
        const int blocks = bottom_len / k;
        for (int b = 0; b < blocks; ++b) {
            std::vector<std::uint8_t> row(bottom_len, 0);
            for (int i = 0; i < k; ++i) row[b * k + i] = 1;
            hs.summing.push_back(std::move(row));
            hs.node_labels.push_back("s" + std::to_string(k) + "_b" + std::to_string(b + 1));
        }
    }
    return hs;
}

namespace {

/// Cholesky solve of the SPD system A x = b (A overwritten with its factor).
void cholesky_factor(std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j][j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j][k] * a[j][k];
        if (diag <= 0.0)
            throw std::runtime_error("reconcile: normal equations are not positive definite");
        a[j][j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i][j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i][k] * a[j][k];
            a[i][j] = v / a[j][j];
        }
    }
}

std::vector<double> cholesky_solve(const std::vector<std::vector<double>>& l,
                                   std::vector<double> b) {
    const std::size_t n = l.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l[i][k] * b[k];
        b[i] /= l[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= l[k][i] * b[k];
        b[i] /= l[i][i];
    }
    return b;
}

}  // namespace

ReconciledForecasts reconcile(const BaseForecasts& base, const HierarchyStructure& hs) {
    const std::size_t rows = hs.n_rows();
    const std::size_t m = static_cast<std::size_t>(hs.bottom_len);
    if (base.mean.size() != rows || base.var.size() != rows)
        throw std::runtime_error("reconcile: base forecast size does not match the hierarchy (" +
                                 std::to_string(base.mean.size()) + " vs " + std::to_string(rows) +
                                 " nodes)");
    for (double v : base.var)
        if (!(v > 0.0)) throw std::runtime_error("reconcile: base variances must be > 0");

    // M = S' W^-1 S,   rhs = S' W^-1 yhat
    std::vector<std::vector<double>> mat(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double inv_w = 1.0 / base.var[r];
        const auto& srow = hs.summing[r];
        for (std::size_t i = 0; i < m; ++i) {
            if (!srow[i]) continue;
            rhs[i] += inv_w * base.mean[r];
            for (std::size_t j = i; j < m; ++j)
                if (srow[j]) mat[i][j] += inv_w;
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) mat[i][j] = mat[j][i];

    auto factor = mat;
    cholesky_factor(factor);
    const std::vector<double> bottom = cholesky_solve(factor, rhs);

    // variances: diag(S M^-1 S') via one solve per distinct structure row
    ReconciledForecasts out;
    out.mean.resize(rows);
    out.var.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& srow = hs.summing[r];
        std::vector<double> s(m, 0.0);
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (srow[i]) {
                s[i] = 1.0;
                mean += bottom[i];
            }
        const std::vector<double> x = cholesky_solve(factor, s);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (srow[i]) var += x[i];
        out.mean[r] = mean;
        out.var[r] = var;
    }
    return out;
}

DistForecast reconcile_horizon(const std::map<int, DistForecast>& per_scale,
                               const HierarchyStructure& hs,
                               std::vector<ReconciliationRow>* report) {
    if (per_scale.count(1) == 0)
        throw std::runtime_error("reconcile_horizon: bottom-scale forecast (scale 1) missing");
    const DistForecast& bottom = per_scale.at(1);
    const std::size_t bl = static_cast<std::size_t>(hs.bottom_len);
    if (bottom.size() % bl != 0)
        throw std::runtime_error("reconcile_horizon: bottom forecast does not cover whole days");
    const std::size_t n_days = bottom.size() / bl;

    for (int k : hs.scales) {
        auto it = per_scale.find(k);
        if (it == per_scale.end())
            throw std::runtime_error("reconcile_horizon: no forecast for scale " +
                                     std::to_string(k));
        if (it->second.size() * static_cast<std::size_t>(k) != bottom.size())
            throw std::runtime_error("reconcile_horizon: scale " + std::to_string(k) +
                                     " covers a different horizon than the bottom scale");
    }

    DistForecast out;
    out.start = bottom.start;
    out.mean.reserve(bottom.size());
    out.stddev.reserve(bottom.size());

    for (std::size_t d = 0; d < n_days; ++d) {
        BaseForecasts base;
        base.mean.reserve(hs.n_rows());
        base.var.reserve(hs.n_rows());
        for (int k : hs.scales) {
            const DistForecast& f = per_scale.at(k);
            const std::size_t blocks = bl / static_cast<std::size_t>(k);
            for (std::size_t b = 0; b < blocks; ++b) {
                const std::size_t idx = d * blocks + b;
                base.mean.push_back(f.mean[idx]);
                base.var.push_back(f.stddev[idx] * f.stddev[idx]);
            }
        }
        const ReconciledForecasts rec = reconcile(base, hs);
        if (report)
            for (std::size_t r = 0; r < hs.n_rows(); ++r)
                report->push_back({static_cast<int>(d), hs.node_labels[r], base.mean[r],
                                   base.var[r], rec.mean[r], rec.var[r]});
        const std::size_t off = hs.bottom_offset();
        for (std::size_t i = 0; i < bl; ++i) {
            out.mean.push_back(rec.mean[off + i]);
            out.stddev.push_back(std::sqrt(rec.var[off + i]));
        }
    }
    return out;
}

}  // namespace peakcast
