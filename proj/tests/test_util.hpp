#pragma once

// Shared oracles and helpers. Everything here recomputes expected values
// from first principles, independent of the library's implementation path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "peakcast/core.hpp"

namespace testutil {

/// Small deterministic generator for test data.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 1) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        const double u = uniform(), v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

private:
    std::uint64_t state_;
};

inline double erf_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

/// CRPS by direct numerical integration of the defining integral
/// int (F(x) - 1[x >= y])^2 dx. The integrand jumps at x = y, so the
/// bracket is split there and each smooth piece gets Simpson's rule.
inline double crps_by_integration(double mu, double sigma, double y) {
    const double lo = std::min(mu - 14.0 * sigma, y - sigma);
    const double hi = std::max(mu + 14.0 * sigma, y + sigma);
    auto simpson = [&](double a, double b, bool below_y) {
        const int n = 20000;  // even
        const double h = (b - a) / n;
        auto f = [&](double x) {
            const double F = erf_cdf((x - mu) / sigma);
            const double g = below_y ? F : F - 1.0;
            return g * g;
        };
        double acc = f(a) + f(b);
        for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    return simpson(lo, y, true) + simpson(y, hi, false);
}

/// Average 1-based ranks by the O(n^2) counting definition.
inline std::vector<double> ranks_by_counting(std::span<const double> x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] < x[i]) ++less;
            if (x[j] == x[i]) ++equal;
        }
        r[i] = static_cast<double>(less) + 0.5 * static_cast<double>(equal - 1) + 1.0;
    }
    return r;
}

inline double pearson_direct(std::span<const double> a, std::span<const double> b) {
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
    return sab / std::sqrt(saa * sbb);
}

/// Exhaustive split search: every (feature, midpoint) pair scored by the
/// exact gain formula. Returns the best (gain, feature, threshold) with the
/// same deterministic tie-breaking the spec requires.
struct BestSplit {
    double gain = -1.0;
    int feature = -1;
    double threshold = 0.0;
    double left_value = 0.0;
    double right_value = 0.0;
};

inline BestSplit exhaustive_best_split(const std::vector<std::vector<double>>& cols,
                                       std::span<const double> g, std::span<const double> h,
                                       std::span<const double> w, double lambda,
                                       double min_weight) {
    const std::size_t n = g.size();
    double gt = 0, ht = 0;
    for (std::size_t i = 0; i < n; ++i) {
        gt += w[i] * g[i];
        ht += w[i] * h[i];
    }
    auto score = [&](double gs, double hs) {
        return hs + lambda > 0 ? gs * gs / (hs + lambda) : 0.0;
    };
    double w_total = 0;
    for (std::size_t i = 0; i < n; ++i) w_total += w[i];
    BestSplit best;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        std::vector<double> uniq(cols[c].begin(), cols[c].end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (std::size_t k = 0; k + 1 < uniq.size(); ++k) {
            const double thr = uniq[k] + (uniq[k + 1] - uniq[k]) / 2.0;
            double gl = 0, hl = 0, wl = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (cols[c][i] < thr) {
                    gl += w[i] * g[i];
                    hl += w[i] * h[i];
                    wl += w[i];
                }
            if (wl < min_weight || w_total - wl < min_weight) continue;
            const double gain = score(gl, hl) + score(gt - gl, ht - hl) - score(gt, ht);
            const bool better =
                gain > best.gain ||
                (gain == best.gain &&
                 (static_cast<int>(c) < best.feature ||
                  (static_cast<int>(c) == best.feature && thr < best.threshold)));
            if (better) {
                best = {gain, static_cast<int>(c), thr, -gl / (hl + lambda),
                        -(gt - gl) / (ht - hl + lambda)};
            }
        }
    }
    return best;
}

inline peakcast::HourlySeries make_series(const std::string& name, std::vector<double> values,
                                          int year = 2002, int month = 1, int day = 1) {
    peakcast::HourlySeries s;
    s.start = {year, month, day, 1};
    s.values = std::move(values);
    s.name = name;
    return s;
}

}  // namespace testutil
