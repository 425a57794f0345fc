#include "stnas/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stnas::stats {

namespace {

// Sum over tie groups of g*(g-1)/2.
double tie_pair_count(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        const double g = double(j - i);
        total += g * (g - 1.0) / 2.0;
        i = j;
    }
    return total;
}

// Average ranks, 1-based; tied values share the mean rank of their group.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double mean_rank = (double(i) + double(j - 1)) / 2.0 + 1.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
        i = j;
    }
    return ranks;
}

}  // namespace

double kendall_tau(const Pairs& pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 samples");

    double concordant = 0.0, discordant = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = pairs[i].first;
        ys[i] = pairs[i].second;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            const double prod = dx * dy;
            if (prod > 0.0) concordant += 1.0;
            else if (prod < 0.0) discordant += 1.0;
        }
    }
    const double n0 = double(n) * double(n - 1) / 2.0;
    const double tx = tie_pair_count(xs);
    const double ty = tie_pair_count(ys);
    if (n0 == tx) throw std::invalid_argument("kendall_tau: all x values tied");
    if (n0 == ty) throw std::invalid_argument("kendall_tau: all y values tied");
    return (concordant - discordant) / std::sqrt((n0 - tx) * (n0 - ty));
}

double spearman_rho(const Pairs& pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) throw std::invalid_argument("spearman_rho: need at least 2 samples");

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = pairs[i].first;
        ys[i] = pairs[i].second;
    }
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);

    const double mean = (double(n) + 1.0) / 2.0;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("spearman_rho: all x values tied");
    if (syy == 0.0) throw std::invalid_argument("spearman_rho: all y values tied");
    return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlate(const std::vector<ScoredSample>& samples) {
    Pairs pairs;
    pairs.reserve(samples.size());
    for (const auto& s : samples) pairs.emplace_back(s.score, s.accuracy);
    return {kendall_tau(pairs), spearman_rho(pairs), samples.size()};
}

}  // namespace stnas::stats
