#include "cesim/proxy_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace cesim {

namespace {

double sample_variance(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return acc / (n - 1.0);
}

void check_pair_sizes(std::span<const double> x, std::span<const double> y, size_t min_n) {
    if (x.size() != y.size()) throw ValidationError("paired vectors differ in length");
    if (x.size() < min_n)
        throw ValidationError("need at least " + std::to_string(min_n) + " pairs");
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("non-finite value in sample");
    for (double v : y)
        if (!std::isfinite(v)) throw ValidationError("non-finite value in sample");
}

double students_t_two_tailed(double t, double dof) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t_distribution<double> dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

} // namespace

SnrReport snr(const PairedSample& s) {
    check_pair_sizes(s.full, s.proxy, 3);
    SnrReport r;
    r.n = s.size();
    r.sigma2_arch = sample_variance(s.full);
    std::vector<double> residual(s.size());
    for (size_t i = 0; i < s.size(); ++i) residual[i] = s.full[i] - s.proxy[i];
    r.sigma2_noise = sample_variance(residual);
    if (r.sigma2_noise <= 0.0) {
        r.infinite = true;
        r.snr = std::numeric_limits<double>::infinity();
    } else {
        r.snr = r.sigma2_arch / r.sigma2_noise;
    }
    return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    check_pair_sizes(x, y, 3);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw ValidationError("correlation undefined: a variable has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> x) {
    const size_t n = x.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0; // ranks are 1-based
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
        i = j + 1;
    }
    return ranks;
}

double spearman_p_from_rho(double rho, uint64_t n) {
    if (n < 3) throw ValidationError("need at least 3 pairs");
    if (!(rho >= -1.0 && rho <= 1.0)) throw ValidationError("rho outside [-1,1]");
    const double denom = 1.0 - rho * rho;
    if (denom <= 0.0) return 0.0;
    const double t = rho * std::sqrt((static_cast<double>(n) - 2.0) / denom);
    return students_t_two_tailed(t, static_cast<double>(n) - 2.0);
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    check_pair_sizes(x, y, 3);
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    SpearmanResult r;
    r.rho = pearson(rx, ry);
    r.p_two_tailed = spearman_p_from_rho(r.rho, x.size());
    return r;
}

double spearman_permutation_p(std::span<const double> x, std::span<const double> y,
                              uint64_t shuffles, rng::Stream rng) {
    check_pair_sizes(x, y, 3);
    const double observed = std::abs(spearman(x, y).rho);
    std::vector<double> yp(y.begin(), y.end());
    uint64_t at_least = 0;
    for (uint64_t s = 0; s < shuffles; ++s) {
        for (size_t i = yp.size(); i > 1; --i)
            std::swap(yp[i - 1], yp[rng.next_below(i)]);
        if (std::abs(spearman(x, yp).rho) >= observed - 1e-12) ++at_least;
    }
    return static_cast<double>(at_least + 1) / static_cast<double>(shuffles + 1);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    check_pair_sizes(x, y, 3);
    int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    const size_t n = x.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    const double n0 = static_cast<double>(concordant + discordant);
    const double denom = std::sqrt((n0 + ties_x) * (n0 + ties_y));
    if (denom <= 0.0)
        throw ValidationError("Kendall tau undefined: a variable has zero variance");
    return static_cast<double>(concordant - discordant) / denom;
}

std::vector<double> bonferroni(std::span<const double> p_values, size_t multiplier) {
    const double m = static_cast<double>(multiplier == 0 ? p_values.size() : multiplier);
    std::vector<double> out(p_values.begin(), p_values.end());
    for (double& p : out) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value outside [0,1]");
        p = std::min(1.0, p * m);
    }
    return out;
}

double rho_p_from_snr(double snr_value) {
    if (!(snr_value > 0.0)) throw ValidationError("snr must be > 0");
    return 1.0 / std::sqrt(1.0 + 1.0 / snr_value);
}

double rho_s_closed_form(double snr_value) {
    return (6.0 / std::numbers::pi) * std::asin(rho_p_from_snr(snr_value) / 2.0);
}

std::optional<double> rho_s_lower_bound(double snr_value) {
    if (snr_value < kRhoBoundConstant) return std::nullopt;
    return 1.0 - kRhoBoundConstant / snr_value;
}

PairedSample sample_bivariate(double snr_value, size_t n, rng::Stream rng,
                              std::optional<double> ceiling) {
    if (!(snr_value > 0.0)) throw ValidationError("snr must be > 0");
    if (n < 3) throw ValidationError("need n >= 3 pairs");
    const double sigma_noise = 1.0 / std::sqrt(snr_value); // sigma_arch fixed at 1
    PairedSample s;
    s.full.resize(n);
    s.proxy.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double q = rng.next_normal();
        const double qh = q + sigma_noise * rng.next_normal();
        s.full[i] = ceiling ? std::min(q, *ceiling) : q;
        s.proxy[i] = ceiling ? std::min(qh, *ceiling) : qh;
    }
    return s;
}

OrderingExperimentReport ordering_experiment(std::span<const double> snrs,
                                             std::span<const size_t> group_sizes,
                                             uint64_t replicates, rng::Stream rng) {
    if (snrs.size() < 2 || snrs.size() != group_sizes.size())
        throw ValidationError("ordering experiment needs >= 2 groups with sizes");
    const size_t g = snrs.size();
    const size_t top =
        static_cast<size_t>(std::max_element(snrs.begin(), snrs.end()) - snrs.begin());
    OrderingExperimentReport rep;
    rep.replicates = replicates;
    rep.ns_rate.assign(g, 0.0);
    rep.mean_rho.assign(g, 0.0);
    uint64_t top_matches = 0, full_matches = 0;
    for (uint64_t r = 0; r < replicates; ++r) {
        std::vector<double> rho(g), pv(g);
        for (size_t i = 0; i < g; ++i) {
            PairedSample s =
                sample_bivariate(snrs[i], group_sizes[i], rng.split(r * g + i));
            const auto sp = spearman(s.full, s.proxy);
            rho[i] = sp.rho;
            pv[i] = sp.p_two_tailed;
            rep.mean_rho[i] += sp.rho;
            if (sp.p_two_tailed > 0.05) rep.ns_rate[i] += 1.0;
        }
        if (std::max_element(rho.begin(), rho.end()) - rho.begin() ==
            static_cast<std::ptrdiff_t>(top))
            ++top_matches;
        bool full_ok = true;
        for (size_t i = 0; i < g && full_ok; ++i)
            for (size_t j = 0; j < g && full_ok; ++j)
                if (snrs[i] > snrs[j] && !(rho[i] > rho[j])) full_ok = false;
        if (full_ok) ++full_matches;
    }
    const double nrep = static_cast<double>(replicates);
    rep.top_group_match_rate = static_cast<double>(top_matches) / nrep;
    rep.full_order_match_rate = static_cast<double>(full_matches) / nrep;
    for (size_t i = 0; i < g; ++i) {
        rep.ns_rate[i] /= nrep;
        rep.mean_rho[i] /= nrep;
    }
    return rep;
}

CorrelationReport correlation_report(const PairedSample& s, size_t bonferroni_multiplier) {
    CorrelationReport r;
    r.n = s.size();
    r.pearson_r = pearson(s.full, s.proxy);
    const auto sp = spearman(s.full, s.proxy);
    r.spearman_rho = sp.rho;
    r.spearman_p = sp.p_two_tailed;
    r.kendall_tau = kendall_tau_b(s.proxy, s.full);
    r.bonferroni_p =
        bonferroni(std::span<const double>(&r.spearman_p, 1), bonferroni_multiplier)[0];
    return r;
}

} // namespace cesim
