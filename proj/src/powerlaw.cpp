#include "kg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kg {

namespace {

// Hurwitz zeta via Euler-Maclaurin; accurate to ~1e-13 for s in (1, 30].
double hurwitz_zeta(double s, double q) {
    constexpr int kDirectTerms = 24;
    double sum = 0.0;
    for (int k = 0; k < kDirectTerms; ++k) sum += std::pow(q + k, -s);
    double tail_base = q + kDirectTerms;
    sum += std::pow(tail_base, 1.0 - s) / (s - 1.0);
    sum += 0.5 * std::pow(tail_base, -s);
    sum += s * std::pow(tail_base, -s - 1.0) / 12.0;
    sum -= s * (s + 1.0) * (s + 2.0) * std::pow(tail_base, -s - 3.0) / 720.0;
    sum += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * std::pow(tail_base, -s - 5.0) /
           30240.0;
    return sum;
}

// log-likelihood of the discrete power law at exponent alpha for a tail with
// n observations, sum_log = sum of ln(x_i), cutoff x_min
double power_law_loglik(double alpha, double sum_log, std::size_t n, std::int64_t x_min) {
    return -static_cast<double>(n) * std::log(hurwitz_zeta(alpha, static_cast<double>(x_min))) -
           alpha * sum_log;
}

// concave in alpha, so golden-section search suffices
double fit_alpha(double sum_log, std::size_t n, std::int64_t x_min) {
    double lo = 1.000001, hi = 30.0;
    constexpr double kGolden = 0.61803398874989484;
    double a = hi - kGolden * (hi - lo);
    double b = lo + kGolden * (hi - lo);
    double fa = power_law_loglik(a, sum_log, n, x_min);
    double fb = power_law_loglik(b, sum_log, n, x_min);
    while (hi - lo > 1e-9) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + kGolden * (hi - lo);
            fb = power_law_loglik(b, sum_log, n, x_min);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - kGolden * (hi - lo);
            fa = power_law_loglik(a, sum_log, n, x_min);
        }
    }
    return 0.5 * (lo + hi);
}

// two-sided tail probability of a standard normal
double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

} // namespace

PowerLawFit fit_power_law(const std::vector<std::int64_t>& samples) {
    if (samples.size() < 50)
        throw Error("fit_power_law: need at least 50 observations, got " +
                    std::to_string(samples.size()));
    std::vector<std::int64_t> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 1) throw Error("fit_power_law: observations must be positive");
    if (sorted.front() == sorted.back())
        throw Error("fit_power_law: all observations equal, exponent diverges");

    std::vector<std::int64_t> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    // candidate cutoffs must leave a usable tail
    constexpr std::size_t kMinTail = 10;
    PowerLawFit best;
    bool found = false;
    for (std::int64_t x_min : distinct) {
        auto tail_begin = std::lower_bound(sorted.begin(), sorted.end(), x_min);
        std::size_t n_tail = static_cast<std::size_t>(sorted.end() - tail_begin);
        if (n_tail < kMinTail) break;
        if (*tail_begin == sorted.back()) break; // single distinct value in tail

        double sum_log = 0.0;
        for (auto it = tail_begin; it != sorted.end(); ++it)
            sum_log += std::log(static_cast<double>(*it));
        double alpha = fit_alpha(sum_log, n_tail, x_min);

        // KS distance between the empirical tail CDF and the fitted CDF
        double zeta_min = hurwitz_zeta(alpha, static_cast<double>(x_min));
        double ks = 0.0;
        auto it = tail_begin;
        while (it != sorted.end()) {
            std::int64_t value = *it;
            auto next = std::upper_bound(it, sorted.end(), value);
            double empirical =
                static_cast<double>(next - tail_begin) / static_cast<double>(n_tail);
            double fitted =
                1.0 - hurwitz_zeta(alpha, static_cast<double>(value + 1)) / zeta_min;
            ks = std::max(ks, std::abs(empirical - fitted));
            it = next;
        }

        if (!found || ks < best.ks_distance) {
            found = true;
            best.alpha = alpha;
            best.x_min = x_min;
            best.n_tail = static_cast<std::int64_t>(n_tail);
            best.ks_distance = ks;
            best.sigma_alpha = (alpha - 1.0) / std::sqrt(static_cast<double>(n_tail));
        }
    }
    if (!found) throw Error("fit_power_law: no usable cutoff (tail too small)");

    // Likelihood-ratio test against a discrete exponential on the same tail.
    // The ratio is normalized Vuong-style; positive favors the power law.
    auto tail_begin = std::lower_bound(sorted.begin(), sorted.end(), best.x_min);
    std::size_t n = static_cast<std::size_t>(sorted.end() - tail_begin);
    double mean_excess = 0.0;
    for (auto it = tail_begin; it != sorted.end(); ++it)
        mean_excess += static_cast<double>(*it - best.x_min);
    mean_excess /= static_cast<double>(n);
    // geometric on {x_min, x_min+1, ...}: p(x) = (1-q) q^(x-x_min), MLE below
    double q_geo = mean_excess / (1.0 + mean_excess);
    q_geo = std::clamp(q_geo, 1e-12, 1.0 - 1e-12);
    double log_q = std::log(q_geo);
    double log_1mq = std::log(1.0 - q_geo);

    double zeta_min = hurwitz_zeta(best.alpha, static_cast<double>(best.x_min));
    double sum_d = 0.0, sum_d2 = 0.0;
    for (auto it = tail_begin; it != sorted.end(); ++it) {
        double x = static_cast<double>(*it);
        double ll_pl = -best.alpha * std::log(x) - std::log(zeta_min);
        double ll_exp = log_1mq + (x - static_cast<double>(best.x_min)) * log_q;
        double d = ll_pl - ll_exp;
        sum_d += d;
        sum_d2 += d * d;
    }
    double mean_d = sum_d / static_cast<double>(n);
    double var_d = sum_d2 / static_cast<double>(n) - mean_d * mean_d;
    double sd = std::sqrt(std::max(var_d, 1e-300));
    best.loglik_ratio = sum_d / (sd * std::sqrt(static_cast<double>(n)));
    best.p_value = normal_two_sided_p(best.loglik_ratio);
    return best;
}

std::vector<CcdfRow> power_law_ccdf(const std::vector<std::int64_t>& samples,
                                    const PowerLawFit& fit) {
    std::vector<std::int64_t> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    auto tail_begin = std::lower_bound(sorted.begin(), sorted.end(), fit.x_min);
    std::size_t n_tail = static_cast<std::size_t>(sorted.end() - tail_begin);
    if (n_tail == 0) return {};

    double zeta_min = hurwitz_zeta(fit.alpha, static_cast<double>(fit.x_min));
    std::vector<CcdfRow> rows;
    auto it = tail_begin;
    while (it != sorted.end()) {
        std::int64_t value = *it;
        auto next = std::upper_bound(it, sorted.end(), value);
        CcdfRow row;
        row.degree = value;
        row.empirical = static_cast<double>(sorted.end() - it) / static_cast<double>(n_tail);
        row.fitted = hurwitz_zeta(fit.alpha, static_cast<double>(value)) / zeta_min;
        rows.push_back(row);
        it = next;
    }
    return rows;
}

} // namespace kg
