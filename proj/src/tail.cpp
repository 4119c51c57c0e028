#include "tail.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrw {

namespace {

void wls_fit(TailEstimate& t, const std::vector<double>& w) {
    // weighted least squares of y = -logp on x = level^exponent
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i : t.used) {
        const double x = std::pow(t.levels[i], t.exponent);
        const double y = -t.logp[i];
        sw += w[i];
        sx += w[i] * x;
        sy += w[i] * y;
        sxx += w[i] * x * x;
        sxy += w[i] * x * y;
        syy += w[i] * y * y;
    }
    const double det = sw * sxx - sx * sx;
    if (t.used.size() < 2 || det <= 0.0)
        throw std::runtime_error("tail fit: need at least two usable levels");
    t.slope = (sw * sxy - sx * sy) / det;
    t.intercept = (sy - t.slope * sx) / sw;
    t.slope_se = std::sqrt(sw / det);
    // r^2 with the same weights
    const double ybar = sy / sw;
    double ss_tot = 0, ss_res = 0;
    for (int i : t.used) {
        const double x = std::pow(t.levels[i], t.exponent);
        const double y = -t.logp[i];
        const double f = t.intercept + t.slope * x;
        ss_tot += w[i] * (y - ybar) * (y - ybar);
        ss_res += w[i] * (y - f) * (y - f);
    }
    t.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

}  // namespace

TailEstimate fit_tail_counts(const std::vector<double>& levels,
                             const std::vector<long>& counts, long samples,
                             double exponent, int min_exceed, int min_levels) {
    if (levels.size() != counts.size())
        throw std::invalid_argument("fit_tail_counts: levels/counts size mismatch");
    TailEstimate t;
    t.levels = levels;
    t.samples = samples;
    t.exponent = exponent;
    std::vector<double> w(levels.size(), 0.0);
    for (size_t i = 0; i < levels.size(); ++i) {
        t.exceed.push_back(counts[i]);
        if (counts[i] > 0) {
            const double phat = double(counts[i]) / double(samples);
            t.logp.push_back(std::log(phat));
            // delta method: var(log phat) ~ (1 - p) / (N p)
            const double v = (1.0 - phat) / (double(samples) * phat);
            t.se.push_back(std::sqrt(v));
            if (counts[i] >= min_exceed) {
                t.used.push_back(static_cast<int>(i));
                w[i] = 1.0 / v;
            }
        } else {
            t.logp.push_back(-std::numeric_limits<double>::infinity());
            t.se.push_back(std::numeric_limits<double>::infinity());
        }
    }
    if (static_cast<int>(t.used.size()) < min_levels)
        throw std::runtime_error("insufficient-tail: fewer than " + std::to_string(min_levels) +
                                 " usable levels");
    wls_fit(t, w);
    return t;
}

TailEstimate fit_tail_exact(const std::vector<double>& levels,
                            const std::vector<double>& tail_probs, double exponent,
                            double min_prob) {
    if (levels.size() != tail_probs.size())
        throw std::invalid_argument("fit_tail_exact: levels/probs size mismatch");
    TailEstimate t;
    t.levels = levels;
    t.samples = -1;
    t.exponent = exponent;
    std::vector<double> w(levels.size(), 0.0);
    for (size_t i = 0; i < levels.size(); ++i) {
        t.exceed.push_back(-1);
        if (tail_probs[i] > min_prob) {
            t.logp.push_back(std::log(tail_probs[i]));
            t.se.push_back(0.0);
            t.used.push_back(static_cast<int>(i));
            w[i] = 1.0;
        } else {
            t.logp.push_back(-std::numeric_limits<double>::infinity());
            t.se.push_back(std::numeric_limits<double>::infinity());
        }
    }
    if (t.used.size() < 2) throw std::runtime_error("insufficient-tail: too few positive levels");
    wls_fit(t, w);
    return t;
}

std::vector<double> local_slopes(const TailEstimate& t) {
    std::vector<double> s;
    for (size_t k = 1; k < t.used.size(); ++k) {
        const int i = t.used[k - 1], j = t.used[k];
        const double dx = std::pow(t.levels[j], t.exponent) - std::pow(t.levels[i], t.exponent);
        s.push_back((t.logp[i] - t.logp[j]) / dx);
    }
    return s;
}

}  // namespace rrw
