#pragma once

#include <vector>

namespace rrw {

// Empirical (or exact) tail against a x^exponent abscissa, with the
// weighted least-squares slope of -log P over the usable levels.
struct TailEstimate {
    std::vector<double> levels;
    std::vector<double> logp;   // log P(value >= level); -inf when unobserved
    std::vector<double> se;     // se of logp (0 for exact tails)
    std::vector<long> exceed;   // exceedance counts (samples < 0 for exact tails)
    long samples = 0;
    double exponent = 0.5;      // abscissa transform: level^exponent

    std::vector<int> used;      // indices entering the fit
    double slope = 0.0;         // of -logp against level^exponent
    double slope_se = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// from exceedance counts out of `samples` trials; levels with fewer than
// `min_exceed` hits are excluded from the fit, and at least `min_levels`
// usable levels are required
TailEstimate fit_tail_counts(const std::vector<double>& levels,
                             const std::vector<long>& counts, long samples,
                             double exponent, int min_exceed, int min_levels = 4);

// from exact tail probabilities (no sampling error): plain least squares
TailEstimate fit_tail_exact(const std::vector<double>& levels,
                            const std::vector<double>& tail_probs, double exponent,
                            double min_prob = 0.0);

// local slopes of -log P between consecutive usable levels
std::vector<double> local_slopes(const TailEstimate& t);

}  // namespace rrw
