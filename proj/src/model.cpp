#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrw {

namespace {

// log cosh without overflow
double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace

IncrementModel IncrementModel::two_point(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("two-point: q must be in (0,1)");
    IncrementModel m;
    m.family = Family::TwoPoint;
    m.params = {q};
    m.mu = 2.0 * q - 1.0;
    m.theta_minus = -kInf;
    m.theta_plus = kInf;
    m.support = {1, -1};
    m.prob = {q, 1.0 - q};
    return m;
}

IncrementModel IncrementModel::gaussian(double mean, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be positive");
    IncrementModel m;
    m.family = Family::Gaussian;
    m.params = {mean, sigma};
    m.mu = mean;
    m.theta_minus = -kInf;
    m.theta_plus = kInf;
    return m;
}

IncrementModel IncrementModel::exp_shift(double rate, double shift) {
    if (!(rate > 0.0)) throw std::invalid_argument("exp-minus-constant: rate must be positive");
    IncrementModel m;
    m.family = Family::ExpShift;
    m.params = {rate, shift};
    m.mu = 1.0 / rate - shift;
    m.theta_minus = -kInf;
    m.theta_plus = rate;  // not attained
    return m;
}

IncrementModel IncrementModel::lattice(const std::vector<int>& values,
                                       const std::vector<double>& probs) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("lattice: values/probs size mismatch");
    double tot = 0.0, mean = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (!(probs[i] >= 0.0)) throw std::invalid_argument("lattice: negative probability");
        tot += probs[i];
        mean += values[i] * probs[i];
    }
    if (std::abs(tot - 1.0) > 1e-12) throw std::invalid_argument("lattice: probabilities must sum to 1");
    IncrementModel m;
    m.family = Family::Lattice;
    for (size_t i = 0; i < values.size(); ++i) {
        m.params.push_back(static_cast<double>(values[i]));
        m.params.push_back(probs[i]);
    }
    m.mu = mean;
    m.theta_minus = -kInf;
    m.theta_plus = kInf;
    m.support = values;
    m.prob = probs;
    return m;
}

IncrementModel IncrementModel::make(const std::string& family,
                                    const std::vector<double>& params) {
    if (family == "two-point") {
        if (params.size() != 1) throw std::invalid_argument("two-point takes 1 parameter (q)");
        return two_point(params[0]);
    }
    if (family == "gaussian") {
        if (params.size() != 2) throw std::invalid_argument("gaussian takes 2 parameters (mean sigma)");
        return gaussian(params[0], params[1]);
    }
    if (family == "exp-minus-constant") {
        if (params.size() != 2) throw std::invalid_argument("exp-minus-constant takes 2 parameters (rate shift)");
        return exp_shift(params[0], params[1]);
    }
    if (family == "lattice") {
        if (params.size() < 4 || params.size() % 2 != 0)
            throw std::invalid_argument("lattice takes value/prob pairs");
        std::vector<int> vals;
        std::vector<double> probs;
        for (size_t i = 0; i < params.size(); i += 2) {
            double v = params[i];
            if (v != std::floor(v)) throw std::invalid_argument("lattice values must be integers");
            vals.push_back(static_cast<int>(v));
            probs.push_back(params[i + 1]);
        }
        return lattice(vals, probs);
    }
    throw std::invalid_argument("unknown model family: " + family);
}

std::string IncrementModel::family_name() const {
    switch (family) {
        case Family::TwoPoint: return "two-point";
        case Family::Lattice: return "lattice";
        case Family::Gaussian: return "gaussian";
        case Family::ExpShift: return "exp-minus-constant";
    }
    return "?";
}

double IncrementModel::ess_inf() const {
    switch (family) {
        case Family::TwoPoint: return -1.0;
        case Family::Lattice: return *std::min_element(support.begin(), support.end());
        case Family::Gaussian: return -kInf;
        case Family::ExpShift: return -params[1];
    }
    return -kInf;
}

double IncrementModel::ess_sup() const {
    switch (family) {
        case Family::TwoPoint: return 1.0;
        case Family::Lattice: return *std::max_element(support.begin(), support.end());
        case Family::Gaussian: return kInf;
        case Family::ExpShift: return kInf;
    }
    return kInf;
}

double log_mgf(const IncrementModel& m, double theta) {
    switch (m.family) {
        case Family::TwoPoint: {
            const double q = m.params[0];
            // log(q e^t + (1-q) e^-t) = log(2 sqrt(q(1-q))) + logcosh(t + log(q/(1-q))/2)
            const double s = theta + 0.5 * std::log(q / (1.0 - q));
            return 0.5 * std::log(4.0 * q * (1.0 - q)) + log_cosh(s);
        }
        case Family::Lattice: {
            double best = -kInf;
            for (size_t i = 0; i < m.support.size(); ++i)
                best = std::max(best, theta * m.support[i]);
            double acc = 0.0;
            for (size_t i = 0; i < m.support.size(); ++i)
                acc += m.prob[i] * std::exp(theta * m.support[i] - best);
            return best + std::log(acc);
        }
        case Family::Gaussian: {
            const double mean = m.params[0], sigma = m.params[1];
            return mean * theta + 0.5 * sigma * sigma * theta * theta;
        }
        case Family::ExpShift: {
            const double r = m.params[0], c = m.params[1];
            if (theta >= r) return kInf;
            return -theta * c + std::log(r) - std::log(r - theta);
        }
    }
    return kInf;
}

double log_mgf_grad(const IncrementModel& m, double theta) {
    switch (m.family) {
        case Family::TwoPoint: {
            const double q = m.params[0];
            return std::tanh(theta + 0.5 * std::log(q / (1.0 - q)));
        }
        case Family::Lattice: {
            double best = -kInf;
            for (size_t i = 0; i < m.support.size(); ++i)
                best = std::max(best, theta * m.support[i]);
            double num = 0.0, den = 0.0;
            for (size_t i = 0; i < m.support.size(); ++i) {
                const double w = m.prob[i] * std::exp(theta * m.support[i] - best);
                num += m.support[i] * w;
                den += w;
            }
            return num / den;
        }
        case Family::Gaussian: {
            const double mean = m.params[0], sigma = m.params[1];
            return mean + sigma * sigma * theta;
        }
        case Family::ExpShift: {
            const double r = m.params[0], c = m.params[1];
            return -c + 1.0 / (r - theta);
        }
    }
    return 0.0;
}

double log_mgf_hess(const IncrementModel& m, double theta) {
    switch (m.family) {
        case Family::TwoPoint: {
            const double q = m.params[0];
            const double t = std::tanh(theta + 0.5 * std::log(q / (1.0 - q)));
            return 1.0 - t * t;
        }
        case Family::Lattice: {
            double best = -kInf;
            for (size_t i = 0; i < m.support.size(); ++i)
                best = std::max(best, theta * m.support[i]);
            double s0 = 0.0, s1 = 0.0, s2 = 0.0;
            for (size_t i = 0; i < m.support.size(); ++i) {
                const double w = m.prob[i] * std::exp(theta * m.support[i] - best);
                s0 += w;
                s1 += m.support[i] * w;
                s2 += double(m.support[i]) * m.support[i] * w;
            }
            const double mean = s1 / s0;
            return s2 / s0 - mean * mean;
        }
        case Family::Gaussian: {
            const double sigma = m.params[1];
            return sigma * sigma;
        }
        case Family::ExpShift: {
            const double r = m.params[0];
            const double d = r - theta;
            return 1.0 / (d * d);
        }
    }
    return 0.0;
}

namespace {

// interior evaluation bound next to a finite domain endpoint
double interior(double endpoint, bool from_below) {
    const double margin = 1e-12 * std::max(std::abs(endpoint), 1.0);
    return from_below ? endpoint - margin : endpoint + margin;
}

// Solve Lambda'(theta) = v inside (lo, hi) where the derivative already
// brackets v. Newton with bisection fallback.
double solve_grad_eq(const IncrementModel& m, double v, double lo, double hi, double tol) {
    double theta = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = log_mgf_grad(m, theta) - v;
        if (g > 0.0)
            hi = theta;
        else
            lo = theta;
        const double h = log_mgf_hess(m, theta);
        double step = (h > 0.0) ? g / h : 0.0;
        double next = theta - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - theta) <= tol * std::max(1.0, std::abs(theta))) return next;
        theta = next;
    }
    return theta;
}

double conjugate_numeric(const IncrementModel& m, double v, double tol) {
    // g(theta) = theta v - Lambda(theta) is concave with g'(theta) = v - Lambda'(theta).
    // Expand a bracket on Lambda'(theta) = v, then polish; if the slope never
    // reaches v before the domain endpoint (or an overflow cap), the supremum
    // is a limit and the capped evaluation is already within tolerance.
    const double cap = 700.0;
    double lo, hi;
    bool lo_open = std::isinf(m.theta_minus), hi_open = std::isinf(m.theta_plus);
    lo = lo_open ? -1.0 : interior(m.theta_minus, false);
    hi = hi_open ? 1.0 : interior(m.theta_plus, true);

    if (lo_open) {
        while (log_mgf_grad(m, lo) > v && lo > -cap) lo *= 2.0;
        lo = std::max(lo, -cap);
    }
    if (hi_open) {
        while (log_mgf_grad(m, hi) < v && hi < cap) hi *= 2.0;
        hi = std::min(hi, cap);
    }

    double theta;
    const double glo = log_mgf_grad(m, lo), ghi = log_mgf_grad(m, hi);
    if (glo >= v)
        theta = lo;  // supremum approached at the left end
    else if (ghi <= v)
        theta = hi;  // supremum approached at the right end
    else
        theta = solve_grad_eq(m, v, lo, hi, tol);

    const double val = theta * v - log_mgf(m, theta);
    if (!std::isfinite(val)) throw std::runtime_error("conjugate: numeric maximization failed");
    return std::max(val, 0.0);
}

double conjugate_analytic(const IncrementModel& m, double v) {
    switch (m.family) {
        case Family::TwoPoint: {
            const double q = m.params[0];
            if (v > 1.0 || v < -1.0) return kInf;
            if (v == 1.0) return -std::log(q);
            if (v == -1.0) return -std::log(1.0 - q);
            const double a = 0.5 * (1.0 + v), b = 0.5 * (1.0 - v);
            double val = 0.0;
            if (a > 0.0) val += a * std::log(a / q);
            if (b > 0.0) val += b * std::log(b / (1.0 - q));
            return std::max(val, 0.0);
        }
        case Family::Gaussian: {
            const double mean = m.params[0], sigma = m.params[1];
            const double d = v - mean;
            return 0.5 * d * d / (sigma * sigma);
        }
        case Family::ExpShift: {
            const double r = m.params[0], c = m.params[1];
            if (v <= -c) return kInf;
            const double w = r * (v + c);
            return std::max(w - 1.0 - std::log(w), 0.0);
        }
        case Family::Lattice:
            break;  // no closed form; fall through to numeric
    }
    return -1.0;  // sentinel: caller falls back to numeric
}

}  // namespace

double legendre(const ConvexConjugate& conj, double v) {
    const IncrementModel& m = *conj.model;
    // outside the closed essential range the supremum is infinite
    if (v > m.ess_sup() || v < m.ess_inf()) return kInf;
    if (conj.mode == ConjugateMode::Analytic) {
        const double a = conjugate_analytic(m, v);
        if (a >= 0.0) return a;
    }
    return conjugate_numeric(m, v, conj.tol);
}

double legendre_grad(const ConvexConjugate& conj, double v) {
    const IncrementModel& m = *conj.model;
    if (!(v > m.ess_inf() && v < m.ess_sup()))
        throw std::domain_error("legendre_grad: v outside the essential range of U");
    if (conj.mode == ConjugateMode::Analytic) {
        switch (m.family) {
            case Family::TwoPoint: {
                const double q = m.params[0];
                return 0.5 * std::log(((1.0 + v) * (1.0 - q)) / ((1.0 - v) * q));
            }
            case Family::Gaussian: {
                const double mean = m.params[0], sigma = m.params[1];
                return (v - mean) / (sigma * sigma);
            }
            case Family::ExpShift: {
                const double r = m.params[0], c = m.params[1];
                return r - 1.0 / (v + c);
            }
            case Family::Lattice:
                break;
        }
    }
    // numeric: root of Lambda'(theta) = v
    const double cap = 700.0;
    double lo = std::isinf(m.theta_minus) ? -1.0 : interior(m.theta_minus, false);
    double hi = std::isinf(m.theta_plus) ? 1.0 : interior(m.theta_plus, true);
    while (std::isinf(m.theta_minus) && log_mgf_grad(m, lo) > v && lo > -cap) lo *= 2.0;
    while (std::isinf(m.theta_plus) && log_mgf_grad(m, hi) < v && hi < cap) hi *= 2.0;
    lo = std::max(lo, -cap);
    hi = std::min(hi, cap);
    if (log_mgf_grad(m, lo) > v || log_mgf_grad(m, hi) < v)
        throw std::domain_error("legendre_grad: v not reached by Lambda' inside the domain");
    return solve_grad_eq(m, v, lo, hi, conj.tol);
}

double tilt_root_beta(const IncrementModel& m) {
    if (!(m.mu < 0.0)) throw std::invalid_argument("tilt_root_beta: requires E U < 0");
    // Lambda is convex with Lambda(0) = 0 and Lambda'(0) = mu < 0, so the
    // positive root is unique when it exists before theta_plus.
    double hi;
    if (std::isinf(m.theta_plus)) {
        hi = 1.0;
        while (log_mgf(m, hi) <= 0.0) {
            hi *= 2.0;
            if (hi > 1e6) throw std::runtime_error("tilt_root_beta: no sign change found");
        }
    } else {
        hi = interior(m.theta_plus, true);
        if (log_mgf(m, hi) < 0.0) return m.theta_plus;  // Lambda < 0 on all of (0, theta_plus)
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = log_mgf(m, mid);
        if (f > 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
    }
    // Newton polish from the bisection bracket
    double beta = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double f = log_mgf(m, beta);
        const double g = log_mgf_grad(m, beta);
        if (!(g > 0.0)) break;
        const double next = beta - f / g;
        if (next > lo && next < hi) beta = next;
    }
    return beta;
}

double sample_one(const IncrementModel& m, RngStream& rng) {
    switch (m.family) {
        case Family::TwoPoint:
            return rng.uniform() < m.params[0] ? 1.0 : -1.0;
        case Family::Lattice: {
            double u = rng.uniform();
            for (size_t i = 0; i + 1 < m.support.size(); ++i) {
                if (u < m.prob[i]) return m.support[i];
                u -= m.prob[i];
            }
            return m.support.back();
        }
        case Family::Gaussian:
            return m.params[0] + m.params[1] * rng.normal();
        case Family::ExpShift:
            return rng.exponential(m.params[0]) - m.params[1];
    }
    return 0.0;
}

std::vector<double> sample_increments(const IncrementModel& m, long count,
                                      std::uint64_t seed, std::uint64_t stream) {
    if (count < 0) throw std::invalid_argument("sample_increments: count must be >= 0");
    RngStream rng(seed, stream);
    std::vector<double> out(static_cast<size_t>(count));
    for (auto& x : out) x = sample_one(m, rng);
    return out;
}

ValidationReport validate_assumptions(const IncrementModel& m) {
    ValidationReport rep;
    auto add = [&rep](const std::string& name, bool pass, const std::string& detail) {
        rep.checks.push_back({name, pass, detail});
    };
    add("mean-negative", m.mu < 0.0, "E U = " + std::to_string(m.mu));
    add("mgf-domain", m.theta_minus < 0.0 && m.theta_plus > 0.0,
        "(theta-, theta+) = (" + std::to_string(m.theta_minus) + ", " +
            std::to_string(m.theta_plus) + ")");
    const double l0 = log_mgf(m, 0.0);
    add("log-mgf-zero", std::abs(l0) <= 1e-14, "Lambda(0) = " + std::to_string(l0));

    bool pos = false;
    switch (m.family) {
        case Family::TwoPoint: pos = m.params[0] > 0.0; break;
        case Family::Lattice: {
            for (size_t i = 0; i < m.support.size(); ++i)
                if (m.support[i] > 0 && m.prob[i] > 0.0) pos = true;
            break;
        }
        case Family::Gaussian: pos = true; break;
        case Family::ExpShift: pos = true; break;
    }
    add("positive-mass", pos, pos ? "P(U > 0) > 0" : "P(U > 0) = 0");
    add("tail-limits-metadata", m.supports_assumption2,
        m.supports_assumption2 ? "family satisfies the exact log-tail limits"
                               : "family flag unset");
    return rep;
}

}  // namespace rrw
