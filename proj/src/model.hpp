#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rng.hpp"

namespace rrw {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Family { TwoPoint, Lattice, Gaussian, ExpShift };

// Light-tailed increment law U with negative mean. Exposes the log-MGF
// and enough analytic structure (derivatives, domain endpoints, essential
// range) for the conjugate machinery and the samplers.
struct IncrementModel {
    Family family;
    std::vector<double> params;

    double mu = 0.0;           // E U
    double theta_minus = -kInf;
    double theta_plus = kInf;  // MGF finite on (theta_minus, theta_plus)
    bool supports_assumption2 = true;  // per-family metadata, not checked numerically

    // lattice representation (TwoPoint and Lattice families)
    std::vector<int> support;
    std::vector<double> prob;

    static IncrementModel two_point(double q);
    static IncrementModel gaussian(double mean, double sigma);
    static IncrementModel exp_shift(double rate, double shift);
    static IncrementModel lattice(const std::vector<int>& values,
                                  const std::vector<double>& probs);
    // family name + parameter list, as written in config files
    static IncrementModel make(const std::string& family,
                               const std::vector<double>& params);

    std::string family_name() const;
    bool is_lattice() const { return family == Family::TwoPoint || family == Family::Lattice; }
    double ess_inf() const;
    double ess_sup() const;
};

// log E e^{theta U}; +inf outside (theta_minus, theta_plus).
double log_mgf(const IncrementModel& m, double theta);
// derivatives, valid strictly inside the finiteness domain
double log_mgf_grad(const IncrementModel& m, double theta);
double log_mgf_hess(const IncrementModel& m, double theta);

enum class ConjugateMode { Analytic, Numeric };

struct ConvexConjugate {
    const IncrementModel* model;
    ConjugateMode mode = ConjugateMode::Analytic;
    double tol = 1e-12;
};

// Lambda*(v) = sup_theta { theta v - Lambda(theta) }, clamped at 0 from
// below so the exact zero at v = mu survives rounding.
double legendre(const ConvexConjugate& conj, double v);
// maximizing theta; requires v strictly inside the essential range
double legendre_grad(const ConvexConjugate& conj, double v);

// positive root of Lambda(theta) = 0, or theta_plus when Lambda stays
// negative on all of (0, theta_plus)
double tilt_root_beta(const IncrementModel& m);

std::vector<double> sample_increments(const IncrementModel& m, long count,
                                      std::uint64_t seed, std::uint64_t stream);
double sample_one(const IncrementModel& m, RngStream& rng);

struct AssumptionCheck {
    std::string name;
    bool pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

ValidationReport validate_assumptions(const IncrementModel& m);

}  // namespace rrw
