#include "rrwlab/rrwlab.h"

#include <cstring>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "experiment.hpp"
#include "model.hpp"
#include "rates.hpp"
#include "sim.hpp"
#include "solver.hpp"

using namespace rrw;

struct rrw_model {
    IncrementModel m;
};

struct rrw_solution {
    VariationalSolution s;
};

namespace {

thread_local std::string g_error;

int set_error(rrw_status code, const char* what) {
    g_error = what;
    return code;
}

// map exceptions to status codes at the library boundary
template <class F>
int guarded(F&& f) {
    try {
        f();
        return RRW_OK;
    } catch (const std::domain_error& e) {
        return set_error(RRW_EDOMAIN, e.what());
    } catch (const std::invalid_argument& e) {
        return set_error(RRW_EINVAL, e.what());
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        if (msg.find("insufficient-tail") != std::string::npos)
            return set_error(RRW_ETAIL, e.what());
        if (msg.find("acceptance failed") != std::string::npos)
            return set_error(RRW_EVERIFY, e.what());
        if (msg.find("converge") != std::string::npos ||
            msg.find("no feasible") != std::string::npos ||
            msg.find("did not return") != std::string::npos)
            return set_error(RRW_ENOCONV, e.what());
        return set_error(RRW_EINTERNAL, e.what());
    } catch (const std::exception& e) {
        return set_error(RRW_EINTERNAL, e.what());
    }
}

}  // namespace

extern "C" {

const char* rrw_last_error(void) { return g_error.c_str(); }

void rrw_string_free(char* s) { delete[] s; }

void rrw_version(int* major, int* minor) {
    if (major) *major = 0;
    if (minor) *minor = 1;
}

int rrw_model_create(const char* family, const double* params, int nparams,
                     rrw_model** out) {
    if (!family || !out || (nparams > 0 && !params))
        return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        std::vector<double> ps(params, params + nparams);
        *out = new rrw_model{IncrementModel::make(family, ps)};
    });
}

void rrw_model_free(rrw_model* m) { delete m; }

int rrw_model_mean(const rrw_model* m, double* out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    *out = m->m.mu;
    return RRW_OK;
}

int rrw_model_log_mgf(const rrw_model* m, double theta, double* out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] { *out = log_mgf(m->m, theta); });
}

int rrw_model_conjugate(const rrw_model* m, double v, int analytic, double* out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        ConvexConjugate conj{&m->m, analytic ? ConjugateMode::Analytic : ConjugateMode::Numeric,
                             1e-12};
        *out = legendre(conj, v);
    });
}

int rrw_model_conjugate_grad(const rrw_model* m, double v, double* out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        ConvexConjugate conj{&m->m, ConjugateMode::Analytic, 1e-12};
        *out = legendre_grad(conj, v);
    });
}

int rrw_model_tilt_root(const rrw_model* m, double* out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] { *out = tilt_root_beta(m->m); });
}

int rrw_model_validate(const rrw_model* m, char* buf, size_t buflen, int* all_pass) {
    if (!m) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        const ValidationReport rep = validate_assumptions(m->m);
        std::string text;
        for (const auto& c : rep.checks)
            text += c.name + ": " + (c.pass ? "pass" : "FAIL") + " (" + c.detail + ")\n";
        if (buf && buflen > 0) {
            std::strncpy(buf, text.c_str(), buflen - 1);
            buf[buflen - 1] = '\0';
        }
        if (all_pass) *all_pass = rep.all_pass() ? 1 : 0;
    });
}

int rrw_model_sample(const rrw_model* m, long count, uint64_t seed, uint64_t stream,
                     double* out) {
    if (!m || (count > 0 && !out)) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        const auto xs = sample_increments(m->m, count, seed, stream);
        std::copy(xs.begin(), xs.end(), out);
    });
}

int rrw_solve_direct(const rrw_model* m, double p, double y, int grid, double level,
                     rrw_solution** out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        RateContext ctx(m->m, p);
        *out = new rrw_solution{solve_direct(ctx, y, grid, level)};
    });
}

int rrw_solve_shooting(const rrw_model* m, double p, double y, double level,
                       rrw_solution** out) {
    if (!m || !out) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        RateContext ctx(m->m, p);
        *out = new rrw_solution{solve_shooting(ctx, y, level)};
    });
}

void rrw_solution_free(rrw_solution* s) { delete s; }

double rrw_solution_value(const rrw_solution* s) { return s ? s->s.value : 0.0; }
double rrw_solution_z(const rrw_solution* s) { return s ? s->s.z : 0.0; }
double rrw_solution_ell(const rrw_solution* s) { return s ? s->s.ell : 0.0; }
double rrw_solution_horizon(const rrw_solution* s) { return s ? s->s.horizon : 0.0; }
double rrw_solution_area_residual(const rrw_solution* s) {
    return s ? s->s.diag.area_residual : 0.0;
}

int rrw_solution_path_size(const rrw_solution* s) {
    if (!s) return 0;
    return static_cast<int>(s->s.path.segs.size()) + 1;
}

int rrw_solution_path(const rrw_solution* s, double* t, double* xi, double* slope) {
    if (!s || !t || !xi || !slope) return set_error(RRW_EINVAL, "null argument");
    double tt = 0.0, x = s->s.path.start;
    size_t i = 0;
    for (const auto& seg : s->s.path.segs) {
        t[i] = tt;
        xi[i] = x;
        slope[i] = seg.slope;
        tt += seg.dur;
        x += seg.slope * seg.dur;
        ++i;
    }
    t[i] = tt;
    xi[i] = x;
    slope[i] = s->s.path.segs.empty() ? 0.0 : s->s.path.segs.back().slope;
    return RRW_OK;
}

int rrw_solve_bpi(const rrw_model* m, double p, int k, int grid, double* value,
                  double* argmin_y) {
    if (!m || !value) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        RateContext ctx(m->m, p);
        const BpiResult r = solve_Bpi(ctx, k, grid);
        *value = r.value;
        if (argmin_y) *argmin_y = r.argmin_y;
    });
}

int rrw_harvest_cycles(const rrw_model* m, long count, double p, uint64_t seed,
                       uint64_t stream, long* tau, double* W, double* peak) {
    if (!m || !tau || !W) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        const auto cs = harvest_cycles(m->m, count, p, seed, stream);
        for (size_t i = 0; i < cs.size(); ++i) {
            tau[i] = cs[i].tau;
            W[i] = cs[i].W;
            if (peak) peak[i] = cs[i].peak;
        }
    });
}

int rrw_estimate_lambda(const long* tau, const double* W, long n, double* lambda,
                        double* se) {
    if (!tau || !W || !lambda) return set_error(RRW_EINVAL, "null argument");
    return guarded([&] {
        std::vector<CycleRecord> cs(static_cast<size_t>(n));
        for (long i = 0; i < n; ++i) {
            cs[static_cast<size_t>(i)].tau = tau[i];
            cs[static_cast<size_t>(i)].W = W[i];
        }
        const LambdaEstimate e = estimate_lambda(cs);
        *lambda = e.value;
        if (se) *se = e.se;
    });
}

int rrw_run(const char* cmd, const char* config_text, const char* extra_lines,
            char** summary) {
    if (!cmd) return set_error(RRW_EINVAL, "null subcommand");
    return guarded([&] {
        std::string text = config_text ? config_text : "";
        if (extra_lines && *extra_lines) {
            text += '\n';
            text += extra_lines;
            text += '\n';
        }
        const ExperimentConfig cfg = ExperimentConfig::parse(text);
        const std::string out = run_command(cmd, cfg);
        if (summary) {
            char* buf = new char[out.size() + 1];
            std::memcpy(buf, out.c_str(), out.size() + 1);
            *summary = buf;
        }
    });
}

}  // extern "C"
