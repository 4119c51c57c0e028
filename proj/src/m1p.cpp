#include "m1p.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrw {

namespace {

constexpr double kEmitFrac = 0.45;  // emit spacing as a fraction of the mesh

struct Walker {
    double mesh;
    double acc = 0.0;
    bool started = false;
    double t = 0.0, u = 0.0;
    std::vector<GraphPoint> pts;

    void start(double u0, double t0) {
        t = t0;
        u = u0;
        pts.push_back({u0, t0});
        started = true;
        acc = 0.0;
    }
    // straight move in the (u, t) plane, chopped to keep samples dense
    void advance(double nu, double nt) {
        const double len = std::abs(nu - u) + std::abs(nt - t);
        if (len <= 0.0) return;
        const double step = kEmitFrac * mesh;
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int k = 1; k <= pieces; ++k) {
            const double f = static_cast<double>(k) / pieces;
            const double pu = u + f * (nu - u);
            const double pt = t + f * (nt - t);
            acc += len / pieces;
            if (acc >= step) {
                pts.push_back({pu, pt});
                acc = 0.0;
            }
        }
        u = nu;
        t = nt;
    }
    void force_point() {
        if (pts.empty() || pts.back().u != u || pts.back().t != t) pts.push_back({u, t});
        acc = 0.0;
    }
};

}  // namespace

ParametrizedGraph graph_of(const BVPath& p, double mesh) {
    if (!(mesh > 0.0)) throw std::invalid_argument("graph_of: mesh must be positive");
    Walker w{mesh, 0.0, false, 0.0, 0.0, {}};
    w.start(0.0, 0.0);            // pre-start value is 0 by convention
    w.advance(p.start, 0.0);      // initial jump segment, ordered away from 0

    double value = p.start;
    for (const auto& e : path_events(p)) {
        if (e.dur > 0.0) {
            value += e.slope * e.dur;
            w.advance(value, e.t0 + e.dur);
        } else {
            value += e.jump;
            w.advance(value, e.t0);
        }
    }
    w.force_point();
    return {std::move(w.pts), mesh};
}

ParametrizedGraph graph_of(const StepDriftPath& p, double mesh) {
    return graph_of(p.to_bvpath(), mesh);
}

StaircaseGraphBuilder::StaircaseGraphBuilder(double mesh) : mesh_(mesh) {
    if (!(mesh > 0.0)) throw std::invalid_argument("graph builder: mesh must be positive");
}

void StaircaseGraphBuilder::walk_to(double t, double u) {
    Walker w{mesh_, 0.0, false, 0.0, 0.0, {}};
    w.acc = acc_;
    w.t = cur_t_;
    w.u = cur_u_;
    w.pts = std::move(pts_);
    w.started = started_;
    if (!started_) {
        w.start(0.0, 0.0);
        started_ = true;
    }
    w.advance(w.u, t);  // horizontal stretch at the current level
    w.advance(u, t);    // vertical rise
    pts_ = std::move(w.pts);
    acc_ = w.acc;
    cur_t_ = t;
    cur_u_ = u;
}

void StaircaseGraphBuilder::add(double t, double u) { walk_to(t, u); }

ParametrizedGraph StaircaseGraphBuilder::finish(double t_end, double u_end) {
    walk_to(t_end, u_end);
    if (pts_.empty() || pts_.back().u != cur_u_ || pts_.back().t != cur_t_)
        pts_.push_back({cur_u_, cur_t_});
    return {std::move(pts_), mesh_};
}

namespace {

void check_mesh(const ParametrizedGraph& g) {
    if (g.pts.empty()) throw std::invalid_argument("m1p_distance: empty graph");
    for (size_t i = 1; i < g.pts.size(); ++i) {
        const double d = std::abs(g.pts[i].u - g.pts[i - 1].u) +
                         std::abs(g.pts[i].t - g.pts[i - 1].t);
        if (d > g.mesh * (1.0 + 1e-6))
            throw std::invalid_argument("m1p_distance: graph coarser than its declared mesh");
    }
}

}  // namespace

namespace {

constexpr double kBig = 1e100;

// Bottleneck coupling DP over order-preserving alignments of the two point
// sequences. Per matched pair the score is |du| + w_u-capped: pairs with
// |du| > u_cap are forbidden; the maximized pair cost is
//   cap ? |dt|  :  |du| + |dt|.
// On success returns the realized (max|du|, max|dt|) of an optimal coupling.
struct CoupleOut {
    bool ok = false;
    double maxdu = 0.0, maxdt = 0.0;
};

CoupleOut couple(const ParametrizedGraph& a, const ParametrizedGraph& b, bool capped,
                 double u_cap, std::vector<unsigned char>& move) {
    const size_t n = a.pts.size(), m = b.pts.size();
    auto cost = [&](size_t i, size_t j) {
        const double du = std::abs(a.pts[i].u - b.pts[j].u);
        const double dt = std::abs(a.pts[i].t - b.pts[j].t);
        if (!capped) return du + dt;
        return du <= u_cap ? dt : kBig;
    };
    std::vector<double> prev(m), cur(m);
    for (size_t j = 0; j < m; ++j) {
        prev[j] = std::max(j ? prev[j - 1] : 0.0, cost(0, j));
        move[j] = 1;
    }
    move[0] = 0;
    for (size_t i = 1; i < n; ++i) {
        cur[0] = std::max(prev[0], cost(i, 0));
        move[i * m] = 2;
        for (size_t j = 1; j < m; ++j) {
            double best = prev[j - 1];
            unsigned char mv = 0;
            if (prev[j] < best) {
                best = prev[j];
                mv = 2;
            }
            if (cur[j - 1] < best) {
                best = cur[j - 1];
                mv = 1;
            }
            cur[j] = std::max(best, cost(i, j));
            move[i * m + j] = mv;
        }
        std::swap(prev, cur);
    }
    CoupleOut out;
    if (prev[m - 1] >= kBig) return out;  // no coupling under this cap
    size_t i = n - 1, j = m - 1;
    while (true) {
        out.maxdu = std::max(out.maxdu, std::abs(a.pts[i].u - b.pts[j].u));
        out.maxdt = std::max(out.maxdt, std::abs(a.pts[i].t - b.pts[j].t));
        if (i == 0 && j == 0) break;
        const unsigned char mv = move[i * m + j];
        if (mv == 0) {
            i = i ? i - 1 : 0;
            j = j ? j - 1 : 0;
        } else if (mv == 1) {
            j = j ? j - 1 : 0;
        } else {
            i = i ? i - 1 : 0;
        }
    }
    out.ok = true;
    return out;
}

}  // namespace

M1pResult m1p_distance(const ParametrizedGraph& a, const ParametrizedGraph& b) {
    check_mesh(a);
    check_mesh(b);
    const size_t n = a.pts.size(), m = b.pts.size();
    if (n * m > size_t(3) << 27)
        throw std::length_error("m1p_distance: graphs too fine for the coupling DP");

    std::vector<unsigned char> move(n * m);
    const CoupleOut first = couple(a, b, false, 0.0, move);
    double best = first.maxdu + first.maxdt;
    // any coupling satisfies max|du| + max|dt| >= max over pairs of |du|+|dt|
    const double lower = std::max(first.maxdu, first.maxdt);
    const double mesh_err = a.mesh + b.mesh;

    // The bottleneck coupling minimizes the per-pair sum; the two maxima can
    // still land on different pairs and double the score. A short ladder of
    // u-capped couplings (minimizing max|dt| subject to max|du| <= cap)
    // recovers the sum-form value.
    if (best > lower + 0.25 * mesh_err) {
        for (int k = 0; k <= 6; ++k) {
            const double cap = first.maxdu * k / 6.0;
            const CoupleOut c = couple(a, b, true, cap, move);
            if (c.ok) best = std::min(best, c.maxdu + c.maxdt);
        }
    }
    return {best, mesh_err};
}

}  // namespace rrw
