#include "path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rrw {

BVPath BVPath::make(double horizon, double start, std::vector<Seg> segs,
                    std::vector<Jump> ups, std::vector<Jump> downs) {
    BVPath p;
    p.horizon = horizon;
    p.start = start;
    p.segs = std::move(segs);
    p.ups = std::move(ups);
    p.downs = std::move(downs);
    std::sort(p.ups.begin(), p.ups.end(), [](const Jump& a, const Jump& b) { return a.t < b.t; });
    std::sort(p.downs.begin(), p.downs.end(), [](const Jump& a, const Jump& b) { return a.t < b.t; });
    p.check();
    return p;
}

void BVPath::check() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("path: horizon must be positive");
    if (!(start >= 0.0)) throw std::invalid_argument("path: start must be nonnegative");
    double sum = 0.0;
    for (const auto& s : segs) {
        if (!(s.dur > 0.0)) throw std::invalid_argument("path: segment durations must be positive");
        sum += s.dur;
    }
    if (std::abs(sum - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("path: segment durations must sum to the horizon");
    auto check_jumps = [this](const std::vector<Jump>& js, const char* kind) {
        double prev = -1.0;
        for (const auto& j : js) {
            if (!(j.size > 0.0)) throw std::invalid_argument(std::string("path: ") + kind + " jump sizes must be positive");
            if (!(j.t >= 0.0 && j.t <= horizon)) throw std::invalid_argument(std::string("path: ") + kind + " jump time outside [0, horizon]");
            if (j.t == prev) throw std::invalid_argument(std::string("path: ") + kind + " jump times must be distinct");
            prev = j.t;
        }
    };
    check_jumps(ups, "up");
    check_jumps(downs, "down");
}

double BVPath::total_variation() const {
    double tv = 0.0;
    for (const auto& s : segs) tv += std::abs(s.slope) * s.dur;
    for (const auto& j : ups) tv += j.size;
    for (const auto& j : downs) tv += j.size;
    return tv;
}

namespace {

double eval_impl(const BVPath& p, double t, bool left) {
    if (t < -1e-15 || t > p.horizon * (1.0 + 1e-15) + 1e-15)
        throw std::out_of_range("evaluate: t outside [0, horizon]");
    t = std::min(std::max(t, 0.0), p.horizon);
    double v = p.start;
    double done = 0.0;
    for (const auto& s : p.segs) {
        const double take = std::min(s.dur, t - done);
        if (take <= 0.0) break;
        v += s.slope * take;
        done += take;
        if (done >= t) break;
    }
    for (const auto& j : p.ups)
        if (j.t < t || (!left && j.t == t)) v += j.size;
    for (const auto& j : p.downs)
        if (j.t < t || (!left && j.t == t)) v -= j.size;
    return v;
}

}  // namespace

std::vector<PathEvent> path_events(const BVPath& p) {
    // cut times: segment boundaries plus jump times
    std::set<double> cuts;
    cuts.insert(0.0);
    cuts.insert(p.horizon);
    double acc = 0.0;
    for (const auto& s : p.segs) {
        acc += s.dur;
        cuts.insert(std::min(acc, p.horizon));
    }
    for (const auto& j : p.ups) cuts.insert(j.t);
    for (const auto& j : p.downs) cuts.insert(j.t);

    std::vector<PathEvent> ev;
    auto add_jumps_at = [&](double t) {
        for (const auto& j : p.ups)
            if (j.t == t) ev.push_back({t, 0.0, 0.0, j.size});
        for (const auto& j : p.downs)
            if (j.t == t) ev.push_back({t, 0.0, 0.0, -j.size});
    };
    std::vector<double> ts(cuts.begin(), cuts.end());
    std::vector<double> seg_ends;
    seg_ends.reserve(p.segs.size());
    double end = 0.0;
    for (const auto& s : p.segs) {
        end += s.dur;
        seg_ends.push_back(end);
    }
    add_jumps_at(0.0);
    size_t seg_i = 0;
    for (size_t k = 0; k + 1 < ts.size(); ++k) {
        const double a = ts[k], b = ts[k + 1];
        // slope over (a, b): the segment containing the midpoint
        const double mid = 0.5 * (a + b);
        while (seg_i + 1 < p.segs.size() && mid > seg_ends[seg_i]) ++seg_i;
        const double slope = p.segs.empty() ? 0.0 : p.segs[seg_i].slope;
        ev.push_back({a, b - a, slope, 0.0});
        add_jumps_at(b);
    }
    return ev;
}

double evaluate(const BVPath& p, double t) { return eval_impl(p, t, false); }
double evaluate_left(const BVPath& p, double t) { return eval_impl(p, t, true); }

BVPath reflect(const BVPath& p) {
    const auto ev = path_events(p);
    BVPath out;
    out.horizon = p.horizon;
    out.start = p.start;  // m(0) = 0 since start >= 0

    double x = p.start;
    double m = 0.0;  // running min of (xi ^ 0)
    auto push_seg = [&out](double dur, double slope) {
        if (dur <= 0.0) return;
        if (!out.segs.empty() && out.segs.back().slope == slope)
            out.segs.back().dur += dur;
        else
            out.segs.push_back({dur, slope});
    };
    for (const auto& e : ev) {
        if (e.dur > 0.0) {
            const double x1 = x + e.slope * e.dur;
            if (e.slope >= 0.0 || x1 >= m) {
                push_seg(e.dur, e.slope);
            } else if (x <= m) {
                // already on the minimum and moving down: reflected path stays at 0
                push_seg(e.dur, 0.0);
                m = x1;
            } else {
                const double dc = (m - x) / e.slope;  // crossing of the current floor
                push_seg(dc, e.slope);
                push_seg(e.dur - dc, 0.0);
                m = x1;
            }
            x = x1;
        } else if (e.jump > 0.0) {
            out.ups.push_back({e.t0, e.jump});
            x += e.jump;
        } else if (e.jump < 0.0) {
            const double x1 = x + e.jump;
            if (x1 >= m) {
                out.downs.push_back({e.t0, -e.jump});
            } else {
                const double drop = x - m;  // down to the floor, rest absorbed
                if (drop > 0.0) out.downs.push_back({e.t0, drop});
                m = x1;
            }
            x = x1;
        }
    }
    if (out.segs.empty()) out.segs.push_back({p.horizon, 0.0});
    return out;
}

double hitting_time(const BVPath& p) {
    const BVPath r = reflect(p);
    double t = 0.0;
    double x = r.start;
    // value trace of the reflected path; it is >= 0, so a hit is an exact zero
    const auto ev = path_events(r);
    for (const auto& e : ev) {
        if (e.dur > 0.0) {
            if (x <= 0.0 && e.slope <= 0.0) return e.t0;  // sits at (or leaves) zero
            const double x1 = x + e.slope * e.dur;
            if (x > 0.0 && x1 <= 0.0) return e.t0 + x / (-e.slope);
            x = x1;
            t = e.t0 + e.dur;
        } else {
            x += e.jump;
            // a jump landing at zero at t = 0 is not yet a hit; the following
            // segment decides whether the infimum over t > 0 is 0
            if (x <= 0.0 && e.t0 > 0.0) return e.t0;
        }
    }
    if (x <= 0.0) return t;
    return kInf;
}

namespace {

// int_0^d (r0 + s*u)^pow du for a nonnegative linear stretch
double power_segment_integral(double r0, double s, double d, double pow) {
    if (d <= 0.0) return 0.0;
    const double r1 = r0 + s * d;
    const double lo = std::max(std::min(r0, r1), 0.0);
    const double hi = std::max(std::max(r0, r1), 0.0);
    if (hi <= 0.0) return 0.0;
    if (std::abs(s) * d <= 1e-9 * (hi + 1e-300)) {
        // nearly flat: midpoint rule is exact to the stated tolerance
        return std::pow(0.5 * (r0 + r1), pow) * d;
    }
    (void)lo;
    const double a = std::pow(std::max(r1, 0.0), pow + 1.0);
    const double b = std::pow(std::max(r0, 0.0), pow + 1.0);
    return (a - b) / (s * (pow + 1.0));
}

}  // namespace

double area_p(const BVPath& p, double power, double upper) {
    if (!(power > 0.0)) throw std::invalid_argument("area_p: power must be positive");
    if (upper < 0.0 || upper > p.horizon * (1.0 + 1e-12))
        throw std::invalid_argument("area_p: upper outside [0, horizon]");
    upper = std::min(upper, p.horizon);
    const BVPath r = reflect(p);
    double acc = 0.0;
    double x = r.start;
    const auto ev = path_events(r);
    for (const auto& e : ev) {
        if (e.dur > 0.0) {
            const double take = std::min(e.dur, upper - e.t0);
            if (take > 0.0) acc += power_segment_integral(x, e.slope, take, power);
            x += e.slope * e.dur;
        } else {
            x += e.jump;
        }
        if (e.t0 >= upper) break;
    }
    return acc;
}

BVPath discard_down_jumps(const BVPath& p) {
    BVPath out = p;
    out.downs.clear();
    return out;
}

std::string to_literal(const BVPath& p) {
    char buf[128];
    std::string s;
    auto emit = [&](const char* fmt, double a, double b) {
        std::snprintf(buf, sizeof buf, fmt, a, b);
        s += buf;
    };
    emit("bvpath %.17g %.17g\n", p.horizon, p.start);
    for (const auto& g : p.segs) emit("seg %.17g %.17g\n", g.dur, g.slope);
    for (const auto& j : p.ups) emit("up %.17g %.17g\n", j.t, j.size);
    for (const auto& j : p.downs) emit("down %.17g %.17g\n", j.t, j.size);
    return s;
}

BVPath parse_path_literal(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    BVPath p;
    bool have_header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        double a, b;
        if (!(ls >> a >> b))
            throw std::invalid_argument("path literal: line " + std::to_string(lineno) + ": expected two numbers");
        if (tag == "bvpath") {
            p.horizon = a;
            p.start = b;
            have_header = true;
        } else if (tag == "seg") {
            p.segs.push_back({a, b});
        } else if (tag == "up") {
            p.ups.push_back({a, b});
        } else if (tag == "down") {
            p.downs.push_back({a, b});
        } else {
            throw std::invalid_argument("path literal: line " + std::to_string(lineno) + ": unknown tag '" + tag + "'");
        }
    }
    if (!have_header) throw std::invalid_argument("path literal: missing bvpath header");
    p.check();
    return p;
}

void StepDriftPath::check() const {
    if (!(drift >= 0.0)) throw std::invalid_argument("step path: drift must be nonnegative");
    double prev = -1.0;
    for (const auto& j : jumps) {
        if (!(j.size > 0.0)) throw std::invalid_argument("step path: jump sizes must be positive");
        if (!(j.t >= 0.0 && j.t <= 1.0)) throw std::invalid_argument("step path: jump times must lie in [0,1]");
        if (j.t == prev) throw std::invalid_argument("step path: jump times must be distinct");
        prev = j.t;
    }
}

BVPath StepDriftPath::to_bvpath() const {
    BVPath p;
    p.horizon = 1.0;
    p.start = 0.0;
    p.segs = {{1.0, drift}};
    p.ups = jumps;
    std::sort(p.ups.begin(), p.ups.end(), [](const Jump& a, const Jump& b) { return a.t < b.t; });
    return p;
}

}  // namespace rrw
