#pragma once

#include <string>
#include <vector>

#include "model.hpp"

namespace rrw {

struct Seg {
    double dur;    // > 0
    double slope;
};

struct Jump {
    double t;
    double size;  // > 0
};

// Finite-variation path on [0, horizon]: absolutely continuous piece given
// by slope segments plus upward/downward jump lists. Everything downstream
// (reflection, hitting, areas, costs) works on this exact representation;
// grids only appear when a caller asks for samples.
struct BVPath {
    double horizon = 0.0;
    double start = 0.0;  // >= 0
    std::vector<Seg> segs;
    std::vector<Jump> ups;
    std::vector<Jump> downs;

    static BVPath make(double horizon, double start, std::vector<Seg> segs,
                       std::vector<Jump> ups = {}, std::vector<Jump> downs = {});
    void check() const;  // throws std::invalid_argument on a bad representation

    double total_variation() const;
};

// cadlag evaluation; throws std::out_of_range outside [0, horizon]
double evaluate(const BVPath& p, double t);
double evaluate_left(const BVPath& p, double t);

// time-ordered walk of the path: linear pieces (dur > 0) and signed jumps
// (dur == 0), with segments split at jump times and jumps applied first
struct PathEvent {
    double t0;
    double dur;
    double slope;  // for dur > 0
    double jump;   // signed, for dur == 0
};
std::vector<PathEvent> path_events(const BVPath& p);

// R(xi)(t) = xi(t) - inf_{s<=t} (xi(s) ^ 0), returned as an exact
// piecewise object (segments split where the running minimum binds)
BVPath reflect(const BVPath& p);

// first t > 0 with R(xi)(t) <= 0; +inf if none within [0, horizon]
double hitting_time(const BVPath& p);

// int_0^upper R(xi)(s)^p ds, exact per linear segment
double area_p(const BVPath& p, double power, double upper);

// xi^(a) + xi^(u): same path with the downward jumps removed
BVPath discard_down_jumps(const BVPath& p);

// text literal: "bvpath T y" header, then "seg d s" / "up t b" / "down t b"
std::string to_literal(const BVPath& p);
BVPath parse_path_literal(const std::string& text);

// Element of the drift-plus-upward-jumps cone on [0,1]: t -> drift*t + sum
// of jump sizes at times <= t.
struct StepDriftPath {
    double drift = 0.0;  // >= 0
    std::vector<Jump> jumps;

    void check() const;
    BVPath to_bvpath() const;
};

}  // namespace rrw
