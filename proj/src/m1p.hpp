#pragma once

#include <vector>

#include "path.hpp"

namespace rrw {

struct GraphPoint {
    double u;  // value coordinate
    double t;  // time coordinate
};

// Ordered sample of the extended completed graph of a path: starts at
// (0, 0) (the pre-start value is 0 by convention), walks jumps vertically
// in their natural order, and treats the right endpoint's jump like any
// interior one. Consecutive points are within `mesh` in |du| + |dt|.
struct ParametrizedGraph {
    std::vector<GraphPoint> pts;
    double mesh = 0.0;
};

ParametrizedGraph graph_of(const BVPath& p, double mesh);
ParametrizedGraph graph_of(const StepDriftPath& p, double mesh);

// Incremental graph builder for monotone staircases (simulation output);
// avoids materializing one jump per chain step.
class StaircaseGraphBuilder {
public:
    StaircaseGraphBuilder(double mesh);
    void add(double t, double u);  // post-jump value at time t; t nondecreasing
    ParametrizedGraph finish(double t_end, double u_end);

private:
    void walk_to(double t, double u);
    double mesh_ = 0.0;
    double acc_ = 0.0;      // graph length since last emitted point
    double cur_t_ = 0.0, cur_u_ = 0.0;
    bool started_ = false;
    std::vector<GraphPoint> pts_;
};

struct M1pResult {
    double value;       // cost of the best coupling found: an upper bound
    double mesh_error;  // resolution term, mesh(a) + mesh(b)
};

// Approximate M1'-type distance between two sampled graphs: dynamic
// programming over order-preserving couplings of the sample points,
// scored as max|du| + max|dt| over the matched pairs. Throws
// std::invalid_argument when a graph violates its declared mesh.
M1pResult m1p_distance(const ParametrizedGraph& a, const ParametrizedGraph& b);

}  // namespace rrw
