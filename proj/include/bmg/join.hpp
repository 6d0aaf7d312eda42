#pragma once

#include <string>
#include <vector>

#include "bmg/graph.hpp"

namespace bmg {

// One pair of external edges to be fused into a new internal edge of the
// given length. sigma = +1 orients the new edge from the g1-side anchor to
// the g2-side anchor, sigma = -1 the other way round.
struct JoinPair {
    std::string e1;  // external edge id in g1
    std::string e2;  // external edge id in g2
    double length = 0;
    int sigma = +1;
    std::string new_id;  // defaults to "<e1>~<e2>"
};

struct JoinPlan {
    std::vector<JoinPair> pairs;
};

// Shadow vertex: the point of an original external edge at distance `length`
// from its anchor. In the joined graph it coincides with the opposite anchor
// vertex; kappa records that vertex (joined-graph index).
struct ShadowVertex {
    int pair = -1;
    int side = 0;          // 0: lives on the g1 edge, 1: on the g2 edge
    GraphPoint original;   // point on the original external edge
    int kappa = -1;
};

struct JoinResult {
    MetricGraph g;
    WentzellData data;
    std::vector<int> new_internal;  // indices of the N fused edges in g
    std::vector<int> connected;     // V_c: joined-graph vertex indices
    std::vector<ShadowVertex> shadows;  // |shadows| = 2N
};

// Disjoint union of g1 and g2 with the planned external edges fused.
// Vertex and edge ids of the two inputs must not collide. Wentzell b-weights
// on a fused external edge transfer to the matching end of the new edge.
JoinResult join_graphs(const MetricGraph& g1, const WentzellData& d1,
                       const MetricGraph& g2, const WentzellData& d2,
                       const JoinPlan& plan);

}  // namespace bmg
