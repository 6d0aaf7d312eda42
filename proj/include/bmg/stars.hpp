#pragma once

#include <string>
#include <vector>

#include "bmg/graph.hpp"

namespace bmg {

// One star per vertex: deg(v) rays, coordinate x on ray r = distance from v
// along the corresponding global half-edge. Rays covering internal edges
// carry a stop point at distance a_i; hitting it hands the path over to the
// star of the opposite endpoint (the kappa target).
struct StarRay {
    std::string id;   // global edge id
    HalfEdge global;  // the half-edge this ray covers
    double b = 0;     // boundary weight of that half-edge
};

struct StarStop {
    int ray = -1;
    double dist = 0;           // = length of the covered internal edge
    int target_vertex = -1;    // global vertex index
    HalfEdge target_half;      // arrival half-edge at the target vertex
};

struct Star {
    int vertex = -1;
    std::string vertex_id;
    double a = 0, c = 0;
    std::vector<StarRay> rays;
    std::vector<StarStop> stops;

    int ray_for(const HalfEdge& h) const {
        for (int r = 0; r < static_cast<int>(rays.size()); ++r)
            if (rays[r].global == h) return r;
        return -1;
    }
    const StarStop* stop_on(int ray) const {
        for (const auto& s : stops)
            if (s.ray == ray) return &s;
        return nullptr;
    }
};

struct StarDecomposition {
    std::vector<Star> stars;  // parallel to vertex_ids of the source graph
};

// Requires a tadpole-free graph (expand_tadpoles first).
StarDecomposition decompose_to_stars(const MetricGraph& g, const WentzellData& data);

// Star coordinates -> point of the global graph.
GraphPoint star_to_global(const MetricGraph& g, const Star& star, int ray, double x);

struct StarPoint {
    int star = -1;
    int ray = -1;
    double x = 0;
};

// Global point -> owning star. Interior points of an internal edge belong to
// the star of the nearest endpoint (ties to v_from).
StarPoint global_to_star(const MetricGraph& g, const StarDecomposition& sd, GraphPoint p);

// Glue the stars back into a metric graph (stop distances give the lengths);
// inverse of decompose_to_stars up to canonical form.
MetricGraph reassemble(const StarDecomposition& sd);

// Tadpole expansion: a loop of length L at v becomes an auxiliary vertex v0
// with boundary data a = 0, c = 0, b = (1/2, 1/2) and two internal edges
// v-v0 of length L/2. Non-loop data is untouched.
struct TadpoleExpansion {
    MetricGraph g;
    WentzellData data;
    struct LoopMap {
        int old_edge = -1;  // internal index in the source graph
        int e1 = -1;        // covers old x in [0, L/2], same orientation
        int e2 = -1;        // covers old x in [L/2, L], x' = x - L/2
        double half = 0;
    };
    std::vector<LoopMap> loops;
    std::vector<int> edge_map;  // old internal idx -> new idx, -1 if expanded

    GraphPoint map_point(GraphPoint p) const;
};

TadpoleExpansion expand_tadpoles(const MetricGraph& g, const WentzellData& data);

}  // namespace bmg
