#pragma once

#include <string>

#include "bmg/graph_io.hpp"

// Shared test fixtures.

namespace bmg::testing {

// Interval [0,1] with both endpoints absorbing.
inline ParsedGraph interval_trap() {
    return parse_graph("graph interval\nvertex v1\nvertex v2\niedge i1 v1 v2 1.0\n"
                       "wentzell v1 c=1\nwentzell v2 c=1\n");
}

// Interval [0,1], both endpoints purely reflecting (degree-1 Walsh).
inline ParsedGraph interval_reflect() {
    return parse_graph("graph interval-r\nvertex v1\nvertex v2\niedge i1 v1 v2 1.0\n"
                       "wentzell v1 a=0 c=0\nwb v1 i1 1.0\n"
                       "wentzell v2 a=0 c=0\nwb v2 i1 1.0\n");
}

// Two-vertex graph with one internal and two external edges, mixed
// killing/stickiness at both vertices. The standing hard verification target.
inline ParsedGraph two_vertex_mixed() {
    return parse_graph(R"(
graph twovertex
vertex v1
vertex v2
iedge i1 v1 v2 1.0
eedge e1 v1
eedge e2 v2
wentzell v1 a=0.1 c=0.1
wb v1 i1 0.4
wb v1 e1 0.4
wentzell v2 a=0 c=0.2
wb v2 i1 0.3
wb v2 e2 0.5
)");
}

// Same shape but conservative (a = 0 everywhere).
inline ParsedGraph two_vertex_conservative() {
    return parse_graph(R"(
graph twovertex-c
vertex v1
vertex v2
iedge i1 v1 v2 1.0
eedge e1 v1
eedge e2 v2
wentzell v1 a=0 c=0.2
wb v1 i1 0.4
wb v1 e1 0.4
wentzell v2 a=0 c=0.2
wb v2 i1 0.3
wb v2 e2 0.5
)");
}

// Loop of length 1.5 plus an external edge at the same vertex.
inline ParsedGraph tadpole_graph() {
    return parse_graph("graph tp\nvertex v\ntadpole t v 1.5\needge e v\n"
                       "wentzell v a=0.05 c=0.15\nwb v t 0.5\nwb v e 0.3\n");
}

}  // namespace bmg::testing
