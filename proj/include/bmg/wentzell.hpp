#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bmg/graph.hpp"

namespace bmg {

// Simulation regime of a vertex, derived from its (a, b, c) triple:
//  Trap      c = 1: the vertex absorbs.
//  HoldKill  B = 0, a > 0: exponential hold of rate a/c, then the cemetery.
//  Sticky    B > 0: Walsh edge selection p_l = b_l/B, sticky delay rho = c/B
//            (real time per unit local time) and kill rate gamma = a/B
//            (exponential rate per unit local time).
struct VertexRegime {
    enum Kind { Trap, HoldKill, Sticky } kind = Trap;
    double hold_rate = 0;   // HoldKill: a/c
    std::vector<double> p;  // Sticky: per incident half-edge, order of incident(v)
    double rho = 0;         // Sticky: c/B
    double gamma = 0;       // Sticky: a/B
};

// Consistency of the boundary data against the graph's incidence. Assumes the
// per-vertex sum was normalized to 1 at load; re-checks it here.
inline std::vector<std::string> validate(const WentzellData& data, const MetricGraph& g) {
    std::vector<std::string> out;
    if (data.v.size() != g.vertex_ids.size()) {
        out.push_back("boundary data covers " + std::to_string(data.v.size()) +
                      " vertices, graph has " + std::to_string(g.vertex_ids.size()));
        return out;
    }
    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        const auto& wd = data.v[v];
        const std::string& id = g.vertex_ids[v];
        if (wd.a < 0 || wd.c < 0) out.push_back("vertex " + id + ": negative weight");
        if (wd.a >= 1.0) out.push_back("vertex " + id + ": a_v must be < 1");
        const auto inc = g.incident(v);
        for (const auto& [h, w] : wd.b) {
            if (w < 0) out.push_back("vertex " + id + ": negative weight");
            bool found = false;
            for (const auto& hh : inc) found = found || hh == h;
            if (!found) {
                const int count = h.kind == EdgeKind::Internal
                                      ? static_cast<int>(g.internals.size())
                                      : static_cast<int>(g.externals.size());
                const std::string eid = (h.edge >= 0 && h.edge < count)
                                            ? g.edge_id(h)
                                            : "#" + std::to_string(h.edge);
                out.push_back("vertex " + id + ": b entry for non-incident edge " + eid);
            }
        }
        const double sum = wd.a + wd.B() + wd.c;
        if (std::abs(sum - 1.0) > 1e-9)
            out.push_back("vertex " + id + ": a + sum(b) + c = " +
                          std::to_string(sum) + ", expected 1");
    }
    return out;
}

// Total on valid data: exactly one regime per vertex. p is indexed in the
// order of g.incident(v).
inline VertexRegime classify(const WentzellData& data, const MetricGraph& g, int v) {
    const auto& wd = data.v[v];
    const double B = wd.B();
    VertexRegime r;
    if (B <= 0) {
        if (wd.a <= 0) {
            r.kind = VertexRegime::Trap;
        } else {
            r.kind = VertexRegime::HoldKill;
            r.hold_rate = wd.a / wd.c;  // c > 0 because a < 1
        }
        return r;
    }
    r.kind = VertexRegime::Sticky;
    r.rho = wd.c / B;
    r.gamma = wd.a / B;
    for (const HalfEdge& h : g.incident(v)) r.p.push_back(wd.b_for(h) / B);
    return r;
}

}  // namespace bmg
