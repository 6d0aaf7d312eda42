#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Finite metric graph: internal edges are intervals [0, length] with x = 0 at
// the initial vertex, external edges are rays [0, inf) anchored at x = 0.

namespace bmg {

enum class EdgeKind { Internal, External };

struct InternalEdge {
    std::string id;
    int v_from = -1;  // x = 0
    int v_to = -1;    // x = length
    double length = 0;
};

struct ExternalEdge {
    std::string id;
    int v = -1;  // x = 0
};

// A half-edge is an (edge, end) pair; end 0 is the x = 0 side, end 1 the
// x = length side of an internal edge. External edges only have end 0.
struct HalfEdge {
    EdgeKind kind = EdgeKind::Internal;
    int edge = -1;
    int end = 0;

    friend bool operator==(const HalfEdge&, const HalfEdge&) = default;
};

struct GraphPoint {
    EdgeKind kind = EdgeKind::Internal;
    int edge = -1;
    double x = 0;
};

struct MetricGraph {
    std::string name;
    std::vector<std::string> vertex_ids;
    std::vector<InternalEdge> internals;
    std::vector<ExternalEdge> externals;
    bool allow_tadpoles = false;  // pre-expansion input only

    int vertex_index(std::string_view id) const {
        for (int i = 0; i < static_cast<int>(vertex_ids.size()); ++i)
            if (vertex_ids[i] == id) return i;
        return -1;
    }
    int internal_index(std::string_view id) const {
        for (int i = 0; i < static_cast<int>(internals.size()); ++i)
            if (internals[i].id == id) return i;
        return -1;
    }
    int external_index(std::string_view id) const {
        for (int i = 0; i < static_cast<int>(externals.size()); ++i)
            if (externals[i].id == id) return i;
        return -1;
    }

    std::vector<HalfEdge> incident(int v) const {
        std::vector<HalfEdge> out;
        for (int i = 0; i < static_cast<int>(internals.size()); ++i) {
            if (internals[i].v_from == v) out.push_back({EdgeKind::Internal, i, 0});
            if (internals[i].v_to == v) out.push_back({EdgeKind::Internal, i, 1});
        }
        for (int e = 0; e < static_cast<int>(externals.size()); ++e)
            if (externals[e].v == v) out.push_back({EdgeKind::External, e, 0});
        return out;
    }
    int degree(int v) const { return static_cast<int>(incident(v).size()); }

    // Vertex sitting at a given half-edge.
    int half_edge_vertex(const HalfEdge& h) const {
        if (h.kind == EdgeKind::External) return externals[h.edge].v;
        return h.end == 0 ? internals[h.edge].v_from : internals[h.edge].v_to;
    }

    const std::string& edge_id(const HalfEdge& h) const {
        return h.kind == EdgeKind::Internal ? internals[h.edge].id : externals[h.edge].id;
    }

    // Snap endpoint coordinates exactly; tolerance 1e-12 * max(1, length).
    GraphPoint normalize(GraphPoint p) const {
        if (p.kind == EdgeKind::External) {
            if (std::abs(p.x) <= 1e-12) p.x = 0;
            return p;
        }
        const double a = internals[p.edge].length;
        const double tol = 1e-12 * std::max(1.0, a);
        if (std::abs(p.x) <= tol) p.x = 0;
        if (std::abs(p.x - a) <= tol) p.x = a;
        return p;
    }

    // Vertex index if the (normalized) point sits at an endpoint, else -1.
    int vertex_at(GraphPoint p) const {
        p = normalize(p);
        if (p.kind == EdgeKind::External) return p.x == 0 ? externals[p.edge].v : -1;
        if (p.x == 0) return internals[p.edge].v_from;
        if (p.x == internals[p.edge].length) return internals[p.edge].v_to;
        return -1;
    }

    bool same_point(GraphPoint p, GraphPoint q) const {
        p = normalize(p);
        q = normalize(q);
        const int vp = vertex_at(p), vq = vertex_at(q);
        if (vp >= 0 || vq >= 0) return vp == vq && vp >= 0;
        if (p.kind != q.kind || p.edge != q.edge) return false;
        const double scale =
            p.kind == EdgeKind::Internal ? std::max(1.0, internals[p.edge].length) : 1.0;
        return std::abs(p.x - q.x) <= 1e-12 * scale;
    }

    // Structural validation; returns human-readable violations.
    std::vector<std::string> validate() const {
        std::vector<std::string> out;
        for (const auto& i : internals) {
            if (!(i.length > 0) || !std::isfinite(i.length))
                out.push_back("edge " + i.id + ": length must be positive and finite");
            if (i.v_from == i.v_to && !allow_tadpoles)
                out.push_back("edge " + i.id + ": tadpole not allowed (expand first)");
        }
        for (int v = 0; v < static_cast<int>(vertex_ids.size()); ++v)
            if (degree(v) == 0)
                out.push_back("vertex " + vertex_ids[v] + ": isolated");
        return out;
    }
};

// Per-vertex boundary data (a, b, c): a kills, b weights the inward
// derivatives, c makes the vertex sticky. a + sum(b) + c = 1 after load.
struct WentzellVertex {
    double a = 0;
    double c = 0;
    std::vector<std::pair<HalfEdge, double>> b;

    double B() const {
        double s = 0;
        for (const auto& [h, w] : b) s += w;
        return s;
    }
    double b_for(const HalfEdge& h) const {
        for (const auto& [hh, w] : b)
            if (hh == h) return w;
        return 0;
    }
};

struct WentzellData {
    std::vector<WentzellVertex> v;  // parallel to MetricGraph::vertex_ids
};

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bmg
