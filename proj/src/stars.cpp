#include "bmg/stars.hpp"

#include <algorithm>

namespace bmg {

StarDecomposition decompose_to_stars(const MetricGraph& g, const WentzellData& data) {
    for (const auto& e : g.internals)
        if (e.v_from == e.v_to)
            throw GraphError("edge " + e.id + ": tadpole present, expand first");
    StarDecomposition sd;
    sd.stars.resize(g.vertex_ids.size());
    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        Star& s = sd.stars[v];
        s.vertex = v;
        s.vertex_id = g.vertex_ids[v];
        s.a = data.v[v].a;
        s.c = data.v[v].c;
        for (const HalfEdge& h : g.incident(v)) {
            const int r = static_cast<int>(s.rays.size());
            s.rays.push_back({g.edge_id(h), h, data.v[v].b_for(h)});
            if (h.kind == EdgeKind::Internal) {
                const auto& e = g.internals[h.edge];
                const int other = h.end == 0 ? e.v_to : e.v_from;
                s.stops.push_back({r, e.length, other,
                                   {EdgeKind::Internal, h.edge, 1 - h.end}});
            }
        }
    }
    return sd;
}

GraphPoint star_to_global(const MetricGraph& g, const Star& star, int ray, double x) {
    const HalfEdge& h = star.rays[ray].global;
    if (h.kind == EdgeKind::External) return {EdgeKind::External, h.edge, x};
    const double a = g.internals[h.edge].length;
    return {EdgeKind::Internal, h.edge, h.end == 0 ? x : a - x};
}

StarPoint global_to_star(const MetricGraph& g, const StarDecomposition& sd, GraphPoint p) {
    p = g.normalize(p);
    if (const int v = g.vertex_at(p); v >= 0) {
        // vertex start: any ray, coordinate 0
        return {v, sd.stars[v].rays.empty() ? -1 : 0, 0.0};
    }
    HalfEdge h{p.kind, p.edge, 0};
    double x = p.x;
    if (p.kind == EdgeKind::Internal) {
        const double a = g.internals[p.edge].length;
        if (p.x > a / 2) {  // nearest endpoint owns the point, ties to v_from
            h.end = 1;
            x = a - p.x;
        }
    }
    const int v = g.half_edge_vertex(h);
    return {v, sd.stars[v].ray_for(h), x};
}

MetricGraph reassemble(const StarDecomposition& sd) {
    MetricGraph g;
    for (const auto& s : sd.stars) g.vertex_ids.push_back(s.vertex_id);
    // each internal edge id appears as one end-0 ray and one end-1 ray
    for (int v = 0; v < static_cast<int>(sd.stars.size()); ++v) {
        const Star& s = sd.stars[v];
        for (int r = 0; r < static_cast<int>(s.rays.size()); ++r) {
            const StarRay& ray = s.rays[r];
            if (ray.global.kind == EdgeKind::External) {
                g.externals.push_back({ray.id, v});
                continue;
            }
            if (ray.global.end != 0) continue;  // counterpart emits the edge
            const StarStop* stop = s.stop_on(r);
            if (!stop) throw GraphError("internal ray " + ray.id + " has no stop");
            g.internals.push_back({ray.id, v, stop->target_vertex, stop->dist});
        }
    }
    return g;
}

GraphPoint TadpoleExpansion::map_point(GraphPoint p) const {
    if (p.kind == EdgeKind::External) return p;
    if (edge_map[p.edge] >= 0) return {p.kind, edge_map[p.edge], p.x};
    for (const auto& lm : loops) {
        if (lm.old_edge != p.edge) continue;
        if (p.x <= lm.half) return {EdgeKind::Internal, lm.e1, p.x};
        return {EdgeKind::Internal, lm.e2, p.x - lm.half};
    }
    throw GraphError("unmapped edge index");
}

TadpoleExpansion expand_tadpoles(const MetricGraph& g, const WentzellData& data) {
    TadpoleExpansion r;
    r.g.name = g.name;
    r.g.vertex_ids = g.vertex_ids;
    r.data.v.resize(g.vertex_ids.size());
    r.edge_map.assign(g.internals.size(), -1);

    for (int i = 0; i < static_cast<int>(g.internals.size()); ++i) {
        const auto& e = g.internals[i];
        if (e.v_from != e.v_to) {
            r.edge_map[i] = static_cast<int>(r.g.internals.size());
            r.g.internals.push_back(e);
        }
    }
    for (int i = 0; i < static_cast<int>(g.internals.size()); ++i) {
        const auto& e = g.internals[i];
        if (e.v_from != e.v_to) continue;
        const int v0 = static_cast<int>(r.g.vertex_ids.size());
        r.g.vertex_ids.push_back(e.id + ".v0");
        r.data.v.push_back({});
        TadpoleExpansion::LoopMap lm;
        lm.old_edge = i;
        lm.half = e.length / 2;
        lm.e1 = static_cast<int>(r.g.internals.size());
        r.g.internals.push_back({e.id + ".1", e.v_from, v0, lm.half});
        lm.e2 = static_cast<int>(r.g.internals.size());
        r.g.internals.push_back({e.id + ".2", v0, e.v_to, lm.half});
        r.loops.push_back(lm);
        // the auxiliary vertex is an unbiased pass-through point
        auto& w0 = r.data.v[v0];
        w0.a = 0;
        w0.c = 0;
        w0.b = {{{EdgeKind::Internal, lm.e1, 1}, 0.5},
                {{EdgeKind::Internal, lm.e2, 0}, 0.5}};
    }
    r.g.externals = g.externals;

    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        auto& wd = r.data.v[v];
        wd.a = data.v[v].a;
        wd.c = data.v[v].c;
        for (const auto& [h, w] : data.v[v].b) {
            if (h.kind == EdgeKind::External) {
                wd.b.emplace_back(h, w);
            } else if (r.edge_map[h.edge] >= 0) {
                wd.b.emplace_back(HalfEdge{h.kind, r.edge_map[h.edge], h.end}, w);
            } else {
                for (const auto& lm : r.loops) {
                    if (lm.old_edge != h.edge) continue;
                    // loop end 0 -> start of e1 at v, end 1 -> end of e2 at v
                    const HalfEdge nh = h.end == 0
                                            ? HalfEdge{EdgeKind::Internal, lm.e1, 0}
                                            : HalfEdge{EdgeKind::Internal, lm.e2, 1};
                    wd.b.emplace_back(nh, w);
                }
            }
        }
    }
    return r;
}

}  // namespace bmg
