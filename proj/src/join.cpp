#include "bmg/join.hpp"

#include <algorithm>
#include <cmath>

namespace bmg {
namespace {

int find_pair(const JoinPlan& plan, int side, const std::string& id, int before) {
    for (int k = 0; k < before; ++k) {
        const auto& p = plan.pairs[k];
        if ((side == 0 ? p.e1 : p.e2) == id) return k;
    }
    return -1;
}

}  // namespace

JoinResult join_graphs(const MetricGraph& g1, const WentzellData& d1,
                       const MetricGraph& g2, const WentzellData& d2,
                       const JoinPlan& plan) {
    const int n1v = static_cast<int>(g1.vertex_ids.size());
    const int n1i = static_cast<int>(g1.internals.size());
    const int N = static_cast<int>(plan.pairs.size());

    for (const auto& id : g2.vertex_ids)
        if (g1.vertex_index(id) >= 0) throw GraphError("duplicate id " + id);
    for (const auto& e : g2.internals)
        if (g1.internal_index(e.id) >= 0 || g1.external_index(e.id) >= 0)
            throw GraphError("duplicate id " + e.id);
    for (const auto& e : g2.externals)
        if (g1.internal_index(e.id) >= 0 || g1.external_index(e.id) >= 0)
            throw GraphError("duplicate id " + e.id);

    // resolve and validate the pairs
    std::vector<int> side1(N), side2(N);
    for (int k = 0; k < N; ++k) {
        const auto& p = plan.pairs[k];
        if (!(p.length > 0) || !std::isfinite(p.length))
            throw GraphError("join pair " + p.e1 + "/" + p.e2 +
                             ": length must be positive and finite");
        side1[k] = g1.external_index(p.e1);
        side2[k] = g2.external_index(p.e2);
        if (side1[k] < 0)
            throw GraphError(g1.internal_index(p.e1) >= 0
                                 ? "edge " + p.e1 + " is not external"
                                 : "no external edge " + p.e1 + " in " + g1.name);
        if (side2[k] < 0)
            throw GraphError(g2.internal_index(p.e2) >= 0
                                 ? "edge " + p.e2 + " is not external"
                                 : "no external edge " + p.e2 + " in " + g2.name);
        if (find_pair(plan, 0, p.e1, k) >= 0 || find_pair(plan, 1, p.e2, k) >= 0)
            throw GraphError("edge used in two join pairs");
    }

    JoinResult r;
    MetricGraph& g = r.g;
    g.name = g1.name + "+" + g2.name;
    g.vertex_ids = g1.vertex_ids;
    g.vertex_ids.insert(g.vertex_ids.end(), g2.vertex_ids.begin(), g2.vertex_ids.end());
    g.internals = g1.internals;
    for (auto e : g2.internals) {
        e.v_from += n1v;
        e.v_to += n1v;
        g.internals.push_back(e);
    }
    // surviving external edges keep their order: g1's then g2's
    std::vector<int> ext_map1(g1.externals.size(), -1), ext_map2(g2.externals.size(), -1);
    for (int e = 0; e < static_cast<int>(g1.externals.size()); ++e) {
        if (std::find(side1.begin(), side1.end(), e) != side1.end()) continue;
        ext_map1[e] = static_cast<int>(g.externals.size());
        g.externals.push_back(g1.externals[e]);
    }
    for (int e = 0; e < static_cast<int>(g2.externals.size()); ++e) {
        if (std::find(side2.begin(), side2.end(), e) != side2.end()) continue;
        ext_map2[e] = static_cast<int>(g.externals.size());
        auto ee = g2.externals[e];
        ee.v += n1v;
        g.externals.push_back(ee);
    }
    // fused edges
    std::vector<HalfEdge> fused_end1(N), fused_end2(N);  // new half-edge per side
    for (int k = 0; k < N; ++k) {
        const auto& p = plan.pairs[k];
        const int a1 = g1.externals[side1[k]].v;          // g1-side anchor
        const int a2 = g2.externals[side2[k]].v + n1v;    // g2-side anchor
        InternalEdge ie;
        ie.id = p.new_id.empty() ? p.e1 + "~" + p.e2 : p.new_id;
        ie.length = p.length;
        if (p.sigma >= 0) {
            ie.v_from = a1;
            ie.v_to = a2;
        } else {
            ie.v_from = a2;
            ie.v_to = a1;
        }
        const int idx = static_cast<int>(g.internals.size());
        g.internals.push_back(ie);
        r.new_internal.push_back(idx);
        fused_end1[k] = {EdgeKind::Internal, idx, p.sigma >= 0 ? 0 : 1};
        fused_end2[k] = {EdgeKind::Internal, idx, p.sigma >= 0 ? 1 : 0};
        // shadow on the g1 edge sits across from the g2 anchor and vice versa
        r.shadows.push_back({k, 0, {EdgeKind::External, side1[k], p.length}, a2});
        r.shadows.push_back({k, 1, {EdgeKind::External, side2[k], p.length}, a1});
        for (int v : {a1, a2})
            if (std::find(r.connected.begin(), r.connected.end(), v) == r.connected.end())
                r.connected.push_back(v);
    }

    // carry the boundary data over, rewriting half-edge references
    auto remap = [&](const HalfEdge& h, int side) -> HalfEdge {
        if (h.kind == EdgeKind::Internal)
            return {h.kind, side == 0 ? h.edge : h.edge + n1i, h.end};
        const int mapped = side == 0 ? ext_map1[h.edge] : ext_map2[h.edge];
        if (mapped >= 0) return {EdgeKind::External, mapped, 0};
        const auto& sides = side == 0 ? side1 : side2;
        const int k = static_cast<int>(
            std::find(sides.begin(), sides.end(), h.edge) - sides.begin());
        return side == 0 ? fused_end1[k] : fused_end2[k];
    };
    r.data.v.resize(g.vertex_ids.size());
    for (int v = 0; v < n1v; ++v) {
        r.data.v[v] = d1.v[v];
        for (auto& [h, w] : r.data.v[v].b) h = remap(h, 0);
    }
    for (size_t v = 0; v < g2.vertex_ids.size(); ++v) {
        r.data.v[n1v + v] = d2.v[v];
        for (auto& [h, w] : r.data.v[n1v + v].b) h = remap(h, 1);
    }
    return r;
}

}  // namespace bmg
