#include "bmg/paste_engine.hpp"

#include <cmath>

namespace bmg {

PastedProcessSpec build_process(const MetricGraph& g, const WentzellData& data) {
    if (const auto errs = validate(data, g); !errs.empty())
        throw GraphError(errs.front());
    PastedProcessSpec spec;
    spec.g = g;
    spec.data = data;
    spec.stars = decompose_to_stars(spec.g, spec.data);
    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        spec.regimes.push_back(classify(spec.data, spec.g, v));
        StarGeom geom;
        const Star& star = spec.stars.stars[v];
        geom.stop.assign(star.rays.size(), StarGeom::kNoStop);
        for (const auto& st : star.stops) geom.stop[st.ray] = st.dist;
        spec.geoms.push_back(std::move(geom));
    }
    return spec;
}

namespace {

// Distance from a point to vertex v along the point's own edge; infinity when
// the edge is not incident with v.
double edge_distance(const MetricGraph& g, GraphPoint p, int v) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (p.edge < 0) return inf;  // cemetery
    if (p.kind == EdgeKind::External)
        return g.externals[p.edge].v == v ? p.x : inf;
    const auto& e = g.internals[p.edge];
    double d = inf;
    if (e.v_from == v) d = std::min(d, p.x);
    if (e.v_to == v) d = std::min(d, e.length - p.x);
    return d;
}

double set_distance(const MetricGraph& g, GraphPoint p, const std::vector<int>& vs) {
    double d = std::numeric_limits<double>::infinity();
    for (int v : vs) d = std::min(d, edge_distance(g, p, v));
    return d;
}

}  // namespace

CrossoverDiagnostics check_crossover(const PastedProcessSpec& spec,
                                     const GlobalPathRecord& rec, double h) {
    CrossoverDiagnostics diag;
    diag.paths = 1;
    const double bound = 4.0 * std::sqrt(h * std::log(1.0 / h));
    const auto& steps = rec.crossovers.steps;
    const MetricGraph& g = spec.g;

    double prev_t = 0;
    for (const auto& [t, v] : steps) {
        if (!(t > prev_t)) ++diag.strict_increase_violations;
        prev_t = t;
    }

    auto sample_at = [&](double t) -> int {
        if (rec.ts.empty() || rec.grid <= 0) return -1;
        const long k = std::lround(std::ceil(t / rec.grid - 1e-9));
        return k >= 0 && k < static_cast<long>(rec.ts.size()) ? static_cast<int>(k) : -1;
    };

    for (const auto& [t, v] : steps) {
        const int k = sample_at(t);
        if (k < 0) continue;  // crossover after the last recorded sample
        if (!rec.alive[k] || edge_distance(g, rec.points[k], v) > bound)
            ++diag.position_mismatches;
    }

    // from each crossover on, a sample near the previous star's target set
    // must have appeared no later than (grid resolution of) the crossover
    for (size_t n = 1; n < steps.size(); ++n) {
        const int prev_star = steps[n - 1].second;
        std::vector<int> targets;
        for (const auto& st : spec.stars.stars[prev_star].stops)
            targets.push_back(st.target_vertex);
        if (targets.empty()) {
            ++diag.hitting_violations;
            continue;
        }
        const int from = sample_at(steps[n - 1].first);
        const int upto = sample_at(steps[n].first);
        if (from < 0 || upto < 0) continue;
        bool found = false;
        for (int k = from; k <= upto && !found; ++k)
            found = rec.alive[k] && set_distance(g, rec.points[k], targets) <= bound;
        if (!found) ++diag.hitting_violations;
    }
    return diag;
}

}  // namespace bmg
