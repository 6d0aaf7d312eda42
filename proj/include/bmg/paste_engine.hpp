#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "bmg/stars.hpp"
#include "bmg/sv_engine.hpp"
#include "bmg/wentzell.hpp"

// Builds the process on the full graph by pasting single-vertex star paths:
// each segment runs on the star of its current vertex until it hits a stop
// point, at which moment the walk crosses over to the star of the opposite
// endpoint of that internal edge. The (time, vertex) handover sequence is the
// crossover chain.

namespace bmg {

struct PastedProcessSpec {
    MetricGraph g;
    WentzellData data;
    StarDecomposition stars;
    std::vector<VertexRegime> regimes;  // per vertex
    std::vector<StarGeom> geoms;        // per vertex
};

// Requires a tadpole-free graph and valid boundary data.
PastedProcessSpec build_process(const MetricGraph& g, const WentzellData& data);

struct CrossoverRecord {
    std::vector<std::pair<double, int>> steps;  // (S_n, K_n), n = 1..
    bool died = false;
    double zeta = std::numeric_limits<double>::infinity();
};

// Global observer contract (calls in increasing time order):
//   segment(t0, t1, p0, p1)   linear motion between two points of one edge
//   hold(t0, t1, v)           path sits at vertex v
//   vertex_arrival(t, v)      path reaches vertex v
//   crossover(n, t, v)        n-th handover, to the star of v
//   killed(t) / horizon(T)    terminal events
//   cont() -> bool            false aborts the path early
struct NullObserver {
    void segment(double, double, GraphPoint, GraphPoint) {}
    void hold(double, double, int) {}
    void vertex_arrival(double, int) {}
    void crossover(int, double, int) {}
    void killed(double) {}
    void horizon(double) {}
    bool cont() const { return true; }
};

namespace detail {

// Adapts a global observer to the star-local contract of sample_sv_path.
template <class GObs>
struct StarLocal {
    const MetricGraph* g;
    const Star* star;
    GObs* out;

    void segment(double t0, double t1, int ray, double x0, double x1) {
        out->segment(t0, t1, star_to_global(*g, *star, ray, x0),
                     star_to_global(*g, *star, ray, x1));
    }
    void hold(double t0, double t1) { out->hold(t0, t1, star->vertex); }
    void vertex_touch(double t) { out->vertex_arrival(t, star->vertex); }
    bool cont() const { return out->cont(); }
};

}  // namespace detail

// One full path from `start`, horizon T, step h. Stream addressing: segment n
// of path `path_id` under `seed` draws from streams (seed, path_id, n), so a
// longer horizon never perturbs earlier segments.
template <class GObs>
CrossoverRecord sample_path(const PastedProcessSpec& spec, GraphPoint start,
                            double T, double h, std::uint64_t seed,
                            std::uint64_t path_id, GObs& obs) {
    CrossoverRecord rec;
    StarPoint sp = global_to_star(spec.g, spec.stars, start);
    double t = 0;
    std::uint64_t seg = 0;
    while (true) {
        const Star& star = spec.stars.stars[sp.star];
        NormalStream ns(seed, path_id, seg);
        UniformStream us(seed, path_id, seg);
        detail::StarLocal<GObs> local{&spec.g, &star, &obs};
        const SvResult res =
            sample_sv_path(spec.geoms[sp.star], spec.regimes[sp.star], sp.ray,
                           sp.x, t, T, h, ns, us, local);
        if (res.outcome == SvResult::Horizon) {
            if (obs.cont()) obs.horizon(T);
            return rec;
        }
        if (res.outcome == SvResult::Killed) {
            rec.died = true;
            rec.zeta = res.t;
            obs.killed(res.t);
            return rec;
        }
        const StarStop* stop = star.stop_on(res.stop_ray);
        const int target = stop->target_vertex;
        rec.steps.emplace_back(res.t, target);
        obs.crossover(static_cast<int>(rec.steps.size()), res.t, target);
        obs.vertex_arrival(res.t, target);
        if (!obs.cont()) return rec;
        sp = {target, 0, 0.0};
        t = res.t;
        ++seg;
    }
}

// Per-path consistency diagnostics for a crossover record plus the uniform
// grid samples that produced it (see PathRecorder).
struct CrossoverDiagnostics {
    long strict_increase_violations = 0;
    long position_mismatches = 0;  // Y(S_n) != K_n at grid resolution
    long hitting_violations = 0;   // no near-target sample by the crossover
    long paths = 0;

    long total() const {
        return strict_increase_violations + position_mismatches + hitting_violations;
    }
    void merge(const CrossoverDiagnostics& o) {
        strict_increase_violations += o.strict_increase_violations;
        position_mismatches += o.position_mismatches;
        hitting_violations += o.hitting_violations;
        paths += o.paths;
    }
};

struct GlobalPathRecord {
    double grid = 0;  // sample spacing
    std::vector<double> ts;
    std::vector<GraphPoint> points;
    std::vector<char> alive;
    CrossoverRecord crossovers;
};

// Observer that samples the path on a uniform grid (spacing `grid`).
class PathRecorder {
  public:
    PathRecorder(const MetricGraph& g, double grid, double T)
        : g_(&g), grid_(grid), T_(T) {
        rec_.grid = grid;
    }

    void segment(double t0, double t1, GraphPoint p0, GraphPoint p1) {
        while (next_ <= t1 + 1e-12 && next_ <= T_ + 1e-12) {
            if (next_ < t0 - 1e-12) break;
            const double w = t1 > t0 ? (next_ - t0) / (t1 - t0) : 0.0;
            push(next_, {p0.kind, p0.edge, p0.x + w * (p1.x - p0.x)}, true);
            next_ += grid_;
        }
    }
    void hold(double t0, double t1, int v) {
        const GraphPoint pv = vertex_point(v);
        while (next_ <= t1 + 1e-12 && next_ <= T_ + 1e-12) {
            if (next_ < t0 - 1e-12) break;
            push(next_, pv, true);
            next_ += grid_;
        }
    }
    void vertex_arrival(double, int) {}
    void crossover(int, double t, int v) { rec_.crossovers.steps.emplace_back(t, v); }
    void killed(double t) {
        rec_.crossovers.died = true;
        rec_.crossovers.zeta = t;
        const GraphPoint pd{EdgeKind::Internal, -1, 0};  // cemetery marker
        while (next_ <= T_ + 1e-12) {
            push(next_, pd, false);
            next_ += grid_;
        }
    }
    void horizon(double) {}
    bool cont() const { return true; }

    GlobalPathRecord take() { return std::move(rec_); }

  private:
    GraphPoint vertex_point(int v) const {
        const HalfEdge h = g_->incident(v)[0];
        GraphPoint p{h.kind, h.edge, 0.0};
        if (h.kind == EdgeKind::Internal && h.end == 1)
            p.x = g_->internals[h.edge].length;
        return p;
    }
    void push(double t, GraphPoint p, bool alive) {
        rec_.ts.push_back(t);
        rec_.points.push_back(p);
        rec_.alive.push_back(alive ? 1 : 0);
    }

    const MetricGraph* g_;
    double grid_, T_;
    double next_ = 0;
    GlobalPathRecord rec_;
};

// Checks one recorded path: crossover times strictly increase, the sample at
// each S_n sits at K_n, and by each S_n some sample since S_{n-1} has come
// within 4 sqrt(h log(1/h)) of the target vertex set of the previous star.
CrossoverDiagnostics check_crossover(const PastedProcessSpec& spec,
                                     const GlobalPathRecord& rec, double h);

}  // namespace bmg
