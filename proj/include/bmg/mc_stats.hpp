#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "bmg/functions.hpp"
#include "bmg/paste_engine.hpp"

namespace bmg {

// Streaming mean/variance with a merge rule, so path chunks can be reduced
// in a fixed order regardless of which worker produced them.
struct Accumulator {
    long n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Accumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const long nn = n + o.n;
        mean += d * o.n / nn;
        m2 += o.m2 + d * d * (static_cast<double>(n) * o.n) / nn;
        n = nn;
    }
    double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
    double stderror() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

struct Estimate {
    double mean = 0;
    double se = 0;
    long n = 0;
    std::uint64_t seed = 0;
    double h = 0;
};

// Deterministic parallel map over paths: fixed chunks of 1024 paths, workers
// pick chunks dynamically, per-chunk accumulators are merged in chunk order.
// fill(path_id, out) writes k values for one path.
template <class Fill>
std::vector<Accumulator> run_paths(long n_paths, int workers, int k, Fill fill) {
    constexpr long kChunk = 1024;
    const long n_chunks = (n_paths + kChunk - 1) / kChunk;
    std::vector<std::vector<Accumulator>> per_chunk(n_chunks,
                                                    std::vector<Accumulator>(k));
    std::atomic<long> next{0};
    auto work = [&] {
        std::vector<double> vals(k);
        while (true) {
            const long c = next.fetch_add(1);
            if (c >= n_chunks) return;
            const long lo = c * kChunk, hi = std::min(n_paths, lo + kChunk);
            for (long p = lo; p < hi; ++p) {
                fill(p, vals.data());
                for (int j = 0; j < k; ++j) per_chunk[c][j].add(vals[j]);
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    std::vector<Accumulator> out(k);
    for (long c = 0; c < n_chunks; ++c)
        for (int j = 0; j < k; ++j) out[j].merge(per_chunk[c][j]);
    return out;
}

// Observer accumulating int_0^{zeta ^ T} e^{-lambda t} f(X_t) dt, trapezoid in
// t on moving segments, exact in t on vertex holds.
class ResolventIntegrator {
  public:
    ResolventIntegrator(const PastedProcessSpec& spec, const GraphFunction& f,
                        double lambda, double h)
        : f_(&f), lambda_(lambda), h_(h), eh_(std::exp(-lambda * h)) {
        const MetricGraph& g = spec.g;
        act_int_.resize(g.internals.size());
        for (size_t i = 0; i < g.internals.size(); ++i)
            act_int_[i] = f.active_on(g, EdgeKind::Internal, static_cast<int>(i));
        act_ext_.resize(g.externals.size());
        for (size_t e = 0; e < g.externals.size(); ++e)
            act_ext_[e] = f.active_on(g, EdgeKind::External, static_cast<int>(e));
        for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
            const HalfEdge he = g.incident(v)[0];
            GraphPoint p{he.kind, he.edge, 0.0};
            if (he.kind == EdgeKind::Internal && he.end == 1)
                p.x = g.internals[he.edge].length;
            f_vertex_.push_back(f.eval(g, p));
        }
    }

    void reset() {
        sum_ = 0;
        cache_t_ = 0;
        cache_w_ = 1;
    }
    double value() const { return sum_; }

    void segment(double t0, double t1, GraphPoint p0, GraphPoint p1) {
        const bool active = p0.kind == EdgeKind::Internal ? act_int_[p0.edge]
                                                          : act_ext_[p0.edge];
        if (!active) return;
        const double w0 = weight(t0);
        const double dt = t1 - t0;
        const double w1 = dt == h_ ? w0 * eh_ : w0 * std::exp(-lambda_ * dt);
        sum_ += 0.5 * dt * (w0 * f_->eval_x(p0.x) + w1 * f_->eval_x(p1.x));
        cache_t_ = t1;
        cache_w_ = w1;
    }
    void hold(double t0, double t1, int v) {
        const double fv = f_vertex_[v];
        const double w0 = weight(t0);
        const double w1 = w0 * std::exp(-lambda_ * (t1 - t0));
        if (fv != 0) sum_ += fv * (w0 - w1) / lambda_;
        cache_t_ = t1;
        cache_w_ = w1;
    }
    void vertex_arrival(double, int) {}
    void crossover(int, double, int) {}
    void killed(double) {}
    void horizon(double) {}
    bool cont() const { return true; }

  private:
    double weight(double t) {
        if (t == cache_t_) return cache_w_;
        return std::exp(-lambda_ * t);
    }

    const GraphFunction* f_;
    double lambda_, h_, eh_;
    std::vector<char> act_int_, act_ext_;
    std::vector<double> f_vertex_;
    double sum_ = 0, cache_t_ = 0, cache_w_ = 1;
};

// Observer recording the first arrival at a target vertex, then aborting.
struct FirstHitObserver {
    std::vector<char> is_target;  // per vertex
    double t = std::numeric_limits<double>::infinity();
    int v = -1;

    void reset() {
        t = std::numeric_limits<double>::infinity();
        v = -1;
    }
    void segment(double, double, GraphPoint, GraphPoint) {}
    void hold(double, double, int) {}
    void vertex_arrival(double at, int vv) {
        if (v < 0 && is_target[vv]) {
            t = at;
            v = vv;
        }
    }
    void crossover(int, double, int) {}
    void killed(double) {}
    void horizon(double) {}
    bool cont() const { return v < 0; }
};

// Observer recording the first two crossovers, then aborting.
struct TwoStepObserver {
    double S1 = std::numeric_limits<double>::infinity();
    double S2 = std::numeric_limits<double>::infinity();
    int K1 = -1, K2 = -1;

    void reset() { *this = TwoStepObserver{}; }
    void segment(double, double, GraphPoint, GraphPoint) {}
    void hold(double, double, int) {}
    void vertex_arrival(double, int) {}
    void crossover(int n, double t, int v) {
        if (n == 1) {
            S1 = t;
            K1 = v;
        } else if (n == 2) {
            S2 = t;
            K2 = v;
        }
    }
    void killed(double) {}
    void horizon(double) {}
    bool cont() const { return K2 < 0; }
};

struct RunParams {
    long n_paths = 0;
    double T = 0;
    double h = 1e-4;
    std::uint64_t seed = 0;
    int workers = 1;
};

Estimate estimate_resolvent(const PastedProcessSpec& spec, GraphPoint start,
                            const GraphFunction& f, double lambda,
                            const RunParams& rp);

// Per-target mean of e^{-lambda H} 1{first target hit is this one};
// paths that die or reach the horizon first contribute 0.
std::vector<Estimate> estimate_hitting_lt(const PastedProcessSpec& spec,
                                          GraphPoint start, double lambda,
                                          const std::vector<int>& targets,
                                          const RunParams& rp);

struct ChainSample {
    double S1 = std::numeric_limits<double>::infinity();
    double S2 = std::numeric_limits<double>::infinity();
    int K1 = -1, K2 = -1;
};

struct EmpiricalChainKernel {
    int start_vertex = -1;
    std::vector<ChainSample> samples;

    // empirical mass of K1 over vertices plus the no-crossover bucket
    std::vector<double> k1_histogram(int n_vertices) const;
};

EmpiricalChainKernel chain_kernel(const PastedProcessSpec& spec, int v,
                                  const RunParams& rp);

// One Chapman-Kolmogorov comparison: the two-step Laplace functional from v
// against the composition of one-step kernels, per (lambda, target vertex).
struct CkRow {
    double lambda = 0;
    int target = -1;
    double two_step = 0, two_step_se = 0;
    double composed = 0, composed_se = 0;
    double z = 0;
};

// Uses independent batches: `two_step` from `spec2` (normally == spec; pass a
// perturbed spec for sensitivity controls), compositions from `spec`.
std::vector<CkRow> ck_test(const PastedProcessSpec& spec,
                           const PastedProcessSpec& spec2, int v,
                           const std::vector<double>& lambdas, const RunParams& rp);

struct ReportRow {
    std::string experiment_id;
    std::string quantity;
    double reference = 0;
    double mean = 0;
    double se = 0;
    double z = 0;
    long n_paths = 0;
    double h = 0;
    std::uint64_t seed = 0;
    bool pass = false;

    std::string csv() const;
    static const char* header();
};

// Pass iff |mean - ref| <= max(sigma * se, 2 * bias_C * h). bias_C is the
// documented discretization-bias constant of the estimator (0 = none).
ReportRow compare(const std::string& experiment_id, const std::string& quantity,
                  double reference, const Estimate& est, double sigma = 3.0,
                  double bias_C = 0.0);

}  // namespace bmg
