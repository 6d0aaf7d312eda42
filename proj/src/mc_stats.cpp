#include "bmg/mc_stats.hpp"

#include <algorithm>
#include <cstdio>

namespace bmg {

Estimate estimate_resolvent(const PastedProcessSpec& spec, GraphPoint start,
                            const GraphFunction& f, double lambda,
                            const RunParams& rp) {
    auto fill = [&](long path, double* out) {
        ResolventIntegrator obs(spec, f, lambda, rp.h);
        obs.reset();
        sample_path(spec, start, rp.T, rp.h, rp.seed, path, obs);
        out[0] = obs.value();
    };
    const auto acc = run_paths(rp.n_paths, rp.workers, 1, fill);
    return {acc[0].mean, acc[0].stderror(), acc[0].n, rp.seed, rp.h};
}

std::vector<Estimate> estimate_hitting_lt(const PastedProcessSpec& spec,
                                          GraphPoint start, double lambda,
                                          const std::vector<int>& targets,
                                          const RunParams& rp) {
    const int k = static_cast<int>(targets.size());
    std::vector<char> is_target(spec.g.vertex_ids.size(), 0);
    for (int v : targets) is_target[v] = 1;
    auto fill = [&](long path, double* out) {
        FirstHitObserver obs;
        obs.is_target = is_target;
        sample_path(spec, start, rp.T, rp.h, rp.seed, path, obs);
        for (int j = 0; j < k; ++j)
            out[j] = obs.v == targets[j] ? std::exp(-lambda * obs.t) : 0.0;
    };
    const auto acc = run_paths(rp.n_paths, rp.workers, k, fill);
    std::vector<Estimate> out;
    for (int j = 0; j < k; ++j)
        out.push_back({acc[j].mean, acc[j].stderror(), acc[j].n, rp.seed, rp.h});
    return out;
}

EmpiricalChainKernel chain_kernel(const PastedProcessSpec& spec, int v,
                                  const RunParams& rp) {
    EmpiricalChainKernel ck;
    ck.start_vertex = v;
    ck.samples.resize(rp.n_paths);
    const auto inc = spec.g.incident(v);
    const GraphPoint start{inc[0].kind, inc[0].edge,
                           inc[0].kind == EdgeKind::Internal && inc[0].end == 1
                               ? spec.g.internals[inc[0].edge].length
                               : 0.0};
    auto fill = [&](long path, double* out) {
        TwoStepObserver obs;
        sample_path(spec, start, rp.T, rp.h, rp.seed, path, obs);
        ck.samples[path] = {obs.S1, obs.S2, obs.K1, obs.K2};
        out[0] = 0.0;
    };
    run_paths(rp.n_paths, rp.workers, 1, fill);
    return ck;
}

std::vector<double> EmpiricalChainKernel::k1_histogram(int n_vertices) const {
    std::vector<double> mass(n_vertices + 1, 0.0);  // last bucket: no crossover
    for (const auto& s : samples) {
        if (s.K1 >= 0)
            mass[s.K1] += 1.0;
        else
            mass[n_vertices] += 1.0;
    }
    for (double& m : mass) m /= static_cast<double>(samples.size());
    return mass;
}

std::vector<CkRow> ck_test(const PastedProcessSpec& spec,
                           const PastedProcessSpec& spec2, int v,
                           const std::vector<double>& lambdas, const RunParams& rp) {
    const int nv = static_cast<int>(spec.g.vertex_ids.size());
    // batch A (possibly perturbed spec): two-step functional from v
    RunParams rpa = rp;
    const auto two = chain_kernel(spec2, v, rpa);
    // batch B (reference spec): one-step kernels from every intermediate
    std::vector<int> mids;
    for (const auto& s : two.samples)
        if (s.K1 >= 0 &&
            std::find(mids.begin(), mids.end(), s.K1) == mids.end())
            mids.push_back(s.K1);
    RunParams rpb = rp;
    rpb.seed = rp.seed + 1;  // independent batch
    std::vector<EmpiricalChainKernel> one_from_v{chain_kernel(spec, v, rpb)};
    std::vector<EmpiricalChainKernel> one_from_mid;
    for (size_t m = 0; m < mids.size(); ++m) {
        RunParams rpm = rp;
        rpm.seed = rp.seed + 2 + m;
        one_from_mid.push_back(chain_kernel(spec, mids[m], rpm));
    }

    std::vector<CkRow> rows;
    for (double lambda : lambdas) {
        // accumulate per target w
        for (int w = 0; w < nv; ++w) {
            Accumulator lhs;
            for (const auto& s : two.samples)
                lhs.add(s.K2 == w ? std::exp(-lambda * s.S2) : 0.0);
            if (lhs.mean == 0.0) continue;  // target not reachable in two steps

            // composition sum_u E_v[e^{-l S1} 1{K1=u}] E_u[e^{-l S1} 1{K1=w}]
            double comp = 0, var = 0;
            for (size_t m = 0; m < mids.size(); ++m) {
                Accumulator a, b;
                for (const auto& s : one_from_v[0].samples)
                    a.add(s.K1 == mids[m] ? std::exp(-lambda * s.S1) : 0.0);
                for (const auto& s : one_from_mid[m].samples)
                    b.add(s.K1 == w ? std::exp(-lambda * s.S1) : 0.0);
                comp += a.mean * b.mean;
                const double va = a.stderror() * a.stderror();
                const double vb = b.stderror() * b.stderror();
                var += b.mean * b.mean * va + a.mean * a.mean * vb + va * vb;
            }
            CkRow row;
            row.lambda = lambda;
            row.target = w;
            row.two_step = lhs.mean;
            row.two_step_se = lhs.stderror();
            row.composed = comp;
            row.composed_se = std::sqrt(var);
            const double denom = std::sqrt(row.two_step_se * row.two_step_se + var);
            row.z = denom > 0 ? (row.two_step - row.composed) / denom : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string ReportRow::csv() const {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%ld,%.17g,%llu,%s",
                  experiment_id.c_str(), quantity.c_str(), reference, mean, se, z,
                  n_paths, h, static_cast<unsigned long long>(seed),
                  pass ? "pass" : "fail");
    return buf;
}

const char* ReportRow::header() {
    return "experiment_id,quantity,reference,mean,stderr,z,n_paths,h,seed,pass";
}

ReportRow compare(const std::string& experiment_id, const std::string& quantity,
                  double reference, const Estimate& est, double sigma, double bias_C) {
    ReportRow row;
    row.experiment_id = experiment_id;
    row.quantity = quantity;
    row.reference = reference;
    row.mean = est.mean;
    row.se = est.se;
    row.n_paths = est.n;
    row.h = est.h;
    row.seed = est.seed;
    const double err = std::abs(est.mean - reference);
    row.z = est.se > 0 ? (est.mean - reference) / est.se : (err == 0 ? 0.0 : 1e300);
    row.pass = err <= std::max(sigma * est.se, 2.0 * bias_C * est.h);
    return row;
}

}  // namespace bmg
