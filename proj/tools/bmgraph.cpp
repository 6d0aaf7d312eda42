// Command-line front end: parse graph files, solve the resolvent oracle, run
// the Monte-Carlo estimators, and cross-check the two against each other.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 usage error, 3 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmg/graph_io.hpp"
#include "bmg/mc_stats.hpp"
#include "bmg/resolvent.hpp"
#include "bmg/stars.hpp"
#include "bmg/wentzell.hpp"

using namespace bmg;

namespace {

struct Opts {
    std::string graph;
    std::string out;
    std::string fspec = "const:1";
    std::string start;
    std::vector<double> lambdas{0.5};
    long paths = 10000;
    double step = 1e-3;
    double horizon = 0;  // 0 = auto: 20 / min(lambda)
    std::uint64_t seed = 1;
    int workers = 1;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ParsedGraph load(const Opts& o) {
    if (o.graph.empty()) throw CLI::ValidationError("--graph is required");
    std::ifstream f(o.graph);
    if (!f) throw IoError("cannot open " + o.graph);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_graph(ss.str());
}

void emit(const Opts& o, const std::string& name, const std::string& content) {
    if (o.out.empty()) {
        std::fputs(content.c_str(), stdout);
        return;
    }
    const std::string path = o.out + "/" + name;
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << content;
}

double auto_horizon(const Opts& o) {
    if (o.horizon > 0) return o.horizon;
    const double lmin = *std::min_element(o.lambdas.begin(), o.lambdas.end());
    return 20.0 / lmin;  // e^{-lambda T} <= e^{-20}: truncation below 3e-9
}

// "edge:x" (distance x from the edge's from-vertex / anchor) or a vertex id.
GraphPoint parse_start(const MetricGraph& g, const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
        for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
            if (g.vertex_ids[v] != s) continue;
            const HalfEdge h = g.incident(v)[0];
            GraphPoint p{h.kind, h.edge, 0.0};
            if (h.kind == EdgeKind::Internal && h.end == 1)
                p.x = g.internals[h.edge].length;
            return p;
        }
        throw CLI::ValidationError("--start: unknown vertex " + s);
    }
    const std::string id = s.substr(0, colon);
    const double x = std::stod(s.substr(colon + 1));
    if (const int i = g.internal_index(id); i >= 0)
        return {EdgeKind::Internal, i, x};
    if (const int e = g.external_index(id); e >= 0)
        return {EdgeKind::External, e, x};
    throw CLI::ValidationError("--start: unknown edge " + id);
}

GraphPoint default_start(const MetricGraph& g) {
    if (!g.internals.empty())
        return {EdgeKind::Internal, 0, g.internals[0].length / 2};
    return {EdgeKind::External, 0, 1.0};
}

bool has_loops(const MetricGraph& g) {
    for (const auto& e : g.internals)
        if (e.v_from == e.v_to) return true;
    return false;
}

// Simulation-ready form: tadpoles expanded, start point mapped along.
struct SimSetup {
    PastedProcessSpec spec;
    GraphPoint start;
};

SimSetup sim_setup(const ParsedGraph& pg, GraphPoint start) {
    if (!has_loops(pg.g)) return {build_process(pg.g, pg.data), start};
    const TadpoleExpansion ex = expand_tadpoles(pg.g, pg.data);
    return {build_process(ex.g, ex.data), ex.map_point(start)};
}

std::string describe_regime(const VertexRegime& r) {
    char buf[160];
    switch (r.kind) {
        case VertexRegime::Trap:
            return "trap";
        case VertexRegime::HoldKill:
            std::snprintf(buf, sizeof buf, "hold-kill rate=%g", r.hold_rate);
            return buf;
        case VertexRegime::Sticky: {
            std::string s = "walsh p=(";
            for (size_t i = 0; i < r.p.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%s%g", i ? "," : "", r.p[i]);
                s += buf;
            }
            std::snprintf(buf, sizeof buf, ") rho=%g gamma=%g", r.rho, r.gamma);
            return s + buf;
        }
    }
    return "";
}

int cmd_validate(const Opts& o) {
    const ParsedGraph pg = load(o);
    const auto errs = validate(pg.data, pg.g);
    if (!errs.empty()) {
        for (const auto& e : errs) std::fprintf(stderr, "bmgraph: %s\n", e.c_str());
        return 1;
    }
    std::string out = canonical_form(pg.g);
    for (int v = 0; v < static_cast<int>(pg.g.vertex_ids.size()); ++v)
        out += "regime " + pg.g.vertex_ids[v] + " " +
               describe_regime(classify(pg.data, pg.g, v)) + "\n";
    emit(o, "validate.txt", out);
    return 0;
}

int cmd_resolvent(const Opts& o) {
    const ParsedGraph pg = load(o);
    const GraphFunction f = parse_function(o.fspec);
    std::string csv = "lambda,edge,kind,x,u\n";
    char buf[160];
    for (double lambda : o.lambdas) {
        const auto sol = solve_resolvent(pg.g, pg.data, f.field(pg.g), lambda);
        constexpr int kGrid = 32;
        for (size_t i = 0; i < pg.g.internals.size(); ++i) {
            const auto& e = pg.g.internals[i];
            for (int k = 0; k <= kGrid; ++k) {
                const double x = e.length * k / kGrid;
                std::snprintf(buf, sizeof buf, "%.17g,%s,internal,%.17g,%.17g\n",
                              lambda, e.id.c_str(), x,
                              sol.eval({EdgeKind::Internal, static_cast<int>(i), x}));
                csv += buf;
            }
        }
        const double reach = 4.0 / sol.s;  // u decays like e^{-sx}
        for (size_t e = 0; e < pg.g.externals.size(); ++e) {
            for (int k = 0; k <= kGrid; ++k) {
                const double x = reach * k / kGrid;
                std::snprintf(buf, sizeof buf, "%.17g,%s,external,%.17g,%.17g\n",
                              lambda, pg.g.externals[e].id.c_str(), x,
                              sol.eval({EdgeKind::External, static_cast<int>(e), x}));
                csv += buf;
            }
        }
    }
    emit(o, "resolvent.csv", csv);
    return 0;
}

int cmd_simulate(const Opts& o) {
    const ParsedGraph pg = load(o);
    const double T = o.horizon > 0 ? o.horizon : 10.0;
    const auto [spec, start] =
        sim_setup(pg, o.start.empty() ? default_start(pg.g)
                                      : parse_start(pg.g, o.start));
    const long dump_stride =
        std::max<long>(1, std::lround(T / o.step) * o.paths / 200000);
    std::string paths_csv = "path,t,kind,edge,x,alive\n";
    std::string cross_csv = "path,n,t,vertex\n";
    char buf[160];
    CrossoverDiagnostics diag;
    for (long p = 0; p < o.paths; ++p) {
        PathRecorder rec(spec.g, o.step, T);
        sample_path(spec, start, T, o.step, o.seed, p, rec);
        const auto r = rec.take();
        diag.merge(check_crossover(spec, r, o.step));
        for (size_t k = 0; k < r.ts.size(); k += dump_stride) {
            const auto& pt = r.points[k];
            std::snprintf(buf, sizeof buf, "%ld,%.17g,%s,%s,%.17g,%d\n", p,
                          r.ts[k],
                          pt.kind == EdgeKind::Internal ? "internal" : "external",
                          pt.edge >= 0 ? spec.g.edge_id({pt.kind, pt.edge, 0}).c_str()
                                       : "-",
                          pt.x, static_cast<int>(r.alive[k]));
            paths_csv += buf;
        }
        for (size_t n = 0; n < r.crossovers.steps.size(); ++n) {
            const auto& [t, v] = r.crossovers.steps[n];
            std::snprintf(buf, sizeof buf, "%ld,%zu,%.17g,%s\n", p, n + 1, t,
                          spec.g.vertex_ids[v].c_str());
            cross_csv += buf;
        }
    }
    emit(o, "paths.csv", paths_csv);
    emit(o, "crossovers.csv", cross_csv);
    std::fprintf(stderr,
                 "paths=%ld order_violations=%ld position_mismatches=%ld "
                 "hitting_violations=%ld\n",
                 diag.paths, diag.strict_increase_violations,
                 diag.position_mismatches, diag.hitting_violations);
    return diag.total() == 0 ? 0 : 1;
}

int report(const Opts& o, const std::string& name,
           const std::vector<ReportRow>& rows) {
    std::string csv = std::string(ReportRow::header()) + "\n";
    bool ok = true;
    for (const auto& r : rows) {
        csv += r.csv() + "\n";
        ok = ok && r.pass;
        std::fprintf(stderr, "%s  %s %s\n", r.pass ? "PASS" : "FAIL",
                     r.experiment_id.c_str(), r.quantity.c_str());
    }
    emit(o, name, csv);
    return ok ? 0 : 1;
}

int cmd_hitting_lt(const Opts& o) {
    const ParsedGraph pg = load(o);
    const GraphPoint start = o.start.empty() ? default_start(pg.g)
                                             : parse_start(pg.g, o.start);
    const auto [spec, sim_start] = sim_setup(pg, start);
    // targets: the endpoint set of the start edge, in the expanded graph
    std::vector<int> targets;
    if (sim_start.kind == EdgeKind::Internal) {
        const auto& e = spec.g.internals[sim_start.edge];
        targets = {e.v_from, e.v_to};
        if (e.v_from == e.v_to) targets.pop_back();
    } else {
        targets = {spec.g.externals[sim_start.edge].v};
    }
    std::vector<ReportRow> rows;
    for (double lambda : o.lambdas) {
        const HittingWeights hw = hitting_lt(spec.g, sim_start, lambda);
        RunParams rp{o.paths, auto_horizon(o), o.step, o.seed, o.workers};
        const auto est = estimate_hitting_lt(spec, sim_start, lambda, targets, rp);
        char id[64];
        std::snprintf(id, sizeof id, "hit-lt-l%g", lambda);
        for (size_t j = 0; j < targets.size(); ++j) {
            const double ref = j == 0 ? hw.w_from : hw.w_to;
            rows.push_back(compare(id, "lt-" + spec.g.vertex_ids[targets[j]],
                                   ref, est[j], 3.0, 1.0));
        }
        if (targets.size() == 2) {
            Estimate tot{est[0].mean + est[1].mean,
                         std::hypot(est[0].se, est[1].se), est[0].n, est[0].seed,
                         est[0].h};
            rows.push_back(compare(id, "lt-total", hw.w_from + hw.w_to, tot, 3.0, 2.0));
        }
    }
    return report(o, "hitting.csv", rows);
}

int cmd_estimate_resolvent(const Opts& o) {
    const ParsedGraph pg = load(o);
    const GraphFunction f = parse_function(o.fspec);
    const GraphPoint start = o.start.empty() ? default_start(pg.g)
                                             : parse_start(pg.g, o.start);
    const auto [spec, sim_start] = sim_setup(pg, start);
    std::vector<ReportRow> rows;
    for (double lambda : o.lambdas) {
        const auto sol = solve_resolvent(pg.g, pg.data, f.field(pg.g), lambda);
        RunParams rp{o.paths, auto_horizon(o), o.step, o.seed, o.workers};
        const auto est = estimate_resolvent(spec, sim_start, f, lambda, rp);
        char id[64];
        std::snprintf(id, sizeof id, "res-l%g", lambda);
        rows.push_back(compare(id, "u(start)", sol.eval(start), est, 3.0, 1.0));
    }
    return report(o, "estimate.csv", rows);
}

int cmd_chain_test(const Opts& o) {
    const ParsedGraph pg = load(o);
    const auto [spec, start] = sim_setup(pg, default_start(pg.g));
    int v = 0;
    if (!o.start.empty()) {
        const auto it = std::find(spec.g.vertex_ids.begin(),
                                  spec.g.vertex_ids.end(), o.start);
        if (it == spec.g.vertex_ids.end())
            throw CLI::ValidationError("--start: unknown vertex " + o.start);
        v = static_cast<int>(it - spec.g.vertex_ids.begin());
    }
    RunParams rp{o.paths, auto_horizon(o), o.step, o.seed, o.workers};
    const auto rows = ck_test(spec, spec, v, o.lambdas, rp);
    std::string csv = "lambda,target,two_step,two_step_se,composed,composed_se,z\n";
    char buf[200];
    bool ok = true;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.lambda, spec.g.vertex_ids[r.target].c_str(), r.two_step,
                      r.two_step_se, r.composed, r.composed_se, r.z);
        csv += buf;
        ok = ok && std::abs(r.z) <= 3.0;
    }
    emit(o, "chain.csv", csv);
    return ok ? 0 : 1;
}

ReportRow exact_row(const std::string& id, const std::string& q, double value,
                    double tol) {
    ReportRow r;
    r.experiment_id = id;
    r.quantity = q;
    r.reference = 0;
    r.mean = value;
    r.z = tol > 0 ? value / tol : 0;
    r.pass = std::abs(value) <= tol;
    return r;
}

int cmd_verify(const Opts& o) {
    const ParsedGraph pg = load(o);
    const GraphFunction f = parse_function(o.fspec);
    const GraphPoint start = o.start.empty() ? default_start(pg.g)
                                             : parse_start(pg.g, o.start);
    const auto [spec, sim_start] = sim_setup(pg, start);
    std::vector<ReportRow> rows;
    const double lambda0 = o.lambdas.front();

    // oracle self-consistency
    const auto sol = solve_resolvent(pg.g, pg.data, f.field(pg.g), lambda0);
    rows.push_back(exact_row("oracle", "continuity-residual",
                             sol.max_continuity_residual(), 1e-8));
    double dom = 0;
    for (double r : check_domain(sol, pg.data)) dom = std::max(dom, std::abs(r));
    rows.push_back(exact_row("oracle", "boundary-residual", dom, 1e-6));

    // resolvent identity R_l f - R_m f = (m - l) R_l R_m f on a probe grid
    {
        const double mu = 4.0 * lambda0;
        const auto solm = solve_resolvent(pg.g, pg.data, f.field(pg.g), mu);
        const auto soln = solve_resolvent(
            pg.g, pg.data, [&](GraphPoint p) { return solm.eval(p); }, lambda0);
        double worst = 0;
        for (const auto& probe : {start, sim_start}) {
            const double lhs = sol.eval(probe) - solm.eval(probe);
            const double rhs = (mu - lambda0) * soln.eval(probe);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rows.push_back(exact_row("oracle", "resolvent-identity", worst, 1e-6));
    }

    // conservation: with no killing anywhere, lambda R_lambda 1 = 1
    bool conservative = true;
    for (const auto& wd : pg.data.v) conservative = conservative && wd.a == 0;
    if (conservative) {
        const auto sol1 =
            solve_resolvent(pg.g, pg.data, [](GraphPoint) { return 1.0; }, lambda0);
        double worst = 0;
        for (const auto& probe : {start, sim_start})
            worst = std::max(worst, std::abs(lambda0 * sol1.eval(probe) - 1.0));
        rows.push_back(exact_row("oracle", "conservation", worst, 1e-8));
    }

    // Monte-Carlo hitting transform vs the oracle, from the start point
    std::vector<int> targets;
    if (sim_start.kind == EdgeKind::Internal) {
        const auto& e = spec.g.internals[sim_start.edge];
        targets = {e.v_from, e.v_to};
    } else {
        targets = {spec.g.externals[sim_start.edge].v};
    }
    for (double lambda : o.lambdas) {
        const HittingWeights hw = hitting_lt(spec.g, sim_start, lambda);
        RunParams rp{o.paths, auto_horizon(o), o.step, o.seed, o.workers};
        const auto est = estimate_hitting_lt(spec, sim_start, lambda, targets, rp);
        char id[64];
        std::snprintf(id, sizeof id, "hit-lt-l%g", lambda);
        double tot_ref = 0;
        Estimate tot{0, 0, est[0].n, est[0].seed, est[0].h};
        for (size_t j = 0; j < targets.size(); ++j) {
            const double ref = j == 0 ? hw.w_from : hw.w_to;
            rows.push_back(compare(id, "lt-" + spec.g.vertex_ids[targets[j]],
                                   ref, est[j], 3.0, 1.0));
            tot_ref += ref;
            tot.mean += est[j].mean;
            tot.se = std::hypot(tot.se, est[j].se);
        }
        if (targets.size() > 1)
            rows.push_back(compare(id, "lt-total", tot_ref, tot, 3.0, 2.0));
    }

    // Monte-Carlo resolvent vs the oracle at the start point
    {
        RunParams rp{std::max(o.paths / 10, 2000L), auto_horizon(o), o.step,
                     o.seed, o.workers};
        const auto est = estimate_resolvent(spec, sim_start, f, lambda0, rp);
        rows.push_back(compare("res-mc", "u(start)", sol.eval(start), est, 3.0, 1.0));
    }

    // crossover-chain semigroup consistency (skipped when nothing crosses over)
    {
        RunParams rp{std::max(o.paths / 10, 2000L), auto_horizon(o), o.step,
                     o.seed, o.workers};
        const auto ck = ck_test(spec, spec, 0, o.lambdas, rp);
        if (!ck.empty()) {
            double worst = 0;
            for (const auto& r : ck) worst = std::max(worst, std::abs(r.z));
            rows.push_back(exact_row("chain", "max-z", worst, 3.0));
        }
    }

    // determinism across worker counts
    {
        RunParams rp{2048, 4.0, o.step, o.seed, 1};
        const auto a = estimate_resolvent(spec, sim_start, f, lambda0, rp);
        rp.workers = 4;
        const auto b = estimate_resolvent(spec, sim_start, f, lambda0, rp);
        ReportRow r;
        r.experiment_id = "determinism";
        r.quantity = "workers-1-vs-4";
        r.reference = a.mean;
        r.mean = b.mean;
        r.n_paths = rp.n_paths;
        r.h = rp.h;
        r.seed = rp.seed;
        r.pass = a.mean == b.mean && a.se == b.se;
        rows.push_back(r);
    }

    return report(o, "report.csv", rows);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian motion on metric graphs: resolvent oracle and "
                 "pasted-path Monte-Carlo, cross-checked"};
    app.require_subcommand(1);
    Opts o;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--graph", o.graph, "graph description file")->required();
        c->add_option("--lambda", o.lambdas, "resolvent parameter(s)")
            ->delimiter(',')
            ->check(CLI::PositiveNumber);
        c->add_option("--paths", o.paths, "number of Monte-Carlo paths")
            ->check(CLI::PositiveNumber);
        c->add_option("--step", o.step, "time step h")->check(CLI::PositiveNumber);
        c->add_option("--horizon", o.horizon,
                      "time horizon T (default 20/min lambda)");
        c->add_option("--seed", o.seed, "random seed");
        c->add_option("--out", o.out, "output directory (default stdout)");
        c->add_option("--workers", o.workers, "worker threads")
            ->check(CLI::PositiveNumber);
        c->add_option("--f", o.fspec,
                      "source term: const:V | bump:EDGE:C:W | ind:EDGE:LO:HI:RAMP");
        c->add_option("--start", o.start, "start point EDGE:X or vertex id");
        return c;
    };

    const auto* validate_cmd = add_common(app.add_subcommand(
        "validate", "check a graph file and print its canonical form"));
    const auto* resolvent_cmd = add_common(app.add_subcommand(
        "resolvent", "solve the resolvent oracle, dump per-edge samples"));
    const auto* simulate_cmd = add_common(app.add_subcommand(
        "simulate", "sample paths, dump positions and crossover chains"));
    const auto* hitting_cmd = add_common(app.add_subcommand(
        "hitting-lt", "estimate hitting-time transforms vs the exact values"));
    const auto* estimate_cmd = add_common(app.add_subcommand(
        "estimate-resolvent", "Monte-Carlo resolvent vs the oracle"));
    const auto* chain_cmd = add_common(app.add_subcommand(
        "chain-test", "two-step vs composed crossover-chain kernels"));
    const auto* verify_cmd = add_common(app.add_subcommand(
        "verify", "full cross-check suite, report CSV + summary"));

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(validate_cmd)) return cmd_validate(o);
        if (app.got_subcommand(resolvent_cmd)) return cmd_resolvent(o);
        if (app.got_subcommand(simulate_cmd)) return cmd_simulate(o);
        if (app.got_subcommand(hitting_cmd)) return cmd_hitting_lt(o);
        if (app.got_subcommand(estimate_cmd)) return cmd_estimate_resolvent(o);
        if (app.got_subcommand(chain_cmd)) return cmd_chain_test(o);
        if (app.got_subcommand(verify_cmd)) return cmd_verify(o);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "bmgraph: %s\n", e.what());
        return 3;
    } catch (const GraphError& e) {
        std::fprintf(stderr, "bmgraph: %s\n", e.what());
        return 1;
    }
}
