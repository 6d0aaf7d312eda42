#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bmg/mc_stats.hpp"
#include "bmg/paste_engine.hpp"
#include "bmg/resolvent.hpp"
#include "helpers.hpp"

using namespace bmg;
using namespace bmg::testing;

namespace {

struct StarNull {
    void segment(double, double, int, double, double) {}
    void hold(double, double) {}
    void vertex_touch(double) {}
    bool cont() const { return true; }
};

struct CountingObserver {
    std::vector<long> ray_counts;
    std::vector<double> ray_time;
    double local_time_probe = 0;

    void segment(double t0, double t1, int ray, double, double) {
        if (ray < static_cast<int>(ray_time.size())) ray_time[ray] += t1 - t0;
    }
    void hold(double, double) {}
    void vertex_touch(double) {}
    void ray_selected(int r) { ++ray_counts[r]; }
    bool cont() const { return true; }
};

}  // namespace

TEST_CASE("interval first passage transform from the midpoint") {
    // E[e^{-lambda H_V}] = 2 sinh(0.5)/sinh(1) at lambda = 0.5
    const auto pg = interval_trap();
    const auto spec = build_process(pg.g, pg.data);
    RunParams rp{20000, 20.0, 1e-3, 42, 1};
    const auto est = estimate_hitting_lt(spec, {EdgeKind::Internal, 0, 0.5}, 0.5,
                                         {0, 1}, rp);
    const double ref = std::sinh(0.5) / std::sinh(1.0);
    for (int j = 0; j < 2; ++j) {
        INFO("endpoint ", j, " mean ", est[j].mean, " se ", est[j].se);
        CHECK(std::abs(est[j].mean - ref) <
              std::max(3.0 * est[j].se, 2.0 * 1.0 * rp.h));
    }
    // symmetric split of the first hit
    CHECK(std::abs(est[0].mean - est[1].mean) < 4.0 * (est[0].se + est[1].se));
}

TEST_CASE("external ray hitting transform") {
    // start x=1 on a half-line, lambda = 0.5: E[e^{-lambda H}] = e^{-1}
    const auto pg = parse_graph("vertex v\needge e v\nwentzell v c=1\n");
    const auto spec = build_process(pg.g, pg.data);
    RunParams rp{20000, 30.0, 1e-3, 7, 1};
    const auto est = estimate_hitting_lt(spec, {EdgeKind::External, 0, 1.0}, 0.5,
                                         {0}, rp);
    CHECK(std::abs(est[0].mean - std::exp(-1.0)) <
          std::max(3.0 * est[0].se, 2.0 * 1.0 * rp.h));
}

TEST_CASE("hold-and-kill lifetime") {
    const auto pg = parse_graph("vertex v\needge e v\nwentzell v a=0.2 c=0.8\n");
    const auto spec = build_process(pg.g, pg.data);
    Accumulator zeta;
    NullObserver obs;
    for (long p = 0; p < 10000; ++p) {
        const auto rec = sample_path(spec, {EdgeKind::External, 0, 0.0}, 80.0,
                                     1e-3, 11, p, obs);
        REQUIRE(rec.died);
        zeta.add(rec.zeta);
    }
    CHECK(std::abs(zeta.mean - 4.0) < 3.0 * zeta.stderror());
}

TEST_CASE("walsh ray selection frequencies and occupation") {
    const auto pg = parse_graph(
        "vertex v\needge e1 v\needge e2 v\needge e3 v\n"
        "wentzell v a=0 c=0\nwb v e1 0.5\nwb v e2 0.3\nwb v e3 0.2\n");
    const auto spec = build_process(pg.g, pg.data);
    CountingObserver obs;
    obs.ray_counts.assign(3, 0);
    obs.ray_time.assign(3, 0.0);
    long total = 0;
    for (long p = 0; p < 1500 && total < 100000; ++p) {
        NormalStream ns(5, p, 0);
        UniformStream us(5, p, 0);
        sample_sv_path(spec.geoms[0], spec.regimes[0], 0, 0.0, 0.0, 5.0, 1e-4,
                       ns, us, obs);
        total = obs.ray_counts[0] + obs.ray_counts[1] + obs.ray_counts[2];
    }
    REQUIRE(total >= 100000);
    const double p_ref[3] = {0.5, 0.3, 0.2};
    double t_total = obs.ray_time[0] + obs.ray_time[1] + obs.ray_time[2];
    for (int r = 0; r < 3; ++r) {
        const double phat = static_cast<double>(obs.ray_counts[r]) / total;
        const double sigma = std::sqrt(p_ref[r] * (1 - p_ref[r]) / total);
        CHECK(std::abs(phat - p_ref[r]) < 3.0 * sigma);
        // occupation fractions follow the same law (correlated, loose bound)
        CHECK(std::abs(obs.ray_time[r] / t_total - p_ref[r]) < 0.05);
    }
}

TEST_CASE("local time matches the Levy identity") {
    // reflecting half-line from the origin: E[l_T] = sqrt(2T/pi), with the
    // documented skeleton-minimum bias of about 0.58 sqrt(h)
    const auto pg = parse_graph("vertex v\needge e v\n"
                                "wentzell v a=0 c=0\nwb v e 1.0\n");
    const auto spec = build_process(pg.g, pg.data);
    const double h = 1e-4, T = 1.0;
    Accumulator acc;
    StarNull null;
    for (long p = 0; p < 20000; ++p) {
        NormalStream ns(9, p, 0);
        UniformStream us(9, p, 0);
        const auto res = sample_sv_path(spec.geoms[0], spec.regimes[0], 0, 0.0,
                                        0.0, T, h, ns, us, null);
        acc.add(res.local_time);
    }
    const double ref = std::sqrt(2.0 * T / std::numbers::pi);
    CHECK(std::abs(acc.mean - ref) < 3.0 * acc.stderror() + 0.6 * std::sqrt(h));
    CHECK(acc.mean < ref);  // skeleton minimum can only undershoot
}

TEST_CASE("trap start is deterministic") {
    const auto pg = interval_trap();
    const auto spec = build_process(pg.g, pg.data);
    const GraphFunction f = constant_fn(1.0);
    RunParams rp{50, 10.0, 1e-3, 1, 1};
    const auto est = estimate_resolvent(spec, {EdgeKind::Internal, 0, 0.0}, f,
                                        0.5, rp);
    const double ref = (1.0 - std::exp(-0.5 * 10.0)) / 0.5;
    CHECK(est.mean == doctest::Approx(ref).epsilon(1e-12));
    CHECK(est.se == 0.0);
}

TEST_CASE("conservation of the time integral without killing") {
    const auto pg = two_vertex_conservative();
    const auto spec = build_process(pg.g, pg.data);
    const GraphFunction f = constant_fn(1.0);
    RunParams rp{2000, 20.0, 2e-3, 3, 1};
    const auto est = estimate_resolvent(spec, {EdgeKind::Internal, 0, 0.3}, f,
                                        1.0, rp);
    // with f = 1 the integral is (1 - e^{-lambda T})/lambda path by path
    const double ref = (1.0 - std::exp(-1.0 * 20.0)) / 1.0;
    CHECK(est.mean == doctest::Approx(ref).epsilon(1e-6));
    CHECK(est.se < 1e-6);
}

TEST_CASE("first crossover on the reflecting interval") {
    const auto pg = interval_reflect();
    const auto spec = build_process(pg.g, pg.data);
    RunParams rp{10000, 20.0, 1e-3, 13, 1};
    const auto ck = chain_kernel(spec, 0, rp);
    // from v1 the only reachable crossover target is v2
    long hits = 0;
    Accumulator lt;
    for (const auto& s : ck.samples) {
        if (s.K1 >= 0) {
            ++hits;
            CHECK(s.K1 == 1);
            lt.add(std::exp(-0.5 * s.S1));
        }
    }
    CHECK(hits == rp.n_paths);  // horizon 20 is ample for a unit interval
    // E_0[e^{-lambda H_1}] = 1/cosh(sqrt(2 lambda)) at lambda = 0.5. The
    // skeleton-minimum reflection at v1 delays the crossover by O(sqrt h),
    // hence the extra bias allowance.
    const double ref = 1.0 / std::cosh(1.0);
    CHECK(lt.mean < ref + 3.0 * lt.stderror());
    CHECK(std::abs(lt.mean - ref) < 3.0 * lt.stderror() + 0.5 * std::sqrt(rp.h));
}

TEST_CASE("first crossover transform from an interior start") {
    // from x = 0.5 on the star of v1 (reflecting at 0) the first crossover is
    // always to v2, with E[e^{-lambda S1}] = cosh(s x)/cosh(s a), s = 1
    const auto pg = interval_reflect();
    const auto spec = build_process(pg.g, pg.data);
    NullObserver null;
    Accumulator lt;
    const long n = 10000;
    for (long p = 0; p < n; ++p) {
        const auto rec = sample_path(spec, {EdgeKind::Internal, 0, 0.5}, 40.0,
                                     1e-3, 17, p, null);
        REQUIRE(!rec.steps.empty());
        CHECK(rec.steps[0].second == 1);
        lt.add(std::exp(-0.5 * rec.steps[0].first));
    }
    const double ref = std::cosh(0.5) / std::cosh(1.0);
    CHECK(std::abs(lt.mean - ref) < std::max(3.0 * lt.stderror(), 2e-3));
}

TEST_CASE("crossover records are consistent and diagnostics catch corruption") {
    const auto pg = interval_reflect();
    const auto spec = build_process(pg.g, pg.data);
    const double h = 1e-3;
    CrossoverDiagnostics total;
    GlobalPathRecord sample_rec;
    for (long p = 0; p < 200; ++p) {
        PathRecorder rec(spec.g, h, 10.0);
        sample_path(spec, {EdgeKind::Internal, 0, 0.5}, 10.0, h, 23, p, rec);
        auto r = rec.take();
        total.merge(check_crossover(spec, r, h));
        if (p == 0) sample_rec = std::move(r);
    }
    CHECK(total.paths == 200);
    CHECK(total.total() == 0);

    // fault injection: the diagnostics must flag exactly what is corrupted
    REQUIRE(sample_rec.crossovers.steps.size() >= 2);
    auto bad = sample_rec;
    std::swap(bad.crossovers.steps[0].first, bad.crossovers.steps[1].first);
    auto d = check_crossover(spec, bad, h);
    CHECK(d.strict_increase_violations > 0);

    bad = sample_rec;
    bad.crossovers.steps[0].second = 1 - bad.crossovers.steps[0].second;
    d = check_crossover(spec, bad, h);
    CHECK(d.position_mismatches > 0);
}

TEST_CASE("cemetery is absorbing in recorded paths") {
    const auto pg = parse_graph("vertex v\needge e v\nwentzell v a=0.5 c=0.5\n");
    const auto spec = build_process(pg.g, pg.data);
    PathRecorder rec(spec.g, 1e-2, 20.0);
    sample_path(spec, {EdgeKind::External, 0, 0.0}, 20.0, 1e-2, 31, 0, rec);
    const auto r = rec.take();
    REQUIRE(r.crossovers.died);
    bool dead = false;
    for (size_t k = 0; k < r.ts.size(); ++k) {
        if (!r.alive[k]) dead = true;
        if (dead) CHECK(!r.alive[k]);
    }
    CHECK(dead);
}

TEST_CASE("reports are identical across worker counts") {
    const auto pg = two_vertex_mixed();
    const auto spec = build_process(pg.g, pg.data);
    const auto f = bump_fn("i1", 0.5, 0.4);
    std::vector<Estimate> res;
    for (int workers : {1, 4, 8}) {
        RunParams rp{4000, 8.0, 1e-3, 77, workers};
        res.push_back(estimate_resolvent(spec, {EdgeKind::Internal, 0, 0.5}, f,
                                         0.5, rp));
    }
    for (size_t i = 1; i < res.size(); ++i) {
        CHECK(res[i].mean == res[0].mean);
        CHECK(res[i].se == res[0].se);
    }
}

TEST_CASE("accumulator merge is associative") {
    std::vector<double> xs;
    NormalStream ns(1, 2, 3);
    for (int i = 0; i < 5000; ++i) xs.push_back(ns.next());
    Accumulator whole;
    for (double x : xs) whole.add(x);
    for (int parts : {2, 3, 7, 50}) {
        std::vector<Accumulator> accs(parts);
        for (size_t i = 0; i < xs.size(); ++i) accs[i % parts].add(xs[i]);
        Accumulator merged;
        for (const auto& a : accs) merged.merge(a);
        CHECK(merged.n == whole.n);
        CHECK(merged.mean == doctest::Approx(whole.mean).epsilon(1e-12));
        CHECK(merged.stderror() == doctest::Approx(whole.stderror()).epsilon(1e-12));
    }
}

TEST_CASE("stderr scales like one over root n") {
    const auto pg = interval_trap();
    const auto spec = build_process(pg.g, pg.data);
    RunParams rp1{2000, 20.0, 2e-3, 19, 1};
    RunParams rp4{8000, 20.0, 2e-3, 19, 1};
    const auto e1 = estimate_hitting_lt(spec, {EdgeKind::Internal, 0, 0.5}, 0.5,
                                        {0}, rp1)[0];
    const auto e4 = estimate_hitting_lt(spec, {EdgeKind::Internal, 0, 0.5}, 0.5,
                                        {0}, rp4)[0];
    CHECK(e1.se / e4.se == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("comparison harness rows") {
    Estimate est{0.3690, 0.0011, 200000, 7, 1e-4};
    auto row = compare("x", "q", 0.367879, est);
    CHECK(row.pass);
    CHECK(row.z == doctest::Approx(1.0).epsilon(0.05));
    est = {0.6, 0.001, 1000, 7, 1e-4};
    CHECK(!compare("x", "q", 0.5, est).pass);
    est = {0.25, 0.0, 10, 7, 1e-4};
    CHECK(compare("x", "q", 0.25, est).pass);
    CHECK(compare("x", "q", 0.25, est).csv().find("pass") != std::string::npos);
}
