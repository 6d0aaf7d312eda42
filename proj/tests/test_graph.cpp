#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>

#include "bmg/graph_io.hpp"
#include "bmg/join.hpp"
#include "bmg/stars.hpp"
#include "bmg/wentzell.hpp"

using namespace bmg;

namespace {

// The two graphs that get fused into the five-vertex test model: a triangle-ish
// graph with four rays, and a segment with four rays.
ParsedGraph make_g1() {
    return parse_graph(R"(
graph G1
vertex v1
vertex v2
vertex v3
iedge ia v1 v3 1.0
eedge e1 v2
eedge e2 v2
eedge e3 v3
eedge e4 v1
wentzell v1 a=0 c=0
wb v1 ia 0.5
wb v1 e4 0.5
wentzell v2 a=0 c=0
wb v2 e1 0.5
wb v2 e2 0.5
wentzell v3 a=0 c=0
wb v3 ia 0.4
wb v3 e3 0.6
)");
}

ParsedGraph make_g2() {
    return parse_graph(R"(
graph G2
vertex w1
vertex w2
iedge ib w1 w2 0.5
eedge l1 w1
eedge l4 w1
eedge l2 w2
eedge l3 w2
wentzell w1 a=0 c=0
wb w1 ib 0.4
wb w1 l1 0.3
wb w1 l4 0.3
wentzell w2 a=0 c=0
wb w2 ib 0.4
wb w2 l2 0.3
wb w2 l3 0.3
)");
}

JoinPlan make_plan() {
    JoinPlan plan;
    plan.pairs.push_back({"e1", "l1", 1.0, +1, ""});
    plan.pairs.push_back({"e2", "l2", std::sqrt(2.0), +1, ""});
    plan.pairs.push_back({"e3", "l3", 1.0, +1, ""});
    return plan;
}

// Random connected graph with up to max_v vertices plus valid boundary data.
ParsedGraph random_graph(std::mt19937& rng, int max_v) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int nv = 2 + static_cast<int>(rng() % (max_v - 1));
    ParsedGraph pg;
    MetricGraph& g = pg.g;
    for (int v = 0; v < nv; ++v) g.vertex_ids.push_back("v" + std::to_string(v));
    for (int v = 1; v < nv; ++v) {  // spanning tree keeps everything connected
        const int u = static_cast<int>(rng() % v);
        g.internals.push_back({"i" + std::to_string(v), u, v, 0.25 + unif(rng)});
    }
    const int extra = static_cast<int>(rng() % 3);
    for (int k = 0; k < extra; ++k) {
        const int u = static_cast<int>(rng() % nv);
        const int v = static_cast<int>(rng() % nv);
        if (u == v) continue;
        g.internals.push_back(
            {"x" + std::to_string(k), u, v, 0.25 + unif(rng)});
    }
    const int next = static_cast<int>(rng() % 4);
    for (int k = 0; k < next; ++k)
        g.externals.push_back({"e" + std::to_string(k),
                               static_cast<int>(rng() % nv)});
    pg.data.v.resize(nv);
    for (int v = 0; v < nv; ++v) {
        auto& wd = pg.data.v[v];
        wd.a = 0.5 * unif(rng);
        wd.c = unif(rng);
        double sum = wd.a + wd.c;
        for (const HalfEdge& h : g.incident(v)) {
            const double w = unif(rng);
            wd.b.emplace_back(h, w);
            sum += w;
        }
        wd.a /= sum;
        wd.c /= sum;
        for (auto& [h, w] : wd.b) w /= sum;
    }
    return pg;
}

}  // namespace

TEST_CASE("parser echoes a minimal description") {
    const auto pg = parse_graph("graph t\nvertex v1\nvertex v2\niedge i1 v1 v2 1.0\n"
                                "wentzell v1 a=0 c=0.5\nwb v1 i1 0.5\n"
                                "wentzell v2 c=1.0\n");
    CHECK(pg.g.vertex_ids.size() == 2);
    CHECK(pg.g.internals.size() == 1);
    CHECK(pg.g.externals.empty());
    CHECK(pg.g.internals[0].length == 1.0);
    CHECK(pg.data.v[0].c == doctest::Approx(0.5));
    CHECK(pg.data.v[1].c == doctest::Approx(1.0));
}

TEST_CASE("parser rejects malformed input with line numbers") {
    CHECK_THROWS_WITH_AS(parse_graph("vertex v1\niedge i1 v1 v9 1.0\n"),
                         "line 2: undeclared vertex v9", GraphError);
    CHECK_THROWS_AS(parse_graph("vertex v1\nvertex v1\n"), GraphError);
    CHECK_THROWS_AS(parse_graph("vertex v1\needge e1 v1\niedge e1 v1 v1 1.0\n"),
                    GraphError);
    CHECK_THROWS_AS(parse_graph("vertex v1\needge e1 v1\n"
                                "wentzell v1 a=0.1 c=0.1\nwb v1 e1 1.0\n"),
                    GraphError);  // sum 1.2
    CHECK_THROWS_AS(parse_graph("vertex v1\needge e1 v1\nwentzell v1 a=1.0 c=0\n"),
                    GraphError);
    CHECK_THROWS_AS(parse_graph("vertex v1\nvertex v2\niedge i1 v1 v1 1.0\n"),
                    GraphError);  // loop without the tadpole keyword
}

TEST_CASE("parser renormalizes near-unit sums exactly") {
    const auto pg = parse_graph("vertex v\needge e v\n"
                                "wentzell v a=0.2000000001 c=0.3\nwb v e 0.5\n");
    const auto& wd = pg.data.v[0];
    CHECK(wd.a + wd.B() + wd.c == 1.0);
}

TEST_CASE("join of the two four-ray graphs") {
    const auto g1 = make_g1(), g2 = make_g2();
    const auto r = join_graphs(g1.g, g1.data, g2.g, g2.data, make_plan());

    CHECK(r.g.vertex_ids.size() == 5);
    CHECK(r.g.internals.size() == 5);   // ia, ib + 3 fused
    CHECK(r.g.externals.size() == 2);   // e4, l4 survive
    CHECK(r.new_internal.size() == 3);
    CHECK(r.g.internals[r.new_internal[0]].length == 1.0);
    CHECK(r.g.internals[r.new_internal[1]].length == std::sqrt(2.0));
    CHECK(r.g.internals[r.new_internal[2]].length == 1.0);

    std::set<std::string> vc;
    for (int v : r.connected) vc.insert(r.g.vertex_ids[v]);
    CHECK(vc == std::set<std::string>{"v2", "v3", "w1", "w2"});

    CHECK(r.shadows.size() == 6);  // 2N
    std::set<int> kappa_targets;
    for (const auto& s : r.shadows) kappa_targets.insert(s.kappa);
    std::set<int> vc_idx(r.connected.begin(), r.connected.end());
    CHECK(kappa_targets == vc_idx);  // kappa onto V_c

    // shadow of the e1/l1 fuse on the G1 side coincides with w1
    CHECK(r.g.vertex_ids[r.shadows[0].kappa] == "w1");
    CHECK(r.shadows[0].original.x == 1.0);
    // boundary weights moved from e1 onto the fused edge at v2
    const int v2 = r.g.vertex_index("v2");
    const auto& b2 = r.data.v[v2].b;
    double on_fused = 0;
    for (const auto& [h, w] : b2)
        if (h.kind == EdgeKind::Internal && h.edge == r.new_internal[0]) on_fused += w;
    CHECK(on_fused == doctest::Approx(0.5));
}

TEST_CASE("smallest join produces the interval graph") {
    const auto a = parse_graph("graph A\nvertex u\needge p u\nwentzell u c=1\n");
    const auto b = parse_graph("graph B\nvertex w\needge q w\nwentzell w c=1\n");
    JoinPlan plan;
    plan.pairs.push_back({"p", "q", 1.0, +1, ""});
    const auto r = join_graphs(a.g, a.data, b.g, b.data, plan);
    CHECK(r.g.vertex_ids.size() == 2);
    CHECK(r.g.internals.size() == 1);
    CHECK(r.g.externals.empty());
    CHECK(r.shadows.size() == 2);
}

TEST_CASE("join input validation") {
    const auto g1 = make_g1(), g2 = make_g2();
    JoinPlan plan;
    plan.pairs.push_back({"e1", "l1", 1.0, +1, ""});
    plan.pairs.push_back({"e1", "l2", 1.0, +1, ""});
    CHECK_THROWS_AS(join_graphs(g1.g, g1.data, g2.g, g2.data, plan), GraphError);
    plan.pairs = {{"ia", "l1", 1.0, +1, ""}};
    CHECK_THROWS_AS(join_graphs(g1.g, g1.data, g2.g, g2.data, plan), GraphError);
    plan.pairs = {{"e1", "l1", -1.0, +1, ""}};
    CHECK_THROWS_AS(join_graphs(g1.g, g1.data, g2.g, g2.data, plan), GraphError);
}

TEST_CASE("join bookkeeping holds for random graphs") {
    std::mt19937 rng(2024);
    int done = 0;
    while (done < 25) {
        auto a = random_graph(rng, 5);
        auto b = random_graph(rng, 5);
        if (a.g.externals.empty() || b.g.externals.empty()) continue;
        for (auto& id : b.g.vertex_ids) id = "b." + id;
        for (auto& e : b.g.internals) e.id = "b." + e.id;
        for (auto& e : b.g.externals) e.id = "b." + e.id;
        const int N = static_cast<int>(
            std::min(a.g.externals.size(), b.g.externals.size()));
        JoinPlan plan;
        for (int k = 0; k < N; ++k)
            plan.pairs.push_back({a.g.externals[k].id, b.g.externals[k].id,
                                  0.5 + 0.1 * k, k % 2 ? -1 : +1, ""});
        const auto r = join_graphs(a.g, a.data, b.g, b.data, plan);
        CHECK(r.g.externals.size() ==
              a.g.externals.size() + b.g.externals.size() - 2 * N);
        CHECK(r.g.internals.size() == a.g.internals.size() + b.g.internals.size() + N);
        CHECK(r.g.vertex_ids.size() == a.g.vertex_ids.size() + b.g.vertex_ids.size());
        CHECK(r.shadows.size() == 2u * N);
        std::set<int> targets;
        for (const auto& s : r.shadows) {
            CHECK(s.kappa >= 0);
            targets.insert(s.kappa);
        }
        CHECK(targets == std::set<int>(r.connected.begin(), r.connected.end()));
        ++done;
    }
}

TEST_CASE("interval graph decomposes into two one-ray stars") {
    const auto pg = parse_graph("vertex v1\nvertex v2\niedge i1 v1 v2 1.0\n"
                                "wentzell v1 c=1\nwentzell v2 c=1\n");
    const auto sd = decompose_to_stars(pg.g, pg.data);
    REQUIRE(sd.stars.size() == 2);
    for (const auto& s : sd.stars) {
        REQUIRE(s.rays.size() == 1);
        REQUIRE(s.stops.size() == 1);
        CHECK(s.stops[0].dist == 1.0);
    }
    CHECK(sd.stars[0].stops[0].target_vertex == 1);
    CHECK(sd.stars[1].stops[0].target_vertex == 0);
}

TEST_CASE("five-vertex model decomposes into five stars") {
    const auto g1 = make_g1(), g2 = make_g2();
    const auto r = join_graphs(g1.g, g1.data, g2.g, g2.data, make_plan());
    const auto sd = decompose_to_stars(r.g, r.data);
    CHECK(sd.stars.size() == 5);
    const int v2 = r.g.vertex_index("v2");
    CHECK(sd.stars[v2].rays.size() == 2);
    CHECK(sd.stars[v2].stops.size() == 2);  // both incident edges are internal
    std::set<std::string> targets;
    for (const auto& st : sd.stars[v2].stops)
        targets.insert(r.g.vertex_ids[st.target_vertex]);
    CHECK(targets == std::set<std::string>{"w1", "w2"});
    // a vertex with only external edges has an empty stop set
    const auto lone = parse_graph("vertex u\needge e u\nwentzell u c=1\n");
    const auto sd2 = decompose_to_stars(lone.g, lone.data);
    CHECK(sd2.stars[0].stops.empty());
}

TEST_CASE("star and global coordinates are mutually inverse") {
    const auto g1 = make_g1(), g2 = make_g2();
    const auto r = join_graphs(g1.g, g1.data, g2.g, g2.data, make_plan());
    const auto sd = decompose_to_stars(r.g, r.data);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        GraphPoint p;
        if (rng() % 3 == 0 && !r.g.externals.empty()) {
            p = {EdgeKind::External, static_cast<int>(rng() % r.g.externals.size()),
                 3.0 * unif(rng) + 1e-6};
        } else {
            const int e = static_cast<int>(rng() % r.g.internals.size());
            p = {EdgeKind::Internal, e,
                 r.g.internals[e].length * (0.001 + 0.998 * unif(rng))};
        }
        const StarPoint sp = global_to_star(r.g, sd, p);
        REQUIRE(sp.ray >= 0);
        const GraphPoint back = star_to_global(r.g, sd.stars[sp.star], sp.ray, sp.x);
        CHECK(r.g.same_point(p, back));
        if (p.kind == EdgeKind::Internal) {
            // distance x from one endpoint equals a - x from the other
            const auto& e = r.g.internals[p.edge];
            const GraphPoint mirror{EdgeKind::Internal, p.edge, e.length - (e.length - p.x)};
            CHECK(r.g.same_point(p, mirror));
            CHECK(sp.x <= e.length / 2 + 1e-12);  // nearest endpoint owns it
        }
    }
}

TEST_CASE("decompose then reassemble returns the same graph") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const auto pg = random_graph(rng, 8);
        const auto sd = decompose_to_stars(pg.g, pg.data);
        const auto back = reassemble(sd);
        CHECK(canonical_form(back) == canonical_form(pg.g));
    }
}

TEST_CASE("tadpole expansion") {
    const auto pg = parse_graph("vertex v\ntadpole t v 2.0\needge e v\n"
                                "wentzell v a=0 c=0.2\nwb v t 0.4\nwb v e 0.4\n");
    CHECK(pg.data.v[0].b.size() == 3);  // loop weight split over two half-edges
    const auto ex = expand_tadpoles(pg.g, pg.data);
    REQUIRE(ex.g.vertex_ids.size() == 2);
    CHECK(ex.g.internals.size() == 2);
    CHECK(ex.g.internals[0].length == 1.0);
    CHECK(ex.g.internals[1].length == 1.0);
    const auto& w0 = ex.data.v[1];
    CHECK(w0.a == 0.0);
    CHECK(w0.c == 0.0);
    REQUIRE(w0.b.size() == 2);
    CHECK(w0.b[0].second == 0.5);
    CHECK(w0.b[1].second == 0.5);
    CHECK(validate(ex.data, ex.g).empty());
    // original vertex keeps its data, loop weight lands on both new edges
    CHECK(ex.data.v[0].c == doctest::Approx(0.2));
    CHECK(ex.data.v[0].B() == doctest::Approx(0.8));
    // coordinate map covers both halves
    const auto p1 = ex.map_point({EdgeKind::Internal, 0, 0.5});
    CHECK(p1.edge == 0);
    CHECK(p1.x == 0.5);
    const auto p2 = ex.map_point({EdgeKind::Internal, 0, 1.7});
    CHECK(p2.edge == 1);
    CHECK(p2.x == doctest::Approx(0.7));
}

TEST_CASE("tadpole expansion is the identity on loop-free graphs") {
    std::mt19937 rng(3);
    const auto pg = random_graph(rng, 6);
    const auto ex = expand_tadpoles(pg.g, pg.data);
    CHECK(canonical_form(ex.g) == canonical_form(pg.g));
}

TEST_CASE("two tadpoles expand independently") {
    const auto pg = parse_graph(
        "vertex v\nvertex u\ntadpole t1 v 1.0\ntadpole t2 u 0.5\niedge i v u 1.0\n"
        "wentzell v c=0.2\nwb v t1 0.4\nwb v i 0.4\n"
        "wentzell u c=0.2\nwb u t2 0.4\nwb u i 0.4\n");
    const auto ex = expand_tadpoles(pg.g, pg.data);
    CHECK(ex.g.vertex_ids.size() == 4);
    CHECK(ex.g.internals.size() == 5);  // +2 edges -1 loop, per loop
    CHECK(decompose_to_stars(ex.g, ex.data).stars.size() == 4);  // now loop-free
}

TEST_CASE("boundary data validation") {
    const auto pg = parse_graph("vertex v\needge e1 v\needge e2 v\n"
                                "wentzell v a=0 c=0.2\nwb v e1 0.5\nwb v e2 0.3\n");
    CHECK(validate(pg.data, pg.g).empty());
    CHECK(pg.data.v[0].B() == doctest::Approx(0.8));

    auto bad = pg.data;
    bad.v[0].b[0].first = {EdgeKind::Internal, 0, 0};  // not incident
    CHECK(!validate(bad, pg.g).empty());
    bad = pg.data;
    bad.v[0].a = 1.0;
    CHECK(!validate(bad, pg.g).empty());
}

TEST_CASE("regime classification") {
    const auto pg = parse_graph("vertex v\needge e1 v\needge e2 v\needge e3 v\n"
                                "wentzell v c=1\n");
    CHECK(classify(pg.data, pg.g, 0).kind == VertexRegime::Trap);

    auto data = pg.data;
    data.v[0] = {0.2, 0.8, {}};
    auto r = classify(data, pg.g, 0);
    CHECK(r.kind == VertexRegime::HoldKill);
    CHECK(r.hold_rate == doctest::Approx(0.25));

    data.v[0] = {0, 0, {{{EdgeKind::External, 0, 0}, 0.5},
                        {{EdgeKind::External, 1, 0}, 0.3},
                        {{EdgeKind::External, 2, 0}, 0.2}}};
    r = classify(data, pg.g, 0);
    CHECK(r.kind == VertexRegime::Sticky);
    CHECK(r.rho == 0.0);
    CHECK(r.gamma == 0.0);
    REQUIRE(r.p.size() == 3);
    CHECK(r.p[0] == doctest::Approx(0.5));
    CHECK(r.p[1] == doctest::Approx(0.3));
    CHECK(r.p[2] == doctest::Approx(0.2));
}

TEST_CASE("classification is scale invariant") {
    const auto pg = parse_graph("vertex v\needge e1 v\needge e2 v\n"
                                "wentzell v a=0.1 c=0.3\nwb v e1 0.4\nwb v e2 0.2\n");
    const auto base = classify(pg.data, pg.g, 0);
    for (double scale : {0.5, 2.0, 7.3}) {
        auto d = pg.data;
        d.v[0].a *= scale;
        d.v[0].c *= scale;
        for (auto& [h, w] : d.v[0].b) w *= scale;
        const double sum = d.v[0].a + d.v[0].B() + d.v[0].c;
        d.v[0].a /= sum;
        d.v[0].c /= sum;
        for (auto& [h, w] : d.v[0].b) w /= sum;
        const auto r = classify(d, pg.g, 0);
        CHECK(r.kind == base.kind);
        CHECK(r.rho == doctest::Approx(base.rho));
        CHECK(r.gamma == doctest::Approx(base.gamma));
        for (size_t i = 0; i < r.p.size(); ++i)
            CHECK(r.p[i] == doctest::Approx(base.p[i]));
    }
}
