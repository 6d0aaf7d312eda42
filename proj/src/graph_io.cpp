#include "bmg/graph_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bmg {
namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw GraphError("line " + std::to_string(line) + ": " + msg);
}

double parse_num(int line, const std::string& tok, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) fail(line, "bad " + what + " '" + tok + "'");
        return v;
    } catch (const GraphError&) {
        throw;
    } catch (...) {
        fail(line, "bad " + what + " '" + tok + "'");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ParsedGraph parse_graph(const std::string& text) {
    ParsedGraph pg;
    MetricGraph& g = pg.g;
    // b lines may precede wentzell lines; collect raw and resolve at the end
    struct RawW { int line; std::string v; double a, c; };
    struct RawB { int line; std::string v, edge; double w; };
    std::vector<RawW> raw_w;
    std::vector<RawB> raw_b;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto need = [&](const char* what) {
            std::string tok;
            if (!(ls >> tok)) fail(lineno, std::string("missing ") + what);
            return tok;
        };
        auto need_vertex = [&]() {
            const std::string id = need("vertex id");
            const int v = g.vertex_index(id);
            if (v < 0) fail(lineno, "undeclared vertex " + id);
            return v;
        };
        if (kw == "graph") {
            g.name = need("graph name");
        } else if (kw == "vertex") {
            const std::string id = need("vertex id");
            if (g.vertex_index(id) >= 0) fail(lineno, "duplicate id " + id);
            g.vertex_ids.push_back(id);
        } else if (kw == "iedge" || kw == "tadpole") {
            const std::string id = need("edge id");
            if (g.internal_index(id) >= 0 || g.external_index(id) >= 0)
                fail(lineno, "duplicate id " + id);
            const int vf = need_vertex();
            const int vt = kw == "tadpole" ? vf : need_vertex();
            const double len = parse_num(lineno, need("length"), "length");
            if (!(len > 0) || !std::isfinite(len))
                fail(lineno, "edge " + id + ": length must be positive and finite");
            if (vf == vt && kw != "tadpole")
                fail(lineno, "edge " + id + ": loop must be declared with 'tadpole'");
            if (kw == "tadpole") g.allow_tadpoles = true;
            g.internals.push_back({id, vf, vt, len});
        } else if (kw == "eedge") {
            const std::string id = need("edge id");
            if (g.internal_index(id) >= 0 || g.external_index(id) >= 0)
                fail(lineno, "duplicate id " + id);
            g.externals.push_back({id, need_vertex()});
        } else if (kw == "wentzell") {
            RawW w{lineno, need("vertex id"), 0, 0};
            std::string tok;
            while (ls >> tok) {
                if (tok.rfind("a=", 0) == 0)
                    w.a = parse_num(lineno, tok.substr(2), "a value");
                else if (tok.rfind("c=", 0) == 0)
                    w.c = parse_num(lineno, tok.substr(2), "c value");
                else
                    fail(lineno, "unexpected token '" + tok + "'");
            }
            raw_w.push_back(w);
        } else if (kw == "wb") {
            RawB b{lineno, need("vertex id"), need("edge id"), 0};
            b.w = parse_num(lineno, need("weight"), "weight");
            raw_b.push_back(b);
        } else {
            fail(lineno, "unknown directive '" + kw + "'");
        }
    }

    if (const auto errs = g.validate(); !errs.empty())
        throw GraphError(errs.front());

    pg.data.v.resize(g.vertex_ids.size());
    for (const auto& w : raw_w) {
        const int v = g.vertex_index(w.v);
        if (v < 0) fail(w.line, "undeclared vertex " + w.v);
        pg.data.v[v].a = w.a;
        pg.data.v[v].c = w.c;
    }
    for (const auto& rb : raw_b) {
        const int v = g.vertex_index(rb.v);
        if (v < 0) fail(rb.line, "undeclared vertex " + rb.v);
        std::vector<HalfEdge> at_v;
        for (const HalfEdge& h : g.incident(v))
            if (g.edge_id(h) == rb.edge) at_v.push_back(h);
        if (at_v.empty())
            fail(rb.line, "edge " + rb.edge + " is not incident with " + rb.v);
        // a loop contributes two half-edges; split the weight equally
        for (const HalfEdge& h : at_v)
            pg.data.v[v].b.emplace_back(h, rb.w / at_v.size());
    }
    for (size_t v = 0; v < pg.data.v.size(); ++v) {
        auto& wd = pg.data.v[v];
        const double sum = wd.a + wd.B() + wd.c;
        if (std::abs(sum - 1.0) > 1e-9)
            throw GraphError("vertex " + g.vertex_ids[v] + ": a + sum(b) + c = " +
                             fmt(sum) + ", expected 1");
        wd.a /= sum;
        wd.c /= sum;
        for (auto& [h, w] : wd.b) w /= sum;
        if (wd.a >= 1.0)
            throw GraphError("vertex " + g.vertex_ids[v] + ": a_v must be < 1");
    }
    return pg;
}

ParsedGraph load_graph_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw GraphError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_graph(ss.str());
}

std::string canonical_form(const MetricGraph& g) {
    std::vector<std::string> lines;
    for (const auto& v : g.vertex_ids) lines.push_back("v " + v);
    for (const auto& e : g.internals) {
        std::string a = g.vertex_ids[e.v_from], b = g.vertex_ids[e.v_to];
        if (b < a) std::swap(a, b);
        lines.push_back("i " + e.id + " " + a + " " + b + " " + fmt(e.length));
    }
    for (const auto& e : g.externals)
        lines.push_back("e " + e.id + " " + g.vertex_ids[e.v]);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

}  // namespace bmg
