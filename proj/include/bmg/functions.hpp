#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "bmg/graph.hpp"

namespace bmg {

// Built-in test-function family, closed so results are reproducible from the
// textual spec alone:
//   const:<v>                    constant v on the whole graph
//   bump:<edge>:<center>:<width> smooth bump exp(1 - 1/(1-t^2)), t=(x-c)/w,
//                                supported on |t|<1 of the named edge
//   ind:<edge>:<lo>:<hi>:<ramp>  smoothed indicator of [lo,hi] on the named
//                                edge, 0.5*(tanh((x-lo)/r) - tanh((x-hi)/r))
struct GraphFunction {
    enum Type { Constant, Bump, Indicator } type = Constant;
    double p0 = 0, p1 = 0, p2 = 0;
    std::string edge_id;  // empty for Constant

    bool active_on(const MetricGraph& g, EdgeKind kind, int edge) const {
        if (type == Constant) return p0 != 0;
        return g.edge_id(HalfEdge{kind, edge, 0}) == edge_id;
    }

    // value at coordinate x of an edge the function is active on
    double eval_x(double x) const {
        switch (type) {
            case Constant:
                return p0;
            case Bump: {
                const double t = (x - p0) / p1;
                if (std::abs(t) >= 1.0) return 0.0;
                return std::exp(1.0 - 1.0 / (1.0 - t * t));
            }
            case Indicator:
                return 0.5 * (std::tanh((x - p0) / p2) - std::tanh((x - p1) / p2));
        }
        return 0.0;
    }

    double eval(const MetricGraph& g, GraphPoint p) const {
        if (type == Constant) return p0;
        return active_on(g, p.kind, p.edge) ? eval_x(p.x) : 0.0;
    }

    std::function<double(GraphPoint)> field(const MetricGraph& g) const {
        GraphFunction copy = *this;
        const MetricGraph* gp = &g;
        return [copy, gp](GraphPoint p) { return copy.eval(*gp, p); };
    }

    std::string describe() const;
};

GraphFunction constant_fn(double v);
GraphFunction bump_fn(std::string edge_id, double center, double width);
GraphFunction indicator_fn(std::string edge_id, double lo, double hi, double ramp);

// Parses the textual forms listed above; throws GraphError on bad input.
GraphFunction parse_function(const std::string& spec);

}  // namespace bmg
