#pragma once

#include <functional>
#include <vector>

#include "bmg/graph.hpp"

// Deterministic resolvent oracle: solves (lambda - 1/2 d^2/dx^2) u = f on the
// graph with the Wentzell vertex conditions, representing u edge-wise as
// Dirichlet particular solution plus decaying exponentials. Used as the
// reference the Monte-Carlo estimators are tested against.

namespace bmg {

// Resolvent kernel of Brownian motion on [0, a] killed at both endpoints
// (image-charge series, truncated so the tail is below 1e-12) and on [0, inf)
// killed at 0. Both vanish when x or y sits at a killed endpoint.
double dirichlet_kernel_internal(double lambda, double a, double x, double y);
double dirichlet_kernel_external(double lambda, double x, double y);

// Laplace transforms of the first hitting time of the edge's endpoint set,
// split by which endpoint is hit first. External edges only have w_from.
struct HittingWeights {
    double w_from = 0;  // toward the x = 0 endpoint
    double w_to = 0;    // toward the x = length endpoint
};
HittingWeights hitting_lt(const MetricGraph& g, GraphPoint p, double lambda);

struct ResolventSolution {
    const MetricGraph* g = nullptr;
    std::function<double(GraphPoint)> f;
    double lambda = 0;
    double s = 0;  // sqrt(2 lambda)
    std::vector<std::pair<double, double>> internal_coef;  // (alpha, beta) of
                                                           // e^{-sx}, e^{-s(a-x)}
    std::vector<double> external_coef;                     // alpha of e^{-sx}
    std::vector<double> vertex_value;

    double eval(GraphPoint p) const;
    // derivative at the vertex end of h, pointing into the edge
    double inward_derivative(const HalfEdge& h) const;
    // largest disagreement between incident-edge evaluations at a vertex
    double max_continuity_residual() const;
};

// f must be bounded and continuous per edge; particular parts are integrated
// against the Dirichlet kernels by adaptive quadrature (tolerance 1e-10).
// Throws GraphError if the vertex system is numerically singular.
ResolventSolution solve_resolvent(const MetricGraph& g, const WentzellData& data,
                                  std::function<double(GraphPoint)> f, double lambda);

// Raw boundary-condition residual a_v u(v) - sum b u'(v_l) + c_v/2 u''(v)
// per vertex, with u'' read off the ODE as 2(lambda u - f).
std::vector<double> check_domain(const ResolventSolution& sol, const WentzellData& data);

}  // namespace bmg
