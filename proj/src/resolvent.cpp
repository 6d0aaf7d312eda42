#include "bmg/resolvent.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace bmg {
namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

double integrate(const std::function<double(double)>& fn, double lo, double hi) {
    if (hi <= lo) return 0.0;
    return Quad::integrate(fn, lo, hi, 12, 1e-10);
}

double endpoint_tol(double a) { return 1e-12 * std::max(1.0, a); }

// sinh(s*u)/sinh(s*a) without overflow, 0 <= u <= a.
double sinh_ratio(double s, double u, double a) {
    return std::exp(-s * (a - u)) * (-std::expm1(-2.0 * s * u)) /
           (-std::expm1(-2.0 * s * a));
}

}  // namespace

double dirichlet_kernel_internal(double lambda, double a, double x, double y) {
    const double s = std::sqrt(2.0 * lambda);
    const double tol = endpoint_tol(a);
    if (x <= tol || y <= tol || x >= a - tol || y >= a - tol) return 0.0;
    // truncate the image series once the tail drops below 1e-12
    const int K = static_cast<int>(std::ceil(12.0 * std::log(10.0) / (s * 2.0 * a)));
    double sum = 0;
    for (int k = -K; k <= K; ++k) {
        sum += std::exp(-s * std::abs(x - y + 2.0 * k * a));
        sum -= std::exp(-s * std::abs(x + y + 2.0 * k * a));
    }
    return sum / s;
}

double dirichlet_kernel_external(double lambda, double x, double y) {
    const double s = std::sqrt(2.0 * lambda);
    if (x <= 1e-12 || y <= 1e-12) return 0.0;
    return (std::exp(-s * std::abs(x - y)) - std::exp(-s * (x + y))) / s;
}

HittingWeights hitting_lt(const MetricGraph& g, GraphPoint p, double lambda) {
    const double s = std::sqrt(2.0 * lambda);
    HittingWeights w;
    if (p.kind == EdgeKind::External) {
        w.w_from = std::exp(-s * p.x);
        return w;
    }
    const double a = g.internals[p.edge].length;
    w.w_from = sinh_ratio(s, a - p.x, a);
    w.w_to = sinh_ratio(s, p.x, a);
    return w;
}

namespace {

struct Assembler {
    const MetricGraph& g;
    const std::function<double(GraphPoint)>& f;
    double s;

    int alpha_col(const HalfEdge& h) const {
        if (h.kind == EdgeKind::Internal) return 2 * h.edge;
        return 2 * static_cast<int>(g.internals.size()) + h.edge;
    }

    // u(v) restricted to the edge of h, as (col, coef) pairs; the Dirichlet
    // particular part vanishes at the vertex.
    void value_coefs(const HalfEdge& h, double sign, Eigen::MatrixXd& A, int row) const {
        if (h.kind == EdgeKind::External) {
            A(row, alpha_col(h)) += sign;
            return;
        }
        const double E = std::exp(-s * g.internals[h.edge].length);
        if (h.end == 0) {
            A(row, alpha_col(h)) += sign;
            A(row, alpha_col(h) + 1) += sign * E;
        } else {
            A(row, alpha_col(h)) += sign * E;
            A(row, alpha_col(h) + 1) += sign;
        }
    }

    // homogeneous part of the inward derivative at the vertex end of h
    void deriv_coefs(const HalfEdge& h, double sign, Eigen::MatrixXd& A, int row) const {
        if (h.kind == EdgeKind::External) {
            A(row, alpha_col(h)) += sign * -s;
            return;
        }
        const double E = std::exp(-s * g.internals[h.edge].length);
        if (h.end == 0) {
            A(row, alpha_col(h)) += sign * -s;
            A(row, alpha_col(h) + 1) += sign * s * E;
        } else {
            A(row, alpha_col(h)) += sign * s * E;
            A(row, alpha_col(h) + 1) += sign * -s;
        }
    }

    // inward derivative of the particular part at the vertex end of h
    double particular_deriv(const HalfEdge& h) const {
        if (h.kind == EdgeKind::External) {
            const int e = h.edge;
            return integrate(
                [&](double y) {
                    return 2.0 * std::exp(-s * y) *
                           f({EdgeKind::External, e, y});
                },
                0.0, std::numeric_limits<double>::infinity());
        }
        const int i = h.edge;
        const double a = g.internals[i].length;
        const int end = h.end;
        return integrate(
            [&](double y) {
                const double u = end == 0 ? a - y : y;
                return 2.0 * sinh_ratio(s, u, a) * f({EdgeKind::Internal, i, y});
            },
            0.0, a);
    }
};

}  // namespace

double ResolventSolution::eval(GraphPoint p) const {
    p = g->normalize(p);
    if (const int v = g->vertex_at(p); v >= 0) return vertex_value[v];
    const double lam = lambda;
    if (p.kind == EdgeKind::External) {
        const int e = p.edge;
        auto kf = [&](double y) {
            return dirichlet_kernel_external(lam, p.x, y) *
                   f(GraphPoint{EdgeKind::External, e, y});
        };
        const double part = integrate(kf, 0.0, p.x) +
                            integrate(kf, p.x, std::numeric_limits<double>::infinity());
        return part + external_coef[e] * std::exp(-s * p.x);
    }
    const int i = p.edge;
    const double a = g->internals[i].length;
    auto kf = [&](double y) {
        return dirichlet_kernel_internal(lam, a, p.x, y) *
               f(GraphPoint{EdgeKind::Internal, i, y});
    };
    const double part = integrate(kf, 0.0, p.x) + integrate(kf, p.x, a);
    const auto& [alpha, beta] = internal_coef[i];
    return part + alpha * std::exp(-s * p.x) + beta * std::exp(-s * (a - p.x));
}

double ResolventSolution::inward_derivative(const HalfEdge& h) const {
    Assembler as{*g, f, s};
    double d = as.particular_deriv(h);
    if (h.kind == EdgeKind::External) return d - s * external_coef[h.edge];
    const auto& [alpha, beta] = internal_coef[h.edge];
    const double E = std::exp(-s * g->internals[h.edge].length);
    if (h.end == 0) return d - s * alpha + s * E * beta;
    return d + s * E * alpha - s * beta;
}

double ResolventSolution::max_continuity_residual() const {
    double worst = 0;
    for (int v = 0; v < static_cast<int>(g->vertex_ids.size()); ++v) {
        for (const HalfEdge& h : g->incident(v)) {
            GraphPoint p{h.kind, h.edge, 0.0};
            if (h.kind == EdgeKind::Internal && h.end == 1)
                p.x = g->internals[h.edge].length;
            // bypass the vertex shortcut in eval()
            double val;
            if (h.kind == EdgeKind::External) {
                val = external_coef[h.edge];
            } else {
                const auto& [alpha, beta] = internal_coef[h.edge];
                const double E = std::exp(-s * g->internals[h.edge].length);
                val = h.end == 0 ? alpha + beta * E : alpha * E + beta;
            }
            worst = std::max(worst, std::abs(val - vertex_value[v]));
        }
    }
    return worst;
}

ResolventSolution solve_resolvent(const MetricGraph& g, const WentzellData& data,
                                  std::function<double(GraphPoint)> f, double lambda) {
    if (!(lambda > 0)) throw GraphError("lambda must be positive");
    const double s = std::sqrt(2.0 * lambda);
    const int nI = static_cast<int>(g.internals.size());
    const int nE = static_cast<int>(g.externals.size());
    const int M = 2 * nI + nE;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M);
    Assembler as{g, f, s};

    int row = 0;
    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        const auto inc = g.incident(v);
        for (size_t k = 1; k < inc.size(); ++k) {
            as.value_coefs(inc[0], +1.0, A, row);
            as.value_coefs(inc[k], -1.0, A, row);
            ++row;
        }
        // (a + c*lambda) u(v) - sum b u'_in = c f(v) + sum b * particular'
        const auto& wd = data.v[v];
        GraphPoint pv{inc[0].kind, inc[0].edge, 0.0};
        if (inc[0].kind == EdgeKind::Internal && inc[0].end == 1)
            pv.x = g.internals[inc[0].edge].length;
        as.value_coefs(inc[0], wd.a + wd.c * lambda, A, row);
        double r = wd.c * f(pv);
        for (const HalfEdge& h : inc) {
            const double b = wd.b_for(h);
            if (b == 0) continue;
            as.deriv_coefs(h, -b, A, row);
            r += b * as.particular_deriv(h);
        }
        rhs[row] = r;
        ++row;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd x = lu.solve(rhs);
    const double resid = (A * x - rhs).norm();
    if (!x.allFinite() || resid > 1e-8 * (1.0 + rhs.norm())) {
        const double rcond = 1.0 / (A.norm() * lu.inverse().norm());
        throw GraphError("vertex system is numerically singular (rcond ~ " +
                         std::to_string(rcond) + ")");
    }

    ResolventSolution sol;
    sol.g = &g;
    sol.f = std::move(f);
    sol.lambda = lambda;
    sol.s = s;
    sol.internal_coef.resize(nI);
    for (int i = 0; i < nI; ++i) sol.internal_coef[i] = {x[2 * i], x[2 * i + 1]};
    sol.external_coef.resize(nE);
    for (int e = 0; e < nE; ++e) sol.external_coef[e] = x[2 * nI + e];
    sol.vertex_value.resize(g.vertex_ids.size());
    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        const HalfEdge h = g.incident(v)[0];
        if (h.kind == EdgeKind::External) {
            sol.vertex_value[v] = sol.external_coef[h.edge];
        } else {
            const auto& [alpha, beta] = sol.internal_coef[h.edge];
            const double E = std::exp(-s * g.internals[h.edge].length);
            sol.vertex_value[v] = h.end == 0 ? alpha + beta * E : alpha * E + beta;
        }
    }
    return sol;
}

std::vector<double> check_domain(const ResolventSolution& sol, const WentzellData& data) {
    const MetricGraph& g = *sol.g;
    std::vector<double> out;
    for (int v = 0; v < static_cast<int>(g.vertex_ids.size()); ++v) {
        const auto inc = g.incident(v);
        const auto& wd = data.v[v];
        GraphPoint pv{inc[0].kind, inc[0].edge, 0.0};
        if (inc[0].kind == EdgeKind::Internal && inc[0].end == 1)
            pv.x = g.internals[inc[0].edge].length;
        const double u = sol.vertex_value[v];
        double r = wd.a * u + wd.c * (sol.lambda * u - sol.f(pv));
        for (const HalfEdge& h : inc) {
            const double b = wd.b_for(h);
            if (b != 0) r -= b * sol.inward_derivative(h);
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace bmg
