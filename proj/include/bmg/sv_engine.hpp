#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "bmg/streams.hpp"
#include "bmg/wentzell.hpp"

// Path sampler for the Brownian motion on a single-vertex star. Away from the
// vertex the motion is a Brownian free flight with Brownian-bridge crossing
// corrections against the vertex and the ray's stop point. At the vertex the
// radial part follows the Levy construction r = beta - min(beta): every fresh
// running minimum of the skeleton adds local time, resamples the active ray,
// inserts the sticky plateau rho*dl of real time, and feeds the elastic kill
// threshold. Hit and kill times are recorded at the end of the step that
// produced them (a consistent O(h) convention).

namespace bmg {

struct StarGeom {
    // stop distance per ray; +inf for rays without a stop point
    std::vector<double> stop;

    static constexpr double kNoStop = std::numeric_limits<double>::infinity();
};

struct SvResult {
    enum Outcome { StopHit, Killed, Horizon } outcome = Horizon;
    double t = 0;        // event time; = T for Horizon
    int stop_ray = -1;   // ray whose stop point was hit
    double local_time = 0;
};

// Observer contract (all calls in increasing time order):
//   segment(t0, t1, ray, x0, x1)  linear motion on a ray
//   hold(t0, t1)                  path sits at the vertex
//   vertex_touch(t)               first arrival at the vertex (per call)
//   cont() -> bool                false aborts the path early
// Observers may additionally define ray_selected(int) to see the Walsh
// categorical draws.
namespace sv_detail {
template <class Obs>
inline void notify_ray(Obs& obs, int ray) {
    if constexpr (requires { obs.ray_selected(ray); }) obs.ray_selected(ray);
}
}  // namespace sv_detail

template <class Obs>
SvResult sample_sv_path(const StarGeom& geom, const VertexRegime& regime,
                        int ray, double x, double t0, double T, double h,
                        NormalStream& ns, UniformStream& us, Obs& obs) {
    constexpr int B = 64;  // free-flight block
    const double sqh = std::sqrt(h);
    const double margin = 5.0 * sqh;  // crossing prob < e^{-50} beyond this
    const double inf = std::numeric_limits<double>::infinity();
    double t = t0;
    double incr[B], pos[B];

    auto clip_segment = [&](double t1, int r, double x0, double x1) {
        // final partial step: interpolate the position at the horizon
        const double xT = x0 + (x1 - x0) * (T - t) / (t1 - t);
        obs.segment(t, T, r, x0, xT);
    };

    // ---- free flight on the starting ray (x > 0) ----
    bool at_vertex = !(x > 0);
    while (!at_vertex) {
        if (t >= T) return {SvResult::Horizon, T, -1, 0};
        if (!obs.cont()) return {SvResult::Horizon, t, -1, 0};
        const double d = geom.stop[ray];
        int n = B;
        ns.fill(incr, n);
        for (int i = 0; i < n; ++i) incr[i] *= sqh;
        double mn, mx;
        kernels::ops().prefix_pos(incr, n, x, pos, &mn, &mx);
        const bool away_low = x > margin && mn > margin;
        const bool away_high = d == inf || (x < d - margin && mx < d - margin);
        if (away_low && away_high && t + n * h <= T) {
            double prev = x;
            for (int i = 0; i < n; ++i) {
                obs.segment(t + i * h, t + (i + 1) * h, ray, prev, pos[i]);
                prev = pos[i];
            }
            x = pos[n - 1];
            t += n * h;
            continue;
        }
        for (int i = 0; i < n; ++i) {
            const double x1 = pos[i];
            const double t1 = t + h;
            // nearer barrier gets priority when both could have been crossed
            const bool low_first = d == inf || x < d - x;
            bool hit_low = false, hit_high = false;
            if (x1 <= 0) {
                hit_low = true;
            } else if (x < margin || x1 < margin) {
                hit_low = us.next() < std::exp(-2.0 * x * x1 / h);
            }
            if (d < inf) {
                if (x1 >= d) {
                    hit_high = true;
                } else if (d - x < margin || d - x1 < margin) {
                    hit_high = us.next() < std::exp(-2.0 * (d - x) * (d - x1) / h);
                }
            }
            if (hit_low && hit_high) (low_first ? hit_high : hit_low) = false;
            if (hit_high) {
                obs.segment(t, t1, ray, x, d);
                return {SvResult::StopHit, t1, ray, 0};
            }
            if (hit_low) {
                obs.segment(t, t1, ray, x, 0.0);
                obs.vertex_touch(t1);
                t = t1;
                at_vertex = true;
                break;
            }
            if (t1 >= T) {
                clip_segment(t1, ray, x, x1);
                return {SvResult::Horizon, T, -1, 0};
            }
            obs.segment(t, t1, ray, x, x1);
            x = x1;
            t = t1;
        }
    }
    if (t >= T) return {SvResult::Horizon, T, -1, 0};
    if (t == t0) obs.vertex_touch(t);

    // ---- vertex behavior ----
    if (regime.kind == VertexRegime::Trap) {
        obs.hold(t, T);
        return {SvResult::Horizon, T, -1, 0};
    }
    if (regime.kind == VertexRegime::HoldKill) {
        const double tau = us.exponential() / regime.hold_rate;
        if (t + tau >= T) {
            obs.hold(t, T);
            return {SvResult::Horizon, T, -1, 0};
        }
        obs.hold(t, t + tau);
        return {SvResult::Killed, t + tau, -1, 0};
    }

    // ---- Levy mode (Sticky): permanent until stop hit, kill, or horizon ----
    const double rho = regime.rho;
    const double ell_kill =
        regime.gamma > 0 ? us.exponential() / regime.gamma : inf;
    double beta = 0, m = 0, ell = 0;
    int aray = us.categorical(regime.p);
    sv_detail::notify_ray(obs, aray);
    while (true) {
        if (t >= T) return {SvResult::Horizon, T, -1, ell};
        if (!obs.cont()) return {SvResult::Horizon, t, -1, ell};
        const double d_cur = geom.stop[aray];
        const int n = B;
        ns.fill(incr, n);
        for (int i = 0; i < n; ++i) incr[i] *= sqh;
        double mn, mx;
        kernels::ops().prefix_pos(incr, n, beta, pos, &mn, &mx);
        const bool no_min = mn > m + margin;  // bridge minima can't reach m
        const bool no_stop =
            d_cur == inf || (beta - m < d_cur - margin && mx - m < d_cur - margin);
        if (no_min && no_stop && t + n * h <= T) {
            double prev = beta;
            for (int i = 0; i < n; ++i) {
                obs.segment(t + i * h, t + (i + 1) * h, aray, prev - m, pos[i] - m);
                prev = pos[i];
            }
            beta = pos[n - 1];
            t += n * h;
            continue;
        }
        for (int i = 0; i < n; ++i) {
            const double d = geom.stop[aray];  // aray may change mid-block
            const double b1 = pos[i];
            const double t1 = t + h;
            const double r0 = beta - m;
            // exact bridge minimum of the step: per-step minima given the
            // skeleton are independent, so the running minimum (and with it
            // the local time) is sampled with no discretization bias
            double mb = m;
            if (r0 < margin || b1 - m < margin) {
                const double diff = b1 - beta;
                const double cand =
                    0.5 * (beta + b1 -
                           std::sqrt(diff * diff - 2.0 * h * std::log(us.next())));
                if (cand < m) mb = cand;
            }
            if (mb < m) {
                // fresh minimum: local time accrues, sticky plateau, resample
                const double dl = m - mb;
                obs.segment(t, t1, aray, r0, 0.0);
                if (ell + dl >= ell_kill) {
                    const double tk = t1 + rho * (ell_kill - ell);
                    if (tk >= T) {
                        obs.hold(t1, T);
                        return {SvResult::Horizon, T, -1, ell_kill};
                    }
                    obs.hold(t1, tk);
                    return {SvResult::Killed, tk, -1, ell_kill};
                }
                ell += dl;
                m = mb;
                double t2 = t1 + rho * dl;
                if (rho > 0) {
                    if (t2 >= T) {
                        obs.hold(t1, T);
                        return {SvResult::Horizon, T, -1, ell};
                    }
                    obs.hold(t1, t2);
                }
                aray = us.categorical(regime.p);
                sv_detail::notify_ray(obs, aray);
                beta = b1;
                t = t2;
                if (t >= T) return {SvResult::Horizon, T, -1, ell};
                continue;
            }
            const double r1 = b1 - m;
            bool hit = false;
            if (d < inf) {
                if (r1 >= d) {
                    hit = true;
                } else if (d - r0 < margin || d - r1 < margin) {
                    hit = us.next() < std::exp(-2.0 * (d - r0) * (d - r1) / h);
                }
            }
            if (hit) {
                obs.segment(t, t1, aray, r0, d);
                return {SvResult::StopHit, t1, aray, ell};
            }
            if (t1 >= T) {
                clip_segment(t1, aray, r0, r1);
                return {SvResult::Horizon, T, -1, ell};
            }
            obs.segment(t, t1, aray, r0, r1);
            beta = b1;
            t = t1;
        }
    }
}

}  // namespace bmg
