#include "bmg/kernels.hpp"

#include <cmath>
#include <limits>

#include "bmg/philox.hpp"

namespace bmg::kernels {
namespace {

inline void block_uniforms(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t blk,
                           double& u0, double& u1) {
    const auto b = Philox4x32::generate(key, ctr_hi, blk);
    const std::uint64_t w0 = (static_cast<std::uint64_t>(b.x[0]) << 32) | b.x[1];
    const std::uint64_t w1 = (static_cast<std::uint64_t>(b.x[2]) << 32) | b.x[3];
    u0 = uniform_from_bits(w0);
    u1 = uniform_from_bits(w1);
}

void normals_scalar(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo,
                    int n, double* out) {
    constexpr double kPi = 3.14159265358979323846;
    int i = 0;
    std::uint64_t blk = ctr_lo;
    while (i < n) {
        double u1, u2;
        block_uniforms(key, ctr_hi, blk++, u1, u2);
        const double r = std::sqrt(-2.0 * std::log(u1));
        // theta = 2*pi*u2 folded to pi*(s+1), s in (-1,1); see the AVX2 variant.
        const double s = 2.0 * u2 - 1.0;
        const double z0 = -r * std::cos(kPi * s);
        const double z1 = -r * std::sin(kPi * s);
        out[i++] = z0;
        if (i < n) out[i++] = z1;
    }
}

void uniforms_scalar(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo,
                     int n, double* out) {
    int i = 0;
    std::uint64_t blk = ctr_lo;
    while (i < n) {
        double u0, u1;
        block_uniforms(key, ctr_hi, blk++, u0, u1);
        out[i++] = u0;
        if (i < n) out[i++] = u1;
    }
}

void prefix_pos_scalar(const double* incr, int n, double x0, double* pos,
                       double* mn, double* mx) {
    double acc = x0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        acc += incr[i];
        pos[i] = acc;
        lo = acc < lo ? acc : lo;
        hi = acc > hi ? acc : hi;
    }
    *mn = lo;
    *mx = hi;
}

void vlog_scalar(const double* x, int n, double* y) {
    for (int i = 0; i < n; ++i) y[i] = std::log(x[i]);
}

void vsincospi_scalar(const double* s, int n, double* sn, double* cs) {
    constexpr double kPi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        sn[i] = std::sin(kPi * s[i]);
        cs[i] = std::cos(kPi * s[i]);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar",      normals_scalar, uniforms_scalar,
                         prefix_pos_scalar, vlog_scalar,    vsincospi_scalar};
    return ops;
}

}  // namespace bmg::kernels
