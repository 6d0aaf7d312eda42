#include "bmg/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "bmg/philox.hpp"

// AVX2 variants of the inner-loop kernels. Four Philox blocks are advanced in
// parallel (one 32-bit word per 64-bit lane, multiplied with mul_epu32), and
// the Box-Muller transform uses polynomial log/sincos kernels in the cephes /
// fdlibm style. Uniform deviates are bit-identical to the scalar backend;
// normals agree to a few ulp.

namespace bmg::kernels {
namespace {

const __m256i kMask32 = _mm256_set1_epi64x(0xFFFFFFFFll);

struct Quad {
    __m256i x0, x1, x2, x3;  // four output words for four blocks
};

inline Quad philox4(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t blk) {
    __m256i c0 = _mm256_set_epi64x(static_cast<std::uint32_t>(blk + 3),
                                   static_cast<std::uint32_t>(blk + 2),
                                   static_cast<std::uint32_t>(blk + 1),
                                   static_cast<std::uint32_t>(blk + 0));
    __m256i c1 = _mm256_set_epi64x(static_cast<std::uint32_t>((blk + 3) >> 32),
                                   static_cast<std::uint32_t>((blk + 2) >> 32),
                                   static_cast<std::uint32_t>((blk + 1) >> 32),
                                   static_cast<std::uint32_t>((blk + 0) >> 32));
    __m256i c2 = _mm256_set1_epi64x(static_cast<std::uint32_t>(ctr_hi));
    __m256i c3 = _mm256_set1_epi64x(static_cast<std::uint32_t>(ctr_hi >> 32));
    __m256i k0 = _mm256_set1_epi64x(static_cast<std::uint32_t>(key));
    __m256i k1 = _mm256_set1_epi64x(static_cast<std::uint32_t>(key >> 32));
    const __m256i m0 = _mm256_set1_epi64x(Philox4x32::kMul0);
    const __m256i m1 = _mm256_set1_epi64x(Philox4x32::kMul1);
    const __m256i w0 = _mm256_set1_epi64x(Philox4x32::kWeyl0);
    const __m256i w1 = _mm256_set1_epi64x(Philox4x32::kWeyl1);
    for (int round = 0; round < 10; ++round) {
        // mul_epu32 reads only the low 32 bits of each lane, so stray bits in
        // the upper halves of the xor chains are harmless until the final mask.
        const __m256i p0 = _mm256_mul_epu32(c0, m0);
        const __m256i p1 = _mm256_mul_epu32(c2, m1);
        const __m256i hi0 = _mm256_srli_epi64(p0, 32);
        const __m256i lo0 = _mm256_and_si256(p0, kMask32);
        const __m256i hi1 = _mm256_srli_epi64(p1, 32);
        const __m256i lo1 = _mm256_and_si256(p1, kMask32);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
        c0 = n0;
        c1 = lo1;
        c2 = n2;
        c3 = lo0;
        k0 = _mm256_add_epi64(k0, w0);
        k1 = _mm256_add_epi64(k1, w1);
    }
    return Quad{_mm256_and_si256(c0, kMask32), _mm256_and_si256(c1, kMask32),
                _mm256_and_si256(c2, kMask32), _mm256_and_si256(c3, kMask32)};
}

// (u64 >> 12) + 0.5 times 2^-52, matching uniform_from_bits() bit for bit.
inline __m256d uniform_pd(__m256i w) {
    const __m256i shifted = _mm256_srli_epi64(w, 12);
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
    const __m256d d =
        _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(shifted, magic)),
                      _mm256_set1_pd(4503599627370496.0));
    return _mm256_mul_pd(_mm256_add_pd(d, _mm256_set1_pd(0.5)),
                         _mm256_set1_pd(0x1.0p-52));
}

inline void uniform8(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t blk,
                     __m256d& u_even, __m256d& u_odd) {
    const Quad q = philox4(key, ctr_hi, blk);
    const __m256i w0 = _mm256_or_si256(_mm256_slli_epi64(q.x0, 32), q.x1);
    const __m256i w1 = _mm256_or_si256(_mm256_slli_epi64(q.x2, 32), q.x3);
    u_even = uniform_pd(w0);  // uniform 2i of blocks blk..blk+3
    u_odd = uniform_pd(w1);   // uniform 2i+1
}

// log(x), cephes-style rational approximation.
inline __m256d vlog_pd(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i exp_raw =
        _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7FF));
    __m256d e = _mm256_sub_pd(
        _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(
                          exp_raw, _mm256_set1_epi64x(0x4330000000000000ll))),
                      _mm256_set1_pd(4503599627370496.0)),
        _mm256_set1_pd(1022.0));
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
        _mm256_set1_epi64x(0x3FE0000000000000ll)));  // m in [0.5, 1)
    const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
    const __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(below, _mm256_set1_pd(1.0)));
    m = _mm256_add_pd(m, _mm256_and_pd(below, m));  // 2m where m < sqrt(1/2)
    const __m256d z = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
    const __m256d z2 = _mm256_mul_pd(z, z);

    __m256d p = _mm256_set1_pd(1.01875663804580931796e-4);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.97494994976747001425e-1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.70579119878881725854e0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.44989225341610930846e1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.79368678507819816313e1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(7.70838733755885391666e0));
    __m256d q = _mm256_add_pd(z, _mm256_set1_pd(1.12873587189167450590e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(4.52279145837532221105e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(8.29875266912776603211e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(7.11544750618563894466e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.31251620126765340583e1));

    __m256d y = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(z, z2), p), q);
    y = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z2, y);
    __m256d r = _mm256_add_pd(z, y);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
    return r;
}

inline __m256d sin_kernel(__m256d r, __m256d z) {
    __m256d s = _mm256_set1_pd(1.58969099521155010221e-10);
    s = _mm256_fmadd_pd(s, z, _mm256_set1_pd(-2.50507602534068634195e-8));
    s = _mm256_fmadd_pd(s, z, _mm256_set1_pd(2.75573137070700676789e-6));
    s = _mm256_fmadd_pd(s, z, _mm256_set1_pd(-1.98412698298579493134e-4));
    s = _mm256_fmadd_pd(s, z, _mm256_set1_pd(8.33333333332248946124e-3));
    s = _mm256_fmadd_pd(s, z, _mm256_set1_pd(-1.66666666666666324348e-1));
    return _mm256_fmadd_pd(_mm256_mul_pd(r, z), s, r);
}

inline __m256d cos_kernel(__m256d z) {
    __m256d c = _mm256_set1_pd(-1.13596475577881948265e-11);
    c = _mm256_fmadd_pd(c, z, _mm256_set1_pd(2.08757232129817482790e-9));
    c = _mm256_fmadd_pd(c, z, _mm256_set1_pd(-2.75573143513906633035e-7));
    c = _mm256_fmadd_pd(c, z, _mm256_set1_pd(2.48015872894767294178e-5));
    c = _mm256_fmadd_pd(c, z, _mm256_set1_pd(-1.38888888888741095749e-3));
    c = _mm256_fmadd_pd(c, z, _mm256_set1_pd(4.16666666666666019037e-2));
    __m256d y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0));
    return _mm256_fmadd_pd(_mm256_mul_pd(z, z), c, y);
}

// sin(pi*s), cos(pi*s) for s in [-1, 1].
inline void vsincospi_pd(__m256d s, __m256d& sn, __m256d& cs) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d sgn = _mm256_and_pd(s, sign_mask);
    const __m256d a = _mm256_andnot_pd(sign_mask, s);
    const __m256d k = _mm256_round_pd(_mm256_add_pd(a, a),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d r = _mm256_mul_pd(
        _mm256_set1_pd(3.14159265358979323846),
        _mm256_fnmadd_pd(_mm256_set1_pd(0.5), k, a));  // pi*(a - k/2), |r| <= pi/4
    const __m256d z = _mm256_mul_pd(r, r);
    const __m256d ss = sin_kernel(r, z);
    const __m256d cc = cos_kernel(z);
    const __m256d k1 = _mm256_cmp_pd(k, _mm256_set1_pd(0.5), _CMP_GT_OQ);
    const __m256d k2 = _mm256_cmp_pd(k, _mm256_set1_pd(1.5), _CMP_GT_OQ);
    // k=0: (ss, cc); k=1: (cc, -ss); k=2: (-ss, -cc)
    __m256d sin_a = _mm256_blendv_pd(ss, cc, k1);
    sin_a = _mm256_blendv_pd(sin_a, _mm256_xor_pd(ss, sign_mask), k2);
    __m256d cos_a = _mm256_blendv_pd(cc, _mm256_xor_pd(ss, sign_mask), k1);
    cos_a = _mm256_blendv_pd(cos_a, _mm256_xor_pd(cc, sign_mask), k2);
    sn = _mm256_xor_pd(sin_a, sgn);  // sin is odd, cos even
    cs = cos_a;
}

void normals_avx2(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo,
                  int n, double* out) {
    std::uint64_t blk = ctr_lo;
    int i = 0;
    alignas(32) double z0v[4], z1v[4];
    while (i < n) {
        __m256d u1, u2;
        uniform8(key, ctr_hi, blk, u1, u2);
        blk += 4;
        const __m256d r = _mm256_sqrt_pd(
            _mm256_mul_pd(_mm256_set1_pd(-2.0), vlog_pd(u1)));
        const __m256d s = _mm256_fmadd_pd(_mm256_set1_pd(2.0), u2,
                                          _mm256_set1_pd(-1.0));
        __m256d sn, cs;
        vsincospi_pd(s, sn, cs);
        const __m256d neg_r = _mm256_xor_pd(r, _mm256_set1_pd(-0.0));
        _mm256_store_pd(z0v, _mm256_mul_pd(neg_r, cs));
        _mm256_store_pd(z1v, _mm256_mul_pd(neg_r, sn));
        // block j yields normals (2j, 2j+1)
        for (int lane = 0; lane < 4 && i < n; ++lane) {
            out[i++] = z0v[lane];
            if (i < n) out[i++] = z1v[lane];
        }
    }
}

void uniforms_avx2(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo,
                   int n, double* out) {
    std::uint64_t blk = ctr_lo;
    int i = 0;
    alignas(32) double u0v[4], u1v[4];
    while (i < n) {
        __m256d u0, u1;
        uniform8(key, ctr_hi, blk, u0, u1);
        blk += 4;
        _mm256_store_pd(u0v, u0);
        _mm256_store_pd(u1v, u1);
        for (int lane = 0; lane < 4 && i < n; ++lane) {
            out[i++] = u0v[lane];
            if (i < n) out[i++] = u1v[lane];
        }
    }
}

inline __m256d shift_in_zero1(__m256d v) {
    const __m256d p = _mm256_permute4x64_pd(v, 0x90);  // [v0, v0, v1, v2]
    return _mm256_blend_pd(p, _mm256_setzero_pd(), 0x1);
}

inline __m256d shift_in_zero2(__m256d v) {
    const __m256d p = _mm256_permute4x64_pd(v, 0x40);  // [v0, v0, v0, v1]
    return _mm256_blend_pd(p, _mm256_setzero_pd(), 0x3);
}

void prefix_pos_avx2(const double* incr, int n, double x0, double* pos,
                     double* mn, double* mx) {
    __m256d carry = _mm256_set1_pd(x0);
    __m256d vmin = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d vmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(incr + i);
        v = _mm256_add_pd(v, shift_in_zero1(v));
        v = _mm256_add_pd(v, shift_in_zero2(v));
        const __m256d p = _mm256_add_pd(v, carry);
        _mm256_storeu_pd(pos + i, p);
        vmin = _mm256_min_pd(vmin, p);
        vmax = _mm256_max_pd(vmax, p);
        carry = _mm256_permute4x64_pd(p, 0xFF);  // broadcast last prefix
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vmin);
    double lo = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
    _mm256_store_pd(lanes, vmax);
    double hi = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    double acc = i > 0 ? pos[i - 1] : x0;
    for (; i < n; ++i) {
        acc += incr[i];
        pos[i] = acc;
        lo = acc < lo ? acc : lo;
        hi = acc > hi ? acc : hi;
    }
    *mn = lo;
    *mx = hi;
}

void vlog_avx2(const double* x, int n, double* y) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, vlog_pd(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = std::log(x[i]);
}

void vsincospi_avx2(const double* s, int n, double* sn, double* cs) {
    constexpr double kPi = 3.14159265358979323846;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a, b;
        vsincospi_pd(_mm256_loadu_pd(s + i), a, b);
        _mm256_storeu_pd(sn + i, a);
        _mm256_storeu_pd(cs + i, b);
    }
    for (; i < n; ++i) {
        sn[i] = std::sin(kPi * s[i]);
        cs[i] = std::cos(kPi * s[i]);
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{"avx2",        normals_avx2, uniforms_avx2,
                         prefix_pos_avx2, vlog_avx2,    vsincospi_avx2};
    return ops;
}

}  // namespace bmg::kernels

#endif  // x86_64
