#pragma once

#include <cstdint>

// Data-parallel inner-loop kernels. Each entry point has a scalar reference
// implementation and, where the hardware supports it, a SIMD variant selected
// once at startup. The variants are equivalence-tested against the scalar
// reference; trajectories are bit-reproducible for a fixed backend.

namespace bmg::kernels {

struct Ops {
    const char* name;

    // n standard normals from Philox stream (key, ctr_hi), starting at counter
    // block ctr_lo. Block i yields normals 2i and 2i+1 via Box-Muller.
    void (*normals)(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo,
                    int n, double* out);

    // n uniforms in (0,1) from the same counter layout (block i -> uniforms
    // 2i, 2i+1). Bit-identical across backends.
    void (*uniforms)(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo,
                     int n, double* out);

    // pos[i] = x0 + incr[0] + ... + incr[i]; also the min and max over pos.
    void (*prefix_pos)(const double* incr, int n, double x0, double* pos,
                       double* mn, double* mx);

    // y[i] = log(x[i]), x > 0.
    void (*vlog)(const double* x, int n, double* y);

    // sn[i] = sin(pi*s[i]), cs[i] = cos(pi*s[i]) for s in [-1, 1].
    void (*vsincospi)(const double* s, int n, double* sn, double* cs);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif

// Backend selected at startup (overridable with BMG_KERNELS=scalar|avx2).
const Ops& ops();
const char* active_backend();

}  // namespace bmg::kernels
