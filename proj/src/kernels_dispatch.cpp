#include "bmg/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace bmg::kernels {
namespace {

const Ops& select() {
    const char* want = std::getenv("BMG_KERNELS");
    if (want && std::strcmp(want, "scalar") == 0) return scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (want && std::strcmp(want, "avx2") == 0) return avx2_ops();
    if (!want && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_ops();
#endif
    return scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& chosen = select();
    return chosen;
}

const char* active_backend() { return ops().name; }

}  // namespace bmg::kernels
