#include "srdetect/simd/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace srd::simd {
namespace {

IsaLevel detect() {
    if (const char* env = std::getenv("SRDETECT_ISA")) {
        if (std::strcmp(env, "scalar") == 0) return IsaLevel::scalar;
        if (std::strcmp(env, "avx2") == 0 && ops_avx2()) return IsaLevel::avx2;
    }
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") && ops_avx2())
        return IsaLevel::avx2;
#endif
    return IsaLevel::scalar;
}

} // namespace

IsaLevel active_level() {
    static const IsaLevel level = detect();
    return level;
}

const char* level_name(IsaLevel level) {
    switch (level) {
        case IsaLevel::avx2: return "avx2";
        default: return "scalar";
    }
}

const Ops& ops() {
    static const Ops& table = (active_level() == IsaLevel::avx2) ? *ops_avx2() : ops_scalar();
    return table;
}

} // namespace srd::simd
