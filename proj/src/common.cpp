#include "bnav/common.hpp"

#include <iostream>

namespace bnav {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, Stream purpose, std::uint64_t agent,
                std::uint64_t step) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ agent);
    h = splitmix64(h ^ step);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

namespace {
bool g_warnings = true;
}

void warn(std::string_view message) {
    if (g_warnings) std::cerr << "warning: " << message << '\n';
}
void set_warnings_enabled(bool enabled) { g_warnings = enabled; }
bool warnings_enabled() { return g_warnings; }

}  // namespace bnav
