#pragma once

#include <cstdint>

#include "bnav/energy.hpp"
#include "bnav/environment.hpp"
#include "bnav/graph.hpp"

namespace bnav {

/// Hard synthetic instance: a chain u_0 -> ... -> u_{n-1} plus random forward
/// shortcuts. The chain is always the unique optimum, yet the prior rates
/// every source-target path the same.
struct SynthSpec {
    std::size_t n = 30;   // vertices
    std::size_t o = 200;  // edges, n-1 <= o <= n(n-1)/2
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr double kChainReward = -10.0;
inline constexpr double kShortcutRewardPerSkip = -11.0;
inline constexpr double kSynthNoiseVar = 4.0;
inline constexpr double kSynthPriorVar = 8.0;

struct SynthInstance {
    RoadGraph graph;
    GroundTruth truth;
    std::vector<GaussianBelief> prior;
    VertexId source = 0;
    VertexId target = 0;
};

SynthInstance generate(const SynthSpec& spec);

}  // namespace bnav
