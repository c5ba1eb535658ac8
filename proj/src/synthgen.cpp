#include "bnav/synthgen.hpp"

#include <algorithm>
#include <cmath>

namespace bnav {

void SynthSpec::validate() const {
    if (n < 2) throw ValidationError("synthetic network needs at least 2 vertices");
    if (o < n - 1 || o > n * (n - 1) / 2)
        throw ValidationError("edge count " + std::to_string(o) + " outside [n-1, n(n-1)/2] for n=" +
                              std::to_string(n));
}

SynthInstance generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n;

    // Every forward pair that is not a chain edge, in lexicographic order.
    std::vector<std::pair<VertexId, VertexId>> candidates;
    for (VertexId h = 0; h < n; ++h)
        for (VertexId g = h + 2; g < n; ++g) candidates.emplace_back(h, g);

    // Partial Fisher-Yates: the first `extra` entries are a uniform sample
    // without duplicates.
    const std::size_t extra = spec.o - (n - 1);
    Rng rng = make_stream(spec.seed, Stream::Instance);
    for (std::size_t i = 0; i < extra; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(extra);
    std::sort(candidates.begin(), candidates.end());

    SynthInstance out;
    out.graph = RoadGraph(n);
    out.source = 0;
    out.target = static_cast<VertexId>(n - 1);

    auto add = [&out](VertexId from, VertexId to, double theta) {
        const double skipped = static_cast<double>(to - from);
        EdgeAttributes attrs;
        attrs.length_m = skipped;
        out.graph.add_edge(from, to, attrs);
        out.truth.theta_star.push_back(theta);
        out.truth.sigma.push_back(std::sqrt(kSynthNoiseVar));
        out.prior.push_back({kShortcutRewardPerSkip * skipped, kSynthPriorVar, kSynthNoiseVar});
    };

    for (VertexId h = 0; h + 1 < n; ++h) add(h, h + 1, kChainReward);
    for (auto [h, g] : candidates) add(h, g, kShortcutRewardPerSkip * static_cast<double>(g - h));
    return out;
}

}  // namespace bnav
