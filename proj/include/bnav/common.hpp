#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bnav {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Bad input: malformed files, violated preconditions, infeasible parameters.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The target cannot be reached from the source under the given graph.
class NoPathError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Named purposes for derived random streams. Values are part of the trace
/// format: changing them changes every recorded trajectory.
enum class Stream : std::uint64_t {
    Policy = 1,
    Reward = 2,
    Instance = 3,
    TruthMonteCarlo = 4,
    Pairing = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for (seed, purpose, agent, step). Every agent and
/// every step gets its own stream so that fleet size or horizon changes never
/// shift the draws seen by another agent.
Rng make_stream(std::uint64_t seed, Stream purpose, std::uint64_t agent = 0,
                std::uint64_t step = 0);

/// Diagnostics for recoverable oddities (odd edge count, resampled edges).
/// Writes to stderr unless silenced.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);
bool warnings_enabled();

}  // namespace bnav
