#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace vichoice {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent sub-stream. Streams are addressed by
/// (seed, domain, index): `domain` separates uses such as agent simulation
/// and Monte-Carlo chunks, `index` is the agent or chunk number. Each call
/// folds its arguments through splitmix64, so neighbouring indices land on
/// unrelated mt19937_64 states.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t index);

Rng make_stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index);

// Stream domains.
namespace streams {
inline constexpr std::uint64_t kAgentSimulation = 0x51;
inline constexpr std::uint64_t kDesign = 0x52;
inline constexpr std::uint64_t kPredictiveChunk = 0x53;
inline constexpr std::uint64_t kEvalTruth = 0x54;
inline constexpr std::uint64_t kEvalMethod = 0x55;
}  // namespace streams

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n);
Eigen::MatrixXd standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Draw an index from a discrete distribution by inverse CDF.
int draw_categorical(Rng& rng, const Eigen::VectorXd& probs);

}  // namespace vichoice
