// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>

namespace budgetrl {

using Rng = std::mt19937_64;

// Derives an independent child seed from a root seed, a stream name, and up
// to two indices. Every random decision in the toolkit draws from a stream
// derived this way, so reruns with an equal root seed are byte-identical and
// parallel workers never share generator state.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index_a = 0, std::uint64_t index_b = 0);

Rng make_rng(std::uint64_t root, std::string_view stream,
             std::uint64_t index_a = 0, std::uint64_t index_b = 0);

// Uniform draw in [0, 1) built directly from the generator's top 53 bits.
// Avoids std::uniform_real_distribution so the byte stream is pinned by this
// code, not by the standard library implementation.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) via rejection sampling (unbiased, deterministic).
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

// Samples an index from an explicit probability vector (one uniform draw,
// CDF walk). Probabilities must sum to ~1; the final index absorbs rounding.
int sample_categorical(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& probs);

// Standard normal via Box-Muller on uniform01 draws (two draws per call).
double sample_normal(Rng& rng);

}  // namespace budgetrl
