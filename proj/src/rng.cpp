// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/rng.hpp"

#include "budgetrl/errors.hpp"

namespace budgetrl {
namespace {

// splitmix64 finalizer; decorrelates nearby inputs.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index_a, std::uint64_t index_b) {
    std::uint64_t h = mix64(root ^ fnv1a(stream));
    h = mix64(h ^ (index_a + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (index_b + 0x7f4a7c159e3779b9ULL));
    return h;
}

Rng make_rng(std::uint64_t root, std::string_view stream,
             std::uint64_t index_a, std::uint64_t index_b) {
    return Rng(derive_seed(root, stream, index_a, index_b));
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) throw RuntimeFailure("uniform_below: n must be positive");
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % n;
}

int sample_categorical(Rng& rng, const Eigen::Ref<const Eigen::VectorXd>& probs) {
    if (probs.size() == 0) throw RuntimeFailure("sample_categorical: empty distribution");
    const double u = uniform01(rng);
    double cdf = 0.0;
    for (Eigen::Index i = 0; i + 1 < probs.size(); ++i) {
        cdf += probs[i];
        if (u < cdf) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

double sample_normal(Rng& rng) {
    // Box-Muller; offset keeps the log argument strictly positive.
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace budgetrl
