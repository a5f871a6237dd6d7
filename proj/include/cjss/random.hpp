#pragma once

#include "cjss/core.hpp"

#include <random>

namespace cjss {

/// Single seeded engine type used everywhere so runs are reproducible.
using Rng = std::mt19937_64;

/// Standard normal block; complex entries get independent real/imaginary parts.
template <class Scalar>
Block<Scalar> gaussian_block(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Block<Scalar> out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            if constexpr (is_complex_v<Scalar>) {
                const double re = normal(rng);
                const double im = normal(rng);
                out(i, j) = Scalar(re, im) / std::sqrt(2.0);
            } else {
                out(i, j) = normal(rng);
            }
        }
    }
    return out;
}

template <class Scalar>
Block<Scalar> gaussian_block(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    return gaussian_block<Scalar>(rows, cols, rng);
}

/// Entries +1/-1 with equal probability.
template <class Scalar>
Block<Scalar> rademacher_block(Index rows, Index cols, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Block<Scalar> out(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) out(i, j) = coin(rng) ? Scalar(1) : Scalar(-1);
    return out;
}

} // namespace cjss
