// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/workload.hpp"

#include <cmath>
#include <numbers>

namespace sparq {

double Rng::uniform() {
    // 53 random bits -> [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::student_t3() {
    // z / sqrt(chi^2_3 / 3) with the chi-square built from three normals.
    const double z = normal();
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return z * std::sqrt(3.0 / (a * a + b * b + c * c));
}

double Rng::laplace() {
    const double u = uniform_open() - 0.5;
    return (u < 0.0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u));
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) {
        throw Error("bad-parameter", "cannot draw an index from an empty range");
    }
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t raw = engine_();
    while (raw >= limit) {
        raw = engine_();
    }
    return static_cast<std::size_t>(raw % bound);
}

std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = base + 0x9e3779b97f4a7c15ull;
    const auto mix = [&state](std::uint64_t value) {
        state += value + 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        state = z ^ (z >> 31);
    };
    for (std::uint64_t p : parts) {
        mix(p);
    }
    return state;
}

Workload synth_workload(std::size_t seq_len, std::size_t head_dim, std::size_t group_size,
                        TailKind tail, std::uint64_t seed) {
    if (head_dim == 0 || group_size == 0) {
        throw Error("bad-parameter", "head_dim and group_size must be positive");
    }
    Rng rng(seed);
    Workload workload{.queries = {}, .cache = KVCacheHead(head_dim)};

    Vec64 key(head_dim);
    Vec64 value(head_dim);
    for (std::size_t p = 0; p < seq_len; ++p) {
        for (std::size_t c = 0; c < head_dim; ++c) {
            key[c] = rng.normal();
        }
        for (std::size_t c = 0; c < head_dim; ++c) {
            value[c] = rng.normal();
        }
        workload.cache.append(key, value);
    }

    workload.queries.reserve(group_size);
    for (std::size_t j = 0; j < group_size; ++j) {
        Vec64 q(head_dim);
        for (std::size_t c = 0; c < head_dim; ++c) {
            q[c] = tail == TailKind::Heavy ? rng.student_t3() : rng.normal();
        }
        workload.queries.push_back(std::move(q));
    }
    return workload;
}

}  // namespace sparq
