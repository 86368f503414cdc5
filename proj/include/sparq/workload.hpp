// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "sparq/kv_cache.hpp"
#include "sparq/numeric.hpp"

namespace sparq {

// Deterministic random source. Samplers are implemented on top of the raw
// 64-bit stream (not the standard-library distributions) so a given seed
// yields the same values on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();                 // [0, 1)
    double uniform_open();            // (0, 1]
    double normal();                  // N(0, 1), Box-Muller
    double student_t3();              // Student-t, 3 degrees of freedom
    double laplace();                 // unit-scale Laplace
    std::size_t index(std::size_t n); // uniform over 0..n-1, unbiased

private:
    std::mt19937_64 engine_;
};

// Order-sensitive seed derivation for independent streams (sweep cells,
// trials). SplitMix64-style mixing of the parts into the base seed.
std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

enum class TailKind { Gaussian, Heavy };

// One KV head's worth of synthetic data: g query vectors plus a filled
// cache. Keys and values are standard normal; query components are standard
// normal or, in heavy mode, Student-t with 3 degrees of freedom (strongly
// leptokurtic, mimicking the concentration of query mass in a few
// components).
struct Workload {
    std::vector<Vec64> queries;
    KVCacheHead cache;
};

Workload synth_workload(std::size_t seq_len, std::size_t head_dim, std::size_t group_size,
                        TailKind tail, std::uint64_t seed);

}  // namespace sparq
