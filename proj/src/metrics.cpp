// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/metrics.hpp"

#include <algorithm>

#include "sparq/numeric.hpp"

namespace sparq {

double topk_agreement(std::span<const double> true_scores, std::span<const double> approx_scores,
                      std::size_t k) {
    if (true_scores.size() != approx_scores.size()) {
        throw Error("shape-mismatch", "score vectors must have equal length");
    }
    if (k == 0 || k > true_scores.size()) {
        throw Error("shape-mismatch", "k must be in [1, len(scores)]");
    }
    const IndexList truth = argtopk(true_scores, k);
    const IndexList approx = argtopk(approx_scores, k);
    std::size_t hits = 0;
    for (std::size_t p : approx) {
        if (truth.contains(p)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

double fisher_kurtosis(std::span<const double> samples) {
    if (samples.size() < 4) {
        throw Error("short-sample", "kurtosis requires at least 4 samples");
    }
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) {
        mean += v;
    }
    mean /= n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : samples) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if (m2 == 0.0) {
        throw Error("degenerate-distribution", "kurtosis undefined for zero variance");
    }
    return m4 / (m2 * m2) - 3.0;
}

}  // namespace sparq
