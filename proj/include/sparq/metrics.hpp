// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

namespace sparq {

// Fraction of the true top-k positions recovered by the approximate scores:
// |topk(true) intersect topk(approx)| / k, with the standard smallest-index
// tie rule on both sides.
// Errors: "shape-mismatch" for unequal lengths or k exceeding them.
double topk_agreement(std::span<const double> true_scores, std::span<const double> approx_scores,
                      std::size_t k);

// Excess kurtosis m4/m2^2 - 3 from population moments. Zero for a Gaussian;
// positive for heavy-tailed samples.
// Errors: "degenerate-distribution" for zero variance, "short-sample" for
// fewer than 4 samples.
double fisher_kurtosis(std::span<const double> samples);

}  // namespace sparq
