// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reference implementations used to validate the library. These
// deliberately avoid the sparq:: kernels: plain loops, their own softmax and
// their own sort-based top-k, so a bug in the implementation path cannot
// hide in the oracle.

#include <cstddef>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// Matrices are flat row-major [rows x cols] vectors throughout.

Vec softmax(const Vec& logits, double temperature);

// Indices of the k largest values, smallest index on ties, ascending result.
// Built on a full stable sort.
std::vector<std::size_t> topk_by_sort(const Vec& values, std::size_t k);

// Two-loop y = softmax(q K^T / sqrt(d)) V.
Vec dense_attention(const Vec& q, const Vec& k_rows, const Vec& v_rows, std::size_t seq_len,
                    std::size_t head_dim);

// Single-function transcription of the three-step sparse attention
// algorithm for one query.
Vec sparq_monolithic(const Vec& q, const Vec& k_rows, const Vec& v_rows, const Vec& v_mean,
                     std::size_t seq_len, std::size_t head_dim, std::size_t rank, std::size_t top_k,
                     std::size_t local_window, bool reallocate_mean);

// Grouped variant: |q| summed over the group for component selection,
// per-query approximate scores summed (plus a group-scaled local mask) for
// position selection, per-query outputs.
std::vector<Vec> sparq_group_monolithic(const std::vector<Vec>& queries, const Vec& k_rows,
                                        const Vec& v_rows, const Vec& v_mean, std::size_t seq_len,
                                        std::size_t head_dim, std::size_t rank, std::size_t top_k,
                                        std::size_t local_window, bool reallocate_mean);

// Approximate scores via an explicitly materialized component mask:
// softmax((q o mask) . K^T / temperature) over the full width d, including
// the zeroed components.
Vec masked_component_scores(const Vec& q, const Vec& k_rows, std::size_t seq_len, std::size_t head_dim,
                            const std::vector<bool>& component_mask, double temperature);

// Renormalized sparse attention in its literal mask form:
// softmax(q K^T / sqrt(d) + log(mask + eps)) V with a tiny eps.
Vec masked_renorm_attention(const Vec& q, const Vec& k_rows, const Vec& v_rows, std::size_t seq_len,
                            std::size_t head_dim, const std::vector<bool>& position_mask, double eps);

// Sparse value sum (s o m) V and its mean-corrected form, from dense scores.
Vec masked_value_sum(const Vec& q, const Vec& k_rows, const Vec& v_rows, std::size_t seq_len,
                     std::size_t head_dim, const std::vector<bool>& position_mask);
Vec masked_value_sum_corrected(const Vec& q, const Vec& k_rows, const Vec& v_rows, const Vec& v_mean,
                               std::size_t seq_len, std::size_t head_dim,
                               const std::vector<bool>& position_mask);

// Step-by-step simulation of the greedy heavy-hitter policy. Feed one
// (key, value) row per step; attend() returns the attention output over the
// currently retained positions and updates the accumulated scores.
class H2OSim {
public:
    H2OSim(std::size_t budget, std::size_t local_window, std::size_t head_dim);

    void push(const Vec& key, const Vec& value);
    Vec attend(const Vec& q);

    const std::vector<std::size_t>& retained() const { return retained_; }
    const Vec& cumulative() const { return cumulative_; }

private:
    std::size_t budget_;
    std::size_t local_window_;
    std::size_t head_dim_;
    std::size_t steps_ = 0;
    Vec keys_;    // all pushed rows
    Vec values_;  // all pushed rows
    std::vector<std::size_t> retained_;
    Vec cumulative_;
};

// Position set of the sink-plus-recent windowing scheme.
std::vector<std::size_t> window_positions(std::size_t seq_len, std::size_t budget,
                                          std::size_t sink_tokens);

// Exact-score top-k attention via an explicit mask over dense scores,
// keeping the original softmax weights.
Vec topk_masked_attention(const Vec& q, const Vec& k_rows, const Vec& v_rows, std::size_t seq_len,
                          std::size_t head_dim, std::size_t top_k);

}  // namespace oracle
