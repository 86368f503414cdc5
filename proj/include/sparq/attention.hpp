// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparq/kv_cache.hpp"
#include "sparq/ledger.hpp"
#include "sparq/numeric.hpp"

namespace sparq {

// Static shape and sparsity parameters for one KV head.
//
//   head_dim      d_h, length of q/k/v vectors
//   group_size    g, grouped-query heads sharing this KV head (1 = MHA)
//   rank          r, number of query components used for score approximation
//   top_k         k, number of positions fetched in full
//   local_window  l, most recent positions selected unconditionally (l <= k)
//   reallocate_mean   interpolate the output with the running mean value
//                     vector, weighted by the unselected score mass
class AttentionHeadConfig {
public:
    std::size_t head_dim = 0;
    std::size_t group_size = 1;
    std::size_t rank = 0;
    std::size_t top_k = 0;
    std::size_t local_window = 0;
    bool reallocate_mean = true;

    // Validates and normalizes. rank is clamped to [1, head_dim] and
    // local_window to [0, top_k]; each clamp appends a note to `warnings`
    // when provided. reallocate_mean defaults to on for group_size == 1 and
    // off otherwise (grouped models fare better without it), unless
    // explicitly overridden.
    // Errors: "bad-parameter" for zero head_dim, group_size, rank or top_k.
    static AttentionHeadConfig make(std::size_t head_dim, std::size_t group_size, std::size_t rank,
                                    std::size_t top_k, std::size_t local_window,
                                    std::optional<bool> reallocate_mean = std::nullopt,
                                    std::vector<std::string>* warnings = nullptr);
};

// Step-1 result: which query components were used, the softmax temperature,
// and the approximate scores over all S positions (a probability vector).
struct ApproxScores {
    IndexList components;  // i1, ascending
    double temperature = 0.0;
    Vec64 scores;  // s_hat, length S
};

// Step-2 result: the fetched positions, the approximate score mass they
// carry, and the exact softmax restricted to them.
struct SparseSelection {
    IndexList positions;  // i2, ascending; always contains the local window
    double alpha = 0.0;   // sum of s_hat over i2, in [0, 1]
    Vec64 exact_scores;   // softmax(q . K[i2]^T / sqrt(d_h)), length |i2|
};

struct AttentionOutput {
    Vec64 output;  // y, length d_h
    std::optional<ApproxScores> approx;
    std::optional<SparseSelection> selection;
    TransferLedger ledger;
};

// Reference y = softmax(q . K^T / sqrt(d_h)) . V. The ledger charges reading
// the full K and V caches (2*S*d_h) plus the per-step k/v append write
// (2*d_h), the whole per-token transfer of a dense decode step.
// Errors: "empty-cache" when S = 0, "shape-mismatch" on bad query length.
AttentionOutput dense_attention(std::span<const double> query, const KVCacheHead& cache);

// Approximate scores from an explicit component set: softmax of the
// components-only query/key dot products at temperature
// sqrt(d_h * |q[i1]|_1 / |q|_1). A zero query falls back to temperature
// sqrt(d_h) (the scores are uniform either way). Charges |i1| * S reads of
// component rows. Shared by step 1, the grouped variant, and the harness's
// alternative component selectors.
ApproxScores approx_scores_with_components(std::span<const double> query, const KVCacheHead& cache,
                                           IndexList components, TransferLedger& ledger);

// Step 1: pick the top-rank components of |q| and approximate all S scores.
ApproxScores sparq_step1(std::span<const double> query, const KVCacheHead& cache,
                         const AttentionHeadConfig& cfg, TransferLedger& ledger);

// Step 2: select top_k positions of s_hat, with the last local_window
// positions forced (the +1 local mask dominates any approximate score).
// Computes exact scores over the selection and charges fetching the selected
// keys and values (2 * |i2| * d_h reads).
SparseSelection sparq_step2(const ApproxScores& approx, std::span<const double> query,
                            const KVCacheHead& cache, const AttentionHeadConfig& cfg,
                            TransferLedger& ledger);

// Step 3: y = alpha * (s . V[i2]) + (1 - alpha) * v_mean when mean
// reallocation is on, plain s . V[i2] otherwise. Charges the k/v append
// write (2*d_h) and, with reallocation, the mean vector read + write-back.
Vec64 sparq_step3(const SparseSelection& selection, const KVCacheHead& cache,
                  const AttentionHeadConfig& cfg, TransferLedger& ledger);

// The full three-step pipeline for a single query. Per-call ledger totals
// S*r + 2*k*d_h + 4*d_h (2*d_h less without mean reallocation).
AttentionOutput sparq_attention(std::span<const double> query, const KVCacheHead& cache,
                                const AttentionHeadConfig& cfg);

struct GroupAttentionResult {
    std::vector<AttentionOutput> outputs;  // per query; their ledgers stay empty
    TransferLedger ledger;                 // K/V fetched once per KV head
};

// Grouped-query variant: component selection uses |q| summed across the
// group, position selection uses group-summed approximate scores (the local
// mask scales to group_size so it still dominates the sum). Temperatures,
// score masses and outputs remain per-query over the shared selection.
GroupAttentionResult sparq_attention_gqa(std::span<const Vec64> queries, const KVCacheHead& cache,
                                         const AttentionHeadConfig& cfg);

// Intermediate forms of the approximation chain, exposed for validation.
// Sparse value sum keeping original softmax weights: (s o m_s) . V.
Vec64 topk_value_sum(std::span<const double> query, const KVCacheHead& cache, const IndexList& positions);

// As above plus the mean-value correction (1 - sum of selected s) * v_mean.
Vec64 topk_value_sum_mean_corrected(std::span<const double> query, const KVCacheHead& cache,
                                    const IndexList& positions);

// Softmax renormalized over the selected positions only; equals the
// mask-with-epsilon-log form in the epsilon -> 0 limit, computed by
// gathering the selected logits rather than by literal log(0 + eps).
Vec64 renormalized_topk_attention(std::span<const double> query, const KVCacheHead& cache,
                                  const IndexList& positions);

}  // namespace sparq
