// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sparq/attention.hpp"
#include "sparq/kv_cache.hpp"

namespace sparq {

// Number of initial positions the windowing baseline always keeps.
inline constexpr std::size_t kSinkTokens = 16;

// Greedy eviction state for the heavy-hitter baseline. Tracks which cache
// positions are retained (at most `budget`), the attention mass each has
// accumulated, and guarantees the `local_window` most recent positions stay
// retained. Eviction drops the non-local position with the lowest
// accumulated score; ties evict the smaller index. The shared KVCacheHead is
// untouched; only this view forgets positions.
class H2OState {
public:
    // Errors: "bad-parameter" if budget == 0 or local_window > budget.
    H2OState(std::size_t budget, std::size_t local_window);

    std::size_t budget() const { return budget_; }
    std::size_t local_window() const { return local_window_; }
    const std::vector<std::size_t>& retained() const { return retained_; }
    const Vec64& cumulative_scores() const { return cum_scores_; }
    std::size_t admitted() const { return admitted_; }

    // Admits cache positions [admitted, cache.size()), evicting one position
    // per admission when over budget.
    void admit_new_positions(const KVCacheHead& cache);

    void accumulate(std::span<const double> scores);  // aligned with retained()

private:
    void evict_one();

    std::size_t budget_;
    std::size_t local_window_;
    std::size_t admitted_ = 0;          // cache positions processed so far
    std::vector<std::size_t> retained_;  // ascending
    Vec64 cum_scores_;                   // aligned with retained_
};

// One decode step of the eviction baseline: admit the newly appended
// token(s), evict down to budget, attend densely over the retained set, and
// fold the fresh scores into the accumulators. Ledger:
// 2*|retained|*d_h reads + 2*d_h append writes + 2*S score bookkeeping (one
// accumulator read and write per sequence position, following the reference
// transfer model).
// Errors: "bad-state" if the state claims more admissions than the cache
// holds; "empty-cache"/"shape-mismatch" as for dense attention.
AttentionOutput h2o_attention(std::span<const double> query, H2OState& state, const KVCacheHead& cache);

// Fixed-pattern baseline: the first kSinkTokens positions plus the most
// recent budget-16, all positions when S <= budget. Ledger: 2*|positions|*d_h
// reads + 2*d_h writes.
// Errors: "bad-parameter" when S > budget and budget <= kSinkTokens.
AttentionOutput lm_infinite_attention(std::span<const double> query, const KVCacheHead& cache,
                                      std::size_t budget);

// Exact-score top-k baseline: computes the full dense scores (reading all of
// K), then fetches values only for the top-k scoring positions. The output
// keeps the original softmax weights (no renormalization) unless
// `renormalize` is set. Ledger: S*d_h + k*d_h reads + 2*d_h writes.
AttentionOutput flexgen_attention(std::span<const double> query, const KVCacheHead& cache,
                                  std::size_t budget, bool renormalize = false);

}  // namespace sparq
