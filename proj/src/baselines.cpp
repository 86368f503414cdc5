// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparq {

namespace {

void check_query(std::span<const double> query, const KVCacheHead& cache) {
    if (query.size() != cache.head_dim()) {
        throw Error("shape-mismatch", "query length " + std::to_string(query.size()) +
                                          " does not match head_dim " + std::to_string(cache.head_dim()));
    }
    if (cache.size() == 0) {
        throw Error("empty-cache", "attention requires at least one cached position");
    }
}

// Softmax-normalized attention over an explicit position set.
std::pair<Vec64, Vec64> attend_over(std::span<const double> query, const KVCacheHead& cache,
                                    const IndexList& positions) {
    const MatView keys = cache.keys_seq_major();
    Vec64 logits(positions.size(), 0.0);
    for (std::size_t t = 0; t < positions.size(); ++t) {
        logits[t] = dot(keys.row(positions[t]), query);
    }
    Vec64 scores = stable_softmax(logits, std::sqrt(static_cast<double>(cache.head_dim())));
    const MatView values = cache.values();
    Vec64 out(cache.head_dim(), 0.0);
    for (std::size_t t = 0; t < positions.size(); ++t) {
        const double w = scores[t];
        const auto row = values.row(positions[t]);
        for (std::size_t c = 0; c < cache.head_dim(); ++c) {
            out[c] += w * row[c];
        }
    }
    return {std::move(out), std::move(scores)};
}

void charge_fetch(TransferLedger& ledger, std::size_t positions, std::size_t head_dim) {
    ledger.charge_read(TransferCategory::KCols, static_cast<std::uint64_t>(positions) * head_dim);
    ledger.charge_read(TransferCategory::Values, static_cast<std::uint64_t>(positions) * head_dim);
    ledger.charge_write(TransferCategory::KvAppend, 2 * head_dim);
}

}  // namespace

H2OState::H2OState(std::size_t budget, std::size_t local_window)
    : budget_(budget), local_window_(local_window) {
    if (budget == 0) {
        throw Error("bad-parameter", "h2o budget must be positive");
    }
    if (local_window > budget) {
        throw Error("bad-parameter", "h2o local window cannot exceed the budget");
    }
}

void H2OState::admit_new_positions(const KVCacheHead& cache) {
    if (admitted_ > cache.size()) {
        throw Error("bad-state", "h2o state has admitted " + std::to_string(admitted_) +
                                     " positions but the cache holds " + std::to_string(cache.size()));
    }
    while (admitted_ < cache.size()) {
        retained_.push_back(admitted_);
        cum_scores_.push_back(0.0);
        ++admitted_;
        if (retained_.size() > budget_) {
            evict_one();
        }
    }
}

void H2OState::evict_one() {
    // Local positions (the local_window most recent) are protected; evict the
    // lowest-scoring of the rest, smallest index on ties.
    const std::size_t local_cut = admitted_ - std::min(local_window_, admitted_);
    std::size_t victim = retained_.size();
    for (std::size_t t = 0; t < retained_.size(); ++t) {
        if (retained_[t] >= local_cut) {
            break;  // retained_ ascending: everything from here on is local
        }
        if (victim == retained_.size() || cum_scores_[t] < cum_scores_[victim]) {
            victim = t;
        }
    }
    if (victim == retained_.size()) {
        throw Error("bad-state", "h2o eviction found no non-local candidate");
    }
    retained_.erase(retained_.begin() + static_cast<std::ptrdiff_t>(victim));
    cum_scores_.erase(cum_scores_.begin() + static_cast<std::ptrdiff_t>(victim));
}

void H2OState::accumulate(std::span<const double> scores) {
    if (scores.size() != retained_.size()) {
        throw Error("shape-mismatch", "score vector does not align with the retained set");
    }
    for (std::size_t t = 0; t < scores.size(); ++t) {
        cum_scores_[t] += scores[t];
    }
}

AttentionOutput h2o_attention(std::span<const double> query, H2OState& state, const KVCacheHead& cache) {
    check_query(query, cache);
    state.admit_new_positions(cache);

    IndexList positions(state.retained(), cache.size());
    auto [output, scores] = attend_over(query, cache, positions);
    state.accumulate(scores);

    AttentionOutput out;
    out.output = std::move(output);
    SparseSelection sel;
    sel.alpha = 1.0;
    sel.exact_scores = std::move(scores);
    sel.positions = std::move(positions);
    out.selection = std::move(sel);
    charge_fetch(out.ledger, state.retained().size(), cache.head_dim());
    out.ledger.charge_read(TransferCategory::ScoreBookkeeping, cache.size());
    out.ledger.charge_write(TransferCategory::ScoreBookkeeping, cache.size());
    return out;
}

AttentionOutput lm_infinite_attention(std::span<const double> query, const KVCacheHead& cache,
                                      std::size_t budget) {
    check_query(query, cache);
    const std::size_t seq_len = cache.size();

    IndexList positions;
    if (seq_len <= budget) {
        positions = IndexList::full(seq_len);
    } else {
        if (budget <= kSinkTokens) {
            throw Error("bad-parameter", "budget must exceed " + std::to_string(kSinkTokens) +
                                             " once the sequence outgrows it");
        }
        std::vector<std::size_t> keep;
        keep.reserve(budget);
        for (std::size_t p = 0; p < kSinkTokens; ++p) {
            keep.push_back(p);
        }
        for (std::size_t p = seq_len - (budget - kSinkTokens); p < seq_len; ++p) {
            keep.push_back(p);
        }
        positions = IndexList(std::move(keep), seq_len);
    }

    auto [output, scores] = attend_over(query, cache, positions);
    AttentionOutput out;
    out.output = std::move(output);
    SparseSelection sel;
    sel.alpha = 1.0;
    sel.exact_scores = std::move(scores);
    sel.positions = std::move(positions);
    out.selection = std::move(sel);
    charge_fetch(out.ledger, out.selection->positions.size(), cache.head_dim());
    return out;
}

AttentionOutput flexgen_attention(std::span<const double> query, const KVCacheHead& cache,
                                  std::size_t budget, bool renormalize) {
    check_query(query, cache);
    const std::size_t seq_len = cache.size();
    const std::size_t head_dim = cache.head_dim();

    const Vec64 dense_scores = stable_softmax(matvec(cache.keys_seq_major(), query),
                                              std::sqrt(static_cast<double>(head_dim)));
    IndexList positions = argtopk(dense_scores, std::min(budget, seq_len));

    Vec64 weights(positions.size());
    double mass = 0.0;
    for (std::size_t t = 0; t < positions.size(); ++t) {
        weights[t] = dense_scores[positions[t]];
        mass += weights[t];
    }
    if (renormalize) {
        for (double& w : weights) {
            w /= mass;
        }
    }

    const MatView values = cache.values();
    Vec64 output(head_dim, 0.0);
    for (std::size_t t = 0; t < positions.size(); ++t) {
        const double w = weights[t];
        const auto row = values.row(positions[t]);
        for (std::size_t c = 0; c < head_dim; ++c) {
            output[c] += w * row[c];
        }
    }

    AttentionOutput out;
    out.output = std::move(output);
    SparseSelection sel;
    sel.alpha = mass;
    sel.exact_scores = std::move(weights);
    sel.positions = std::move(positions);
    out.selection = std::move(sel);
    out.ledger.charge_read(TransferCategory::KCols, static_cast<std::uint64_t>(seq_len) * head_dim);
    out.ledger.charge_read(TransferCategory::Values,
                           static_cast<std::uint64_t>(out.selection->positions.size()) * head_dim);
    out.ledger.charge_write(TransferCategory::KvAppend, 2 * head_dim);
    return out;
}

}  // namespace sparq
