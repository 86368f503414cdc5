// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/attention.hpp"

#include <algorithm>
#include <cmath>

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

// Raw q . K^T over the full cache, sequence-major.
Vec64 full_logits(std::span<const double> query, const KVCacheHead& cache) {
    return matvec(cache.keys_seq_major(), query);
}

// Raw q . K^T restricted to `positions`.
Vec64 gathered_logits(std::span<const double> query, const KVCacheHead& cache, const IndexList& positions) {
    const MatView keys = cache.keys_seq_major();
    Vec64 out(positions.size(), 0.0);
    for (std::size_t t = 0; t < positions.size(); ++t) {
        out[t] = dot(keys.row(positions[t]), query);
    }
    return out;
}

// sum_t weights[t] * V[positions[t], :], index-ascending accumulation.
Vec64 weighted_value_sum(const KVCacheHead& cache, const IndexList& positions,
                         std::span<const double> weights) {
    const MatView values = cache.values();
    Vec64 out(cache.head_dim(), 0.0);
    for (std::size_t t = 0; t < positions.size(); ++t) {
        const double w = weights[t];
        const auto row = values.row(positions[t]);
        for (std::size_t c = 0; c < cache.head_dim(); ++c) {
            out[c] += w * row[c];
        }
    }
    return out;
}

double l1_norm(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) {
        acc += std::abs(v);
    }
    return acc;
}

double l1_norm_at(std::span<const double> x, const IndexList& idx) {
    double acc = 0.0;
    for (std::size_t c : idx) {
        acc += std::abs(x[c]);
    }
    return acc;
}

// Positions selected by argtopk(scores + mask_value on the local window).
// mask_value must exceed the score range so local positions always win
// (1 for a single probability vector, g for group-summed scores).
IndexList select_positions(std::span<const double> scores, std::size_t top_k, std::size_t local_window,
                           double mask_value) {
    const std::size_t seq_len = scores.size();
    const std::size_t count = std::min(top_k, seq_len);
    const std::size_t local = std::min(local_window, count);
    if (local == 0) {
        return argtopk(scores, count);
    }
    Vec64 masked(scores.begin(), scores.end());
    for (std::size_t p = seq_len - local; p < seq_len; ++p) {
        masked[p] += mask_value;
    }
    return argtopk(masked, count);
}

double score_mass(std::span<const double> scores, const IndexList& positions) {
    double acc = 0.0;
    for (std::size_t p : positions) {
        acc += scores[p];
    }
    return acc;
}

SparseSelection make_selection(std::span<const double> approx_scores, std::span<const double> query,
                               const KVCacheHead& cache, std::size_t top_k, std::size_t local_window,
                               double mask_value, TransferLedger& ledger) {
    SparseSelection sel;
    sel.positions = select_positions(approx_scores, top_k, local_window, mask_value);
    sel.alpha = score_mass(approx_scores, sel.positions);
    sel.exact_scores =
        stable_softmax(gathered_logits(query, cache, sel.positions), std::sqrt(static_cast<double>(cache.head_dim())));
    ledger.charge_read(TransferCategory::KCols,
                       static_cast<std::uint64_t>(sel.positions.size()) * cache.head_dim());
    ledger.charge_read(TransferCategory::Values,
                       static_cast<std::uint64_t>(sel.positions.size()) * cache.head_dim());
    return sel;
}

void charge_step3(const KVCacheHead& cache, bool reallocate_mean, TransferLedger& ledger) {
    ledger.charge_write(TransferCategory::KvAppend, 2 * cache.head_dim());
    if (reallocate_mean) {
        ledger.charge_read(TransferCategory::MeanVector, cache.head_dim());
        ledger.charge_write(TransferCategory::MeanVector, cache.head_dim());
    }
}

Vec64 blend_with_mean(Vec64 top, double alpha, const Vec64& mean, bool reallocate_mean) {
    if (!reallocate_mean) {
        return top;
    }
    for (std::size_t c = 0; c < top.size(); ++c) {
        top[c] = alpha * top[c] + (1.0 - alpha) * mean[c];
    }
    return top;
}

}  // namespace

AttentionHeadConfig AttentionHeadConfig::make(std::size_t head_dim, std::size_t group_size,
                                              std::size_t rank, std::size_t top_k,
                                              std::size_t local_window,
                                              std::optional<bool> reallocate_mean,
                                              std::vector<std::string>* warnings) {
    if (head_dim == 0 || group_size == 0 || rank == 0 || top_k == 0) {
        throw Error("bad-parameter", "head_dim, group_size, rank and top_k must all be positive");
    }
    AttentionHeadConfig cfg;
    cfg.head_dim = head_dim;
    cfg.group_size = group_size;
    cfg.rank = rank;
    cfg.top_k = top_k;
    cfg.local_window = local_window;
    if (cfg.rank > head_dim) {
        if (warnings != nullptr) {
            warnings->push_back("rank " + std::to_string(rank) + " clamped to head_dim " +
                                std::to_string(head_dim));
        }
        cfg.rank = head_dim;
    }
    if (cfg.local_window > cfg.top_k) {
        if (warnings != nullptr) {
            warnings->push_back("local_window " + std::to_string(local_window) + " clamped to top_k " +
                                std::to_string(cfg.top_k));
        }
        cfg.local_window = cfg.top_k;
    }
    cfg.reallocate_mean = reallocate_mean.value_or(group_size == 1);
    return cfg;
}

AttentionOutput dense_attention(std::span<const double> query, const KVCacheHead& cache) {
    check_query(query, cache);
    const std::size_t seq_len = cache.size();
    const std::size_t head_dim = cache.head_dim();

    AttentionOutput out;
    const Vec64 scores =
        stable_softmax(full_logits(query, cache), std::sqrt(static_cast<double>(head_dim)));
    out.output = weighted_value_sum(cache, IndexList::full(seq_len), scores);
    out.ledger.charge_read(TransferCategory::KCols, static_cast<std::uint64_t>(seq_len) * head_dim);
    out.ledger.charge_read(TransferCategory::Values, static_cast<std::uint64_t>(seq_len) * head_dim);
    out.ledger.charge_write(TransferCategory::KvAppend, 2 * head_dim);
    return out;
}

ApproxScores approx_scores_with_components(std::span<const double> query, const KVCacheHead& cache,
                                           IndexList components, TransferLedger& ledger) {
    check_query(query, cache);
    const std::size_t seq_len = cache.size();
    const double head_dim = static_cast<double>(cache.head_dim());

    const double l1_all = l1_norm(query);
    const double l1_sel = l1_norm_at(query, components);
    const double temperature = l1_all > 0.0 ? std::sqrt(head_dim * (l1_sel / l1_all)) : std::sqrt(head_dim);

    // Accumulate q[c] * K_dim[c, :] over the selected components, ascending,
    // which matches a masked full-width dot product bit for bit.
    const MatView dim_major = cache.keys_dim_major();
    Vec64 logits(seq_len, 0.0);
    for (std::size_t c : components) {
        const double w = query[c];
        const auto row = dim_major.row(c);
        for (std::size_t p = 0; p < seq_len; ++p) {
            logits[p] += w * row[p];
        }
    }

    ApproxScores approx;
    approx.scores = stable_softmax(logits, temperature);
    approx.temperature = temperature;
    approx.components = std::move(components);
    const std::uint64_t read = static_cast<std::uint64_t>(approx.components.size()) * seq_len;
    ledger.charge_read(TransferCategory::KRows, read);
    if (!cache.dual_k_layout()) {
        ledger.noncontiguous_reads += read;
    }
    return approx;
}

ApproxScores sparq_step1(std::span<const double> query, const KVCacheHead& cache,
                         const AttentionHeadConfig& cfg, TransferLedger& ledger) {
    check_query(query, cache);
    Vec64 magnitudes(query.size());
    for (std::size_t c = 0; c < query.size(); ++c) {
        magnitudes[c] = std::abs(query[c]);
    }
    return approx_scores_with_components(query, cache,
                                         argtopk(magnitudes, std::min(cfg.rank, cache.head_dim())), ledger);
}

SparseSelection sparq_step2(const ApproxScores& approx, std::span<const double> query,
                            const KVCacheHead& cache, const AttentionHeadConfig& cfg,
                            TransferLedger& ledger) {
    check_query(query, cache);
    if (approx.scores.size() != cache.size()) {
        throw Error("shape-mismatch", "approximate scores were built for a different cache length");
    }
    return make_selection(approx.scores, query, cache, cfg.top_k, cfg.local_window, 1.0, ledger);
}

Vec64 sparq_step3(const SparseSelection& selection, const KVCacheHead& cache,
                  const AttentionHeadConfig& cfg, TransferLedger& ledger) {
    if (!selection.positions.empty() && selection.positions.back() >= cache.size()) {
        throw Error("index-out-of-range", "selection refers past the end of the cache");
    }
    Vec64 top = weighted_value_sum(cache, selection.positions, selection.exact_scores);
    charge_step3(cache, cfg.reallocate_mean, ledger);
    return blend_with_mean(std::move(top), selection.alpha, cache.value_mean(), cfg.reallocate_mean);
}

AttentionOutput sparq_attention(std::span<const double> query, const KVCacheHead& cache,
                                const AttentionHeadConfig& cfg) {
    AttentionOutput out;
    ApproxScores approx = sparq_step1(query, cache, cfg, out.ledger);
    SparseSelection selection = sparq_step2(approx, query, cache, cfg, out.ledger);
    out.output = sparq_step3(selection, cache, cfg, out.ledger);
    out.approx = std::move(approx);
    out.selection = std::move(selection);
    return out;
}

GroupAttentionResult sparq_attention_gqa(std::span<const Vec64> queries, const KVCacheHead& cache,
                                         const AttentionHeadConfig& cfg) {
    if (queries.empty()) {
        throw Error("bad-parameter", "grouped attention requires at least one query");
    }
    if (queries.size() != cfg.group_size) {
        throw Error("shape-mismatch", "got " + std::to_string(queries.size()) +
                                          " queries for group_size " + std::to_string(cfg.group_size));
    }
    for (const Vec64& q : queries) {
        check_query(q, cache);
    }
    const std::size_t group = queries.size();
    const std::size_t head_dim = cache.head_dim();
    const std::size_t seq_len = cache.size();

    GroupAttentionResult result;

    // Component selection from |q| summed across the group.
    Vec64 group_magnitudes(head_dim, 0.0);
    for (const Vec64& q : queries) {
        for (std::size_t c = 0; c < head_dim; ++c) {
            group_magnitudes[c] += std::abs(q[c]);
        }
    }
    const IndexList components = argtopk(group_magnitudes, std::min(cfg.rank, head_dim));

    // Per-query approximate scores (shared components, per-query temperature).
    // Component rows are fetched once for the whole group.
    std::vector<ApproxScores> approx;
    approx.reserve(group);
    for (std::size_t j = 0; j < group; ++j) {
        TransferLedger scratch;
        approx.push_back(approx_scores_with_components(queries[j], cache, components, scratch));
        if (j == 0) {
            result.ledger.merge(scratch);
        }
    }

    // Position selection from group-summed scores; the local mask scales with
    // the group size so it still dominates a sum of probability vectors.
    Vec64 group_scores(seq_len, 0.0);
    for (const ApproxScores& a : approx) {
        for (std::size_t p = 0; p < seq_len; ++p) {
            group_scores[p] += a.scores[p];
        }
    }
    const IndexList positions =
        select_positions(group_scores, cfg.top_k, cfg.local_window, static_cast<double>(group));
    result.ledger.charge_read(TransferCategory::KCols,
                              static_cast<std::uint64_t>(positions.size()) * head_dim);
    result.ledger.charge_read(TransferCategory::Values,
                              static_cast<std::uint64_t>(positions.size()) * head_dim);

    const double sqrt_dh = std::sqrt(static_cast<double>(head_dim));
    result.outputs.reserve(group);
    for (std::size_t j = 0; j < group; ++j) {
        AttentionOutput out;
        SparseSelection sel;
        sel.positions = positions;
        sel.alpha = score_mass(approx[j].scores, positions);
        sel.exact_scores = stable_softmax(gathered_logits(queries[j], cache, positions), sqrt_dh);
        Vec64 top = weighted_value_sum(cache, positions, sel.exact_scores);
        out.output = blend_with_mean(std::move(top), sel.alpha, cache.value_mean(), cfg.reallocate_mean);
        out.approx = approx[j];
        out.selection = std::move(sel);
        result.outputs.push_back(std::move(out));
    }
    charge_step3(cache, cfg.reallocate_mean, result.ledger);
    return result;
}

Vec64 topk_value_sum(std::span<const double> query, const KVCacheHead& cache, const IndexList& positions) {
    check_query(query, cache);
    const Vec64 scores =
        stable_softmax(full_logits(query, cache), std::sqrt(static_cast<double>(cache.head_dim())));
    Vec64 gathered(positions.size());
    for (std::size_t t = 0; t < positions.size(); ++t) {
        gathered[t] = scores[positions[t]];
    }
    return weighted_value_sum(cache, positions, gathered);
}

Vec64 topk_value_sum_mean_corrected(std::span<const double> query, const KVCacheHead& cache,
                                    const IndexList& positions) {
    check_query(query, cache);
    const Vec64 scores =
        stable_softmax(full_logits(query, cache), std::sqrt(static_cast<double>(cache.head_dim())));
    Vec64 gathered(positions.size());
    double mass = 0.0;
    for (std::size_t t = 0; t < positions.size(); ++t) {
        gathered[t] = scores[positions[t]];
        mass += gathered[t];
    }
    Vec64 out = weighted_value_sum(cache, positions, gathered);
    const Vec64& mean = cache.value_mean();
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] += (1.0 - mass) * mean[c];
    }
    return out;
}

Vec64 renormalized_topk_attention(std::span<const double> query, const KVCacheHead& cache,
                                  const IndexList& positions) {
    check_query(query, cache);
    const Vec64 scores = stable_softmax(gathered_logits(query, cache, positions),
                                        std::sqrt(static_cast<double>(cache.head_dim())));
    return weighted_value_sum(cache, positions, scores);
}

}  // namespace sparq
