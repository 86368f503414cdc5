// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <thread>

#include "oracles.hpp"
#include "sparq/attention.hpp"
#include "sparq/metrics.hpp"
#include "test_util.hpp"

using namespace sparq;
using test_util::Instance;
using test_util::random_instance;

namespace {

AttentionHeadConfig make_cfg(std::size_t head_dim, std::size_t rank, std::size_t top_k,
                             std::size_t local_window, std::optional<bool> realloc = std::nullopt,
                             std::size_t group = 1) {
    return AttentionHeadConfig::make(head_dim, group, rank, top_k, local_window, realloc);
}

}  // namespace

TEST_CASE("config: normalization and defaults") {
    std::vector<std::string> warnings;
    const AttentionHeadConfig cfg = AttentionHeadConfig::make(16, 1, 99, 8, 12, std::nullopt, &warnings);
    CHECK(cfg.rank == 16);
    CHECK(cfg.local_window == 8);
    CHECK(cfg.reallocate_mean);
    REQUIRE(warnings.size() == 2);

    CHECK_FALSE(AttentionHeadConfig::make(16, 4, 4, 8, 0).reallocate_mean);
    CHECK(AttentionHeadConfig::make(16, 4, 4, 8, 0, true).reallocate_mean);
    CHECK_THROWS_WITH_AS(AttentionHeadConfig::make(0, 1, 1, 1, 0), doctest::Contains("bad-parameter"),
                         Error);
    CHECK_THROWS_WITH_AS(AttentionHeadConfig::make(8, 1, 0, 1, 0), doctest::Contains("bad-parameter"),
                         Error);
}

TEST_CASE("dense: single position returns that value row exactly") {
    KVCacheHead cache(4);
    cache.append(Vec64{1, 2, 3, 4}, Vec64{-1.5, 0.25, 7.0, 2.0});
    const AttentionOutput out = dense_attention(Vec64{0.3, -0.2, 0.9, 1.1}, cache);
    CHECK(out.output == Vec64{-1.5, 0.25, 7.0, 2.0});
}

TEST_CASE("dense: zero query averages the values") {
    Instance inst = random_instance(12, 6, 1, TailKind::Gaussian, 31);
    const AttentionOutput out = dense_attention(Vec64(6, 0.0), inst.cache);
    for (std::size_t c = 0; c < 6; ++c) {
        CHECK(out.output[c] == doctest::Approx(inst.cache.value_mean()[c]).epsilon(1e-12));
    }
}

TEST_CASE("dense: matches the two-loop oracle") {
    Instance inst = random_instance(16, 8, 1, TailKind::Gaussian, 41);
    const AttentionOutput out = dense_attention(inst.queries[0], inst.cache);
    const oracle::Vec expect = oracle::dense_attention(inst.queries[0], inst.k_rows, inst.v_rows, 16, 8);
    CHECK(test_util::rel_l2(out.output, expect) < 1e-12);
}

TEST_CASE("dense: ledger and errors") {
    Instance inst = random_instance(8, 4, 1, TailKind::Gaussian, 43);
    const AttentionOutput out = dense_attention(inst.queries[0], inst.cache);
    CHECK(out.ledger.reads() == 2 * 8 * 4);
    CHECK(out.ledger.writes() == 2 * 4);

    KVCacheHead empty(4);
    CHECK_THROWS_WITH_AS(dense_attention(Vec64(4, 0.0), empty), doctest::Contains("empty-cache"), Error);
    CHECK_THROWS_WITH_AS(dense_attention(Vec64(3, 0.0), inst.cache), doctest::Contains("shape-mismatch"),
                         Error);
}

TEST_CASE("step 1: full rank reproduces dense scores and temperature exactly") {
    Instance inst = random_instance(24, 8, 1, TailKind::Gaussian, 53);
    TransferLedger ledger;
    const ApproxScores approx =
        sparq_step1(inst.queries[0], inst.cache, make_cfg(8, 8, 4, 0), ledger);
    CHECK(approx.temperature == std::sqrt(8.0));
    const Vec64 dense_scores =
        stable_softmax(matvec(inst.cache.keys_seq_major(), inst.queries[0]), std::sqrt(8.0));
    REQUIRE(approx.scores.size() == dense_scores.size());
    for (std::size_t p = 0; p < dense_scores.size(); ++p) {
        CHECK(approx.scores[p] == dense_scores[p]);
    }
    CHECK(ledger.reads(TransferCategory::KRows) == 8 * 24);
}

TEST_CASE("step 1: uniform-magnitude query gives the rank-based temperature") {
    const std::size_t head_dim = 128;
    const std::size_t rank = 32;
    Rng rng(61);
    KVCacheHead cache(head_dim);
    Vec64 row(head_dim);
    for (std::size_t c = 0; c < head_dim; ++c) {
        row[c] = rng.normal();
    }
    cache.append(row, row);
    Vec64 q(head_dim);
    for (std::size_t c = 0; c < head_dim; ++c) {
        q[c] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * 0.37;
    }
    TransferLedger ledger;
    const ApproxScores approx = sparq_step1(q, cache, make_cfg(head_dim, rank, 1, 0), ledger);
    CHECK(approx.temperature == doctest::Approx(std::sqrt(32.0)).epsilon(1e-12));
}

TEST_CASE("step 1: temperature is sqrt(d) when exactly rank components are nonzero") {
    const std::size_t head_dim = 16;
    const std::size_t rank = 4;
    Rng rng(67);
    KVCacheHead cache(head_dim);
    Vec64 row(head_dim, 0.5);
    cache.append(row, row);
    Vec64 q(head_dim, 0.0);
    for (std::size_t c : {1u, 5u, 9u, 13u}) {
        q[c] = rng.normal() + 2.0;
    }
    TransferLedger ledger;
    const ApproxScores approx = sparq_step1(q, cache, make_cfg(head_dim, rank, 1, 0), ledger);
    CHECK(approx.temperature == std::sqrt(16.0));
}

TEST_CASE("step 1: zero query falls back to sqrt(d) and uniform scores") {
    Instance inst = random_instance(10, 8, 1, TailKind::Gaussian, 71);
    TransferLedger ledger;
    const ApproxScores approx = sparq_step1(Vec64(8, 0.0), inst.cache, make_cfg(8, 4, 2, 0), ledger);
    CHECK(approx.temperature == std::sqrt(8.0));
    for (double s : approx.scores) {
        CHECK(s == doctest::Approx(0.1).epsilon(1e-12));
    }
}

TEST_CASE("step 1: matches the mask-materializing oracle") {
    Instance inst = random_instance(32, 16, 1, TailKind::Heavy, 73);
    const std::size_t rank = 4;
    TransferLedger ledger;
    const ApproxScores approx =
        sparq_step1(inst.queries[0], inst.cache, make_cfg(16, rank, 8, 0), ledger);

    std::vector<bool> component_mask(16, false);
    for (std::size_t c : approx.components) {
        component_mask[c] = true;
    }
    const oracle::Vec expect = oracle::masked_component_scores(inst.queries[0], inst.k_rows, 32, 16,
                                                               component_mask, approx.temperature);
    for (std::size_t p = 0; p < 32; ++p) {
        CHECK(approx.scores[p] == doctest::Approx(expect[p]).epsilon(1e-12));
    }
}

TEST_CASE("step 2: full budget selects everything with unit mass") {
    Instance inst = random_instance(12, 8, 1, TailKind::Gaussian, 79);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 64, 0);
    TransferLedger ledger;
    const ApproxScores approx = sparq_step1(inst.queries[0], inst.cache, cfg, ledger);
    const SparseSelection sel = sparq_step2(approx, inst.queries[0], inst.cache, cfg, ledger);
    CHECK(sel.positions.size() == 12);
    CHECK(sel.alpha == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step 2: local window dominates any score") {
    Instance inst = random_instance(20, 8, 1, TailKind::Heavy, 83);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 6, 6);
    TransferLedger ledger;
    const ApproxScores approx = sparq_step1(inst.queries[0], inst.cache, cfg, ledger);
    const SparseSelection sel = sparq_step2(approx, inst.queries[0], inst.cache, cfg, ledger);
    CHECK(sel.positions.indices() == std::vector<std::size_t>{14, 15, 16, 17, 18, 19});
}

TEST_CASE("step 2: matches the enumeration oracle") {
    Instance inst = random_instance(64, 8, 1, TailKind::Heavy, 89);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 8, 2);
    TransferLedger ledger;
    const ApproxScores approx = sparq_step1(inst.queries[0], inst.cache, cfg, ledger);
    const SparseSelection sel = sparq_step2(approx, inst.queries[0], inst.cache, cfg, ledger);

    // Last two positions forced, then the best six of the rest.
    std::vector<std::size_t> expect = {62, 63};
    Vec64 rest = approx.scores;
    rest[62] = rest[63] = -1.0;
    const std::vector<std::size_t> top6 = oracle::topk_by_sort(rest, 6);
    expect.insert(expect.begin(), top6.begin(), top6.end());
    std::sort(expect.begin(), expect.end());
    CHECK(sel.positions.indices() == expect);

    double alpha = 0.0;
    for (std::size_t p : sel.positions) {
        alpha += approx.scores[p];
    }
    CHECK(sel.alpha == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(ledger.reads(TransferCategory::KCols) == 8 * 8);
    CHECK(ledger.reads(TransferCategory::Values) == 8 * 8);
}

TEST_CASE("step 3: exact limit equals dense attention") {
    Instance inst = random_instance(32, 8, 1, TailKind::Gaussian, 97);
    const AttentionHeadConfig cfg = make_cfg(8, 8, 32, 0, true);
    const AttentionOutput sparse = sparq_attention(inst.queries[0], inst.cache, cfg);
    const AttentionOutput dense = dense_attention(inst.queries[0], inst.cache);
    CHECK(test_util::rel_l2(sparse.output, dense.output) < 1e-9);
}

TEST_CASE("step 3: zero mass reduces to the mean value vector") {
    Instance inst = random_instance(6, 4, 1, TailKind::Gaussian, 101);
    SparseSelection sel;
    sel.positions = IndexList({0, 2}, 6);
    sel.alpha = 0.0;
    sel.exact_scores = Vec64{0.5, 0.5};
    TransferLedger ledger;
    const Vec64 y = sparq_step3(sel, inst.cache, make_cfg(4, 2, 2, 0, true), ledger);
    CHECK(y == inst.cache.value_mean());
}

TEST_CASE("pipeline matches the monolithic transcription") {
    Rng shapes(103);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t seq_len = 1 + shapes.index(32);
        const std::size_t head_dim = 1 + shapes.index(8);
        const std::size_t rank = 1 + shapes.index(head_dim);
        const std::size_t top_k = 1 + shapes.index(seq_len + 2);
        const std::size_t local = shapes.index(top_k + 1);
        const bool realloc = shapes.uniform() < 0.5;
        Instance inst = random_instance(seq_len, head_dim, 1, TailKind::Heavy, 1000 + trial);

        const AttentionHeadConfig cfg = make_cfg(head_dim, rank, top_k, local, realloc);
        const AttentionOutput out = sparq_attention(inst.queries[0], inst.cache, cfg);
        const oracle::Vec expect =
            oracle::sparq_monolithic(inst.queries[0], inst.k_rows, inst.v_rows, inst.cache.value_mean(),
                                     seq_len, head_dim, rank, top_k, local, realloc);
        REQUIRE(test_util::rel_l2(out.output, expect) < 1e-12);
    }
}

TEST_CASE("sparq ledger matches the closed form across random shapes") {
    Rng shapes(107);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t seq_len = 1 + shapes.index(48);
        const std::size_t head_dim = 1 + shapes.index(16);
        const std::size_t rank = 1 + shapes.index(head_dim);
        const std::size_t top_k = 1 + shapes.index(seq_len);
        const bool realloc = shapes.uniform() < 0.5;
        Instance inst = random_instance(seq_len, head_dim, 1, TailKind::Gaussian, 2000 + trial);

        const AttentionHeadConfig cfg = make_cfg(head_dim, rank, top_k, top_k / 4, realloc);
        const AttentionOutput out = sparq_attention(inst.queries[0], inst.cache, cfg);
        const std::uint64_t expect = static_cast<std::uint64_t>(seq_len) * rank +
                                     2 * static_cast<std::uint64_t>(top_k) * head_dim +
                                     (realloc ? 4 : 2) * static_cast<std::uint64_t>(head_dim);
        REQUIRE(out.ledger.reconcilable_total() == expect);
    }
}

TEST_CASE("selection is invariant to positive query scaling") {
    // The coverage temperature is scale-free, so scaling q by c sharpens the
    // approximate scores without reordering them. Scales stay moderate: an
    // extreme c underflows tail scores to exactly zero, and the resulting
    // ties resolve by index instead of by score.
    for (const double scale : {0.5, 2.0, 8.0, 3.7}) {
        Instance inst = random_instance(40, 16, 1, TailKind::Heavy, 109);
        const AttentionHeadConfig cfg = make_cfg(16, 4, 8, 2);
        const AttentionOutput base = sparq_attention(inst.queries[0], inst.cache, cfg);
        Vec64 scaled = inst.queries[0];
        for (double& v : scaled) {
            v *= scale;
        }
        const AttentionOutput out = sparq_attention(scaled, inst.cache, cfg);
        CHECK(out.approx->components.indices() == base.approx->components.indices());
        CHECK(out.selection->positions.indices() == base.selection->positions.indices());
    }
}

TEST_CASE("alpha stays within [0, 1] and the local window is always selected") {
    Rng shapes(113);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t seq_len = 1 + shapes.index(40);
        const std::size_t head_dim = 1 + shapes.index(12);
        const std::size_t rank = 1 + shapes.index(head_dim);
        const std::size_t top_k = 1 + shapes.index(seq_len + 3);
        const std::size_t local = shapes.index(top_k + 1);
        Instance inst = random_instance(seq_len, head_dim, 1, TailKind::Heavy, 3000 + trial);

        const AttentionHeadConfig cfg = make_cfg(head_dim, rank, top_k, local);
        const AttentionOutput out = sparq_attention(inst.queries[0], inst.cache, cfg);
        REQUIRE(out.selection->alpha >= 0.0);
        REQUIRE(out.selection->alpha <= 1.0 + 1e-12);
        if (top_k >= seq_len) {
            REQUIRE(out.selection->alpha == doctest::Approx(1.0).epsilon(1e-12));
        }
        const std::size_t effective_local = std::min({local, top_k, seq_len});
        for (std::size_t p = seq_len - effective_local; p < seq_len; ++p) {
            REQUIRE(out.selection->positions.contains(p));
        }
    }
}

TEST_CASE("agreement with true scores rises with rank and hits 1 at full rank") {
    const std::size_t head_dim = 16;
    const std::size_t seq_len = 96;
    const std::size_t top_k = 8;
    const std::vector<std::size_t> ranks = {2, 4, 8, 16};
    std::vector<double> means(ranks.size(), 0.0);
    for (int trial = 0; trial < 200; ++trial) {
        Instance inst = random_instance(seq_len, head_dim, 1, TailKind::Heavy, 4000 + trial);
        const Vec64 truth = stable_softmax(matvec(inst.cache.keys_seq_major(), inst.queries[0]),
                                           std::sqrt(static_cast<double>(head_dim)));
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            TransferLedger ledger;
            const ApproxScores approx =
                sparq_step1(inst.queries[0], inst.cache, make_cfg(head_dim, ranks[i], top_k, 0), ledger);
            means[i] += topk_agreement(truth, approx.scores, top_k);
        }
    }
    for (std::size_t i = 1; i < means.size(); ++i) {
        CHECK(means[i] >= means[i - 1]);
    }
    CHECK(means.back() == doctest::Approx(200.0));
}

TEST_CASE("single-K-layout mode reports its component reads as non-contiguous") {
    Instance inst = random_instance(16, 8, 1, TailKind::Heavy, 125);
    KVCacheHead single(8, /*dual_k_layout=*/false);
    const MatView keys = inst.cache.keys_seq_major();
    const MatView values = inst.cache.values();
    for (std::size_t p = 0; p < 16; ++p) {
        single.append(keys.row(p), values.row(p));
    }
    const AttentionHeadConfig cfg = make_cfg(8, 4, 8, 2);
    const AttentionOutput dual_out = sparq_attention(inst.queries[0], inst.cache, cfg);
    const AttentionOutput single_out = sparq_attention(inst.queries[0], single, cfg);
    // Numerics are layout-invariant; only the reported statistics move.
    CHECK(single_out.output == dual_out.output);
    CHECK(dual_out.ledger.noncontiguous_reads == 0);
    CHECK(single_out.ledger.noncontiguous_reads == 4 * 16);
    CHECK(single_out.ledger.reconcilable_total() == dual_out.ledger.reconcilable_total());
}

TEST_CASE("grouped: single group equals the single-query path") {
    Instance inst = random_instance(24, 8, 1, TailKind::Heavy, 127);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 8, 2);
    const AttentionOutput single = sparq_attention(inst.queries[0], inst.cache, cfg);
    const GroupAttentionResult grouped = sparq_attention_gqa(inst.queries, inst.cache, cfg);
    REQUIRE(grouped.outputs.size() == 1);
    CHECK(grouped.outputs[0].output == single.output);
    CHECK(grouped.ledger.reconcilable_total() == single.ledger.reconcilable_total());
    CHECK(grouped.ledger.reads() == single.ledger.reads());
    CHECK(grouped.ledger.writes() == single.ledger.writes());
}

TEST_CASE("grouped: duplicated query preserves the selections") {
    Instance inst = random_instance(24, 8, 1, TailKind::Heavy, 131);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 8, 2, false);
    const AttentionOutput single = sparq_attention(inst.queries[0], inst.cache, cfg);
    const std::vector<Vec64> duplicated = {inst.queries[0], inst.queries[0]};
    const AttentionHeadConfig pair_cfg = make_cfg(8, 4, 8, 2, false, 2);
    const GroupAttentionResult grouped = sparq_attention_gqa(duplicated, inst.cache, pair_cfg);
    CHECK(grouped.outputs[0].approx->components.indices() == single.approx->components.indices());
    CHECK(grouped.outputs[0].selection->positions.indices() == single.selection->positions.indices());

    CHECK_THROWS_WITH_AS(sparq_attention_gqa(duplicated, inst.cache, cfg),
                         doctest::Contains("shape-mismatch"), Error);
}

TEST_CASE("grouped: matches the group oracle") {
    Instance inst = random_instance(32, 8, 4, TailKind::Heavy, 137);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 8, 2, std::nullopt, 4);
    REQUIRE_FALSE(cfg.reallocate_mean);
    const GroupAttentionResult grouped = sparq_attention_gqa(inst.queries, inst.cache, cfg);
    const std::vector<oracle::Vec> expect = oracle::sparq_group_monolithic(
        {inst.queries.begin(), inst.queries.end()}, inst.k_rows, inst.v_rows, inst.cache.value_mean(),
        32, 8, 4, 8, 2, false);
    for (std::size_t j = 0; j < 4; ++j) {
        REQUIRE(test_util::rel_l2(grouped.outputs[j].output, expect[j]) < 1e-12);
    }

    // Fetches once per KV head regardless of the group size.
    const std::uint64_t expected_ledger = 32 * 4 + 2 * 8 * 8 + 2 * 8;
    CHECK(grouped.ledger.reconcilable_total() == expected_ledger);
}

TEST_CASE("concurrent readers over one cache agree with the serial result") {
    Instance inst = random_instance(64, 16, 1, TailKind::Heavy, 211);
    const AttentionHeadConfig cfg = make_cfg(16, 4, 16, 4);
    const AttentionOutput serial = sparq_attention(inst.queries[0], inst.cache, cfg);

    std::vector<Vec64> results(8);
    std::vector<std::thread> readers;
    for (std::size_t t = 0; t < results.size(); ++t) {
        readers.emplace_back([&, t] {
            results[t] = sparq_attention(inst.queries[0], inst.cache, cfg).output;
        });
    }
    for (std::thread& r : readers) {
        r.join();
    }
    for (const Vec64& r : results) {
        CHECK(r == serial.output);
    }
}

TEST_CASE("ledgers merge associatively") {
    Instance inst = random_instance(24, 8, 1, TailKind::Gaussian, 213);
    const AttentionHeadConfig cfg = make_cfg(8, 4, 8, 2);
    const TransferLedger a = dense_attention(inst.queries[0], inst.cache).ledger;
    const TransferLedger b = sparq_attention(inst.queries[0], inst.cache, cfg).ledger;
    const TransferLedger c = sparq_attention(inst.queries[0], inst.cache, cfg).ledger;

    TransferLedger left = a;
    left.merge(b);
    left.merge(c);
    TransferLedger bc = b;
    bc.merge(c);
    TransferLedger right = a;
    right.merge(bc);
    for (std::size_t i = 0; i < kTransferCategoryCount; ++i) {
        const auto category = static_cast<TransferCategory>(i);
        CHECK(left.reads(category) == right.reads(category));
        CHECK(left.writes(category) == right.writes(category));
    }
    CHECK(left.total() == a.total() + b.total() + c.total());
}

TEST_CASE("approximation chain: full mask collapses each stage") {
    Instance inst = random_instance(16, 8, 1, TailKind::Gaussian, 139);
    const IndexList all = IndexList::full(16);
    const Vec64 dense = dense_attention(inst.queries[0], inst.cache).output;

    const Vec64 y1 = topk_value_sum(inst.queries[0], inst.cache, all);
    CHECK(test_util::max_abs_diff(y1, dense) == 0.0);

    const Vec64 y2 = topk_value_sum_mean_corrected(inst.queries[0], inst.cache, all);
    CHECK(test_util::max_abs_diff(y2, y1) < 1e-14);

    const Vec64 y3 = renormalized_topk_attention(inst.queries[0], inst.cache, all);
    CHECK(test_util::rel_l2(y3, dense) < 1e-12);
}

TEST_CASE("approximation chain: matches the materialized-mask oracles") {
    Instance inst = random_instance(24, 8, 1, TailKind::Heavy, 149);
    Rng rng(151);
    std::vector<std::size_t> keep;
    std::vector<bool> mask(24, false);
    for (std::size_t p = 0; p < 24; ++p) {
        if (rng.uniform() < 0.4) {
            keep.push_back(p);
            mask[p] = true;
        }
    }
    if (keep.empty()) {
        keep.push_back(7);
        mask[7] = true;
    }
    const IndexList positions(keep, 24);

    const Vec64 y1 = topk_value_sum(inst.queries[0], inst.cache, positions);
    CHECK(test_util::rel_l2(y1, oracle::masked_value_sum(inst.queries[0], inst.k_rows, inst.v_rows, 24,
                                                         8, mask)) < 1e-12);

    const Vec64 y2 = topk_value_sum_mean_corrected(inst.queries[0], inst.cache, positions);
    CHECK(test_util::rel_l2(y2, oracle::masked_value_sum_corrected(inst.queries[0], inst.k_rows,
                                                                   inst.v_rows, inst.cache.value_mean(),
                                                                   24, 8, mask)) < 1e-12);

    const Vec64 y3 = renormalized_topk_attention(inst.queries[0], inst.cache, positions);
    CHECK(test_util::rel_l2(y3, oracle::masked_renorm_attention(inst.queries[0], inst.k_rows,
                                                                inst.v_rows, 24, 8, mask, 1e-300)) <
          1e-12);
}
