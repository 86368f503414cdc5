// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

#include "sparq/attention.hpp"
#include "sparq/baselines.hpp"
#include "sparq/metrics.hpp"

namespace sparq {

namespace {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

double rel_l2_error(std::span<const double> actual, std::span<const double> reference) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - reference[i];
        num += d * d;
        den += reference[i] * reference[i];
    }
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::sqrt(num / den);
}

// Fraction of the true top-`budget` scoring positions the method selected.
double selection_agreement(std::span<const double> dense_scores, const IndexList& selected,
                           std::size_t budget) {
    const std::size_t k = std::min(budget, dense_scores.size());
    if (k == 0) {
        return 1.0;
    }
    const IndexList truth = argtopk(dense_scores, k);
    std::size_t hits = 0;
    for (std::size_t p : truth) {
        if (selected.contains(p)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

Vec64 dense_scores_for(std::span<const double> query, const KVCacheHead& cache) {
    return stable_softmax(matvec(cache.keys_seq_major(), query),
                          std::sqrt(static_cast<double>(cache.head_dim())));
}

std::size_t local_window_for(const SweepSpec& spec, std::size_t top_k) {
    return spec.local_rule == LocalRule::QuarterTopK ? top_k / 4 : spec.local_fixed;
}

struct CellResult {
    double agreement = 0.0;
    double rel_error = 0.0;
};

void check_cell(const TransferLedger& ledger, Method method, const TransferParams& params,
                std::size_t seq_len) {
    try {
        reconcile(ledger, analytic_transfers(method, params));
    } catch (const LedgerDivergence& e) {
        throw LedgerDivergence(std::string("sweep cell method=") + method_name(method) +
                               " S=" + std::to_string(seq_len) + " r=" +
                               std::to_string(params.rank.value_or(0)) + " k=" +
                               std::to_string(params.top_k.value_or(0)) + ": " + e.what());
    }
}

// Runs one trial of `method` on a fresh workload; returns per-query means.
CellResult run_trial(Method method, const SweepSpec& spec, std::size_t seq_len, std::size_t rank,
                     std::size_t top_k, std::uint64_t trial_seed) {
    const Workload workload =
        synth_workload(seq_len, spec.head_dim, spec.group_size, spec.tail, trial_seed);
    const std::size_t group = workload.queries.size();

    std::vector<Vec64> dense_outputs;
    std::vector<Vec64> dense_scores;
    dense_outputs.reserve(group);
    dense_scores.reserve(group);
    for (const Vec64& q : workload.queries) {
        dense_outputs.push_back(dense_attention(q, workload.cache).output);
        dense_scores.push_back(dense_scores_for(q, workload.cache));
    }

    TransferParams params;
    params.seq_len = seq_len;
    params.head_dim = spec.head_dim;

    CellResult result;
    switch (method) {
        case Method::Dense: {
            for (std::size_t j = 0; j < group; ++j) {
                AttentionOutput out = dense_attention(workload.queries[j], workload.cache);
                check_cell(out.ledger, method, params, seq_len);
                result.agreement += 1.0;
                result.rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
        case Method::Sparq: {
            params.rank = rank;
            params.top_k = top_k;
            const AttentionHeadConfig cfg =
                AttentionHeadConfig::make(spec.head_dim, spec.group_size, rank, top_k,
                                          local_window_for(spec, top_k), spec.reallocate_mean);
            params.reallocate_mean = cfg.reallocate_mean;
            GroupAttentionResult grouped = sparq_attention_gqa(workload.queries, workload.cache, cfg);
            check_cell(grouped.ledger, method, params, seq_len);
            for (std::size_t j = 0; j < group; ++j) {
                result.agreement += selection_agreement(
                    dense_scores[j], grouped.outputs[j].selection->positions, top_k);
                result.rel_error += rel_l2_error(grouped.outputs[j].output, dense_outputs[j]);
            }
            break;
        }
        case Method::H2O: {
            params.top_k = top_k;
            // Eviction depends on the whole stream: replay the sequence one
            // append at a time and score the final step.
            for (std::size_t j = 0; j < group; ++j) {
                KVCacheHead replay(spec.head_dim);
                H2OState state(top_k, top_k / 4);
                AttentionOutput out;
                const MatView keys = workload.cache.keys_seq_major();
                const MatView values = workload.cache.values();
                for (std::size_t p = 0; p < seq_len; ++p) {
                    replay.append(keys.row(p), values.row(p));
                    out = h2o_attention(workload.queries[j], state, replay);
                }
                check_cell(out.ledger, method, params, seq_len);
                result.agreement +=
                    selection_agreement(dense_scores[j], out.selection->positions, top_k);
                result.rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
        case Method::LmInfinite: {
            params.top_k = top_k;
            for (std::size_t j = 0; j < group; ++j) {
                AttentionOutput out = lm_infinite_attention(workload.queries[j], workload.cache, top_k);
                check_cell(out.ledger, method, params, seq_len);
                result.agreement +=
                    selection_agreement(dense_scores[j], out.selection->positions, top_k);
                result.rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
        case Method::FlexGen: {
            params.top_k = top_k;
            for (std::size_t j = 0; j < group; ++j) {
                AttentionOutput out = flexgen_attention(workload.queries[j], workload.cache, top_k);
                check_cell(out.ledger, method, params, seq_len);
                result.agreement +=
                    selection_agreement(dense_scores[j], out.selection->positions, top_k);
                result.rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
    }
    result.agreement /= static_cast<double>(group);
    result.rel_error /= static_cast<double>(group);
    return result;
}

SweepRow run_cell(Method method, const SweepSpec& spec, std::size_t seq_len, std::size_t rank,
                  std::size_t top_k) {
    SweepRow row;
    row.method = method_name(method);
    row.seq_len = seq_len;
    row.rank = rank;
    row.top_k = top_k;

    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t trial_seed =
            mix_seed(spec.seed, {static_cast<std::uint64_t>(method), seq_len, rank, top_k, trial});
        const CellResult r = run_trial(method, spec, seq_len, rank, top_k, trial_seed);
        row.mean_topk_agreement += r.agreement;
        row.output_rel_error_vs_dense += r.rel_error;
    }
    row.mean_topk_agreement /= static_cast<double>(spec.trials);
    row.output_rel_error_vs_dense /= static_cast<double>(spec.trials);

    TransferParams params;
    params.seq_len = seq_len;
    params.head_dim = spec.head_dim;
    if (method == Method::Sparq) {
        params.rank = rank;
        params.top_k = top_k;
        params.reallocate_mean = spec.reallocate_mean.value_or(spec.group_size == 1);
    } else if (method != Method::Dense) {
        params.top_k = top_k;
    }
    row.compression_ratio = compression_ratio(method, params);
    row.speedup_vs_dense = 1.0 / row.compression_ratio;
    return row;
}

}  // namespace

std::uint64_t sweep_spec_hash(const SweepSpec& spec) {
    // FNV-1a over a canonical serialization of every field.
    std::uint64_t hash = 0xcbf29ce484222325ull;
    const auto feed = [&hash](std::uint64_t value) {
        for (int i = 0; i < 8; ++i) {
            hash ^= (value >> (8 * i)) & 0xff;
            hash *= 0x100000001b3ull;
        }
    };
    feed(spec.methods.size());
    for (Method m : spec.methods) {
        feed(static_cast<std::uint64_t>(m));
    }
    feed(spec.seq_lens.size());
    for (std::size_t s : spec.seq_lens) {
        feed(s);
    }
    feed(spec.head_dim);
    feed(spec.group_size);
    feed(spec.ranks.size());
    for (std::size_t r : spec.ranks) {
        feed(r);
    }
    feed(spec.top_ks.size());
    for (std::size_t k : spec.top_ks) {
        feed(k);
    }
    feed(static_cast<std::uint64_t>(spec.local_rule));
    feed(spec.local_fixed);
    feed(spec.reallocate_mean.has_value() ? (*spec.reallocate_mean ? 2 : 1) : 0);
    feed(static_cast<std::uint64_t>(spec.tail));
    feed(spec.trials);
    feed(spec.seed);
    return hash;
}

SweepReport run_sweep(const SweepSpec& spec) {
    if (spec.methods.empty() || spec.seq_lens.empty() || spec.trials == 0) {
        throw Error("bad-parameter", "sweep needs at least one method, sequence length and trial");
    }
    if (spec.head_dim == 0 || spec.group_size == 0) {
        throw Error("bad-parameter", "head_dim and group_size must be positive");
    }
    for (std::size_t s : spec.seq_lens) {
        if (s == 0) {
            throw Error("bad-parameter", "sequence lengths must be positive");
        }
    }

    SweepReport report;
    report.spec_hash = sweep_spec_hash(spec);
    for (Method method : spec.methods) {
        for (std::size_t seq_len : spec.seq_lens) {
            if (method == Method::Dense) {
                report.rows.push_back(run_cell(method, spec, seq_len, 0, 0));
                continue;
            }
            for (std::size_t top_k : spec.top_ks) {
                if (method == Method::Sparq) {
                    for (std::size_t rank : spec.ranks) {
                        report.rows.push_back(run_cell(method, spec, seq_len, rank, top_k));
                    }
                } else {
                    report.rows.push_back(run_cell(method, spec, seq_len, 0, top_k));
                }
            }
        }
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.method, a.seq_len, a.rank, a.top_k) <
               std::tie(b.method, b.seq_len, b.rank, b.top_k);
    });
    return report;
}

std::string sweep_to_csv(const SweepReport& report) {
    std::string out = "# spec_hash=" + std::to_string(report.spec_hash) + "\n";
    out +=
        "method,seq_len,rank,top_k,compression_ratio,speedup_vs_dense,mean_topk_agreement,"
        "output_rel_error_vs_dense\n";
    for (const SweepRow& row : report.rows) {
        out += row.method;
        out += ',' + std::to_string(row.seq_len);
        out += ',' + std::to_string(row.rank);
        out += ',' + std::to_string(row.top_k);
        out += ',' + format_double(row.compression_ratio);
        out += ',' + format_double(row.speedup_vs_dense);
        out += ',' + format_double(row.mean_topk_agreement);
        out += ',' + format_double(row.output_rel_error_vs_dense);
        out += '\n';
    }
    return out;
}

std::string sweep_to_json(const SweepReport& report) {
    std::string out = "{\n  \"spec_hash\": " + std::to_string(report.spec_hash) + ",\n  \"rows\": [";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const SweepRow& row = report.rows[i];
        out += i == 0 ? "\n" : ",\n";
        out += "    {\"method\": \"" + row.method + "\"";
        out += ", \"seq_len\": " + std::to_string(row.seq_len);
        out += ", \"rank\": " + std::to_string(row.rank);
        out += ", \"top_k\": " + std::to_string(row.top_k);
        out += ", \"compression_ratio\": " + format_double(row.compression_ratio);
        out += ", \"speedup_vs_dense\": " + format_double(row.speedup_vs_dense);
        out += ", \"mean_topk_agreement\": " + format_double(row.mean_topk_agreement);
        out += ", \"output_rel_error_vs_dense\": " + format_double(row.output_rel_error_vs_dense);
        out += "}";
    }
    out += "\n  ]\n}\n";
    return out;
}

std::string sweep_to_table(const SweepReport& report) {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-12s %8s %6s %6s %12s %10s %10s %14s\n", "method", "seq_len",
                  "rank", "top_k", "compression", "speedup", "agreement", "rel_error");
    out += line;
    for (const SweepRow& row : report.rows) {
        std::snprintf(line, sizeof(line), "%-12s %8zu %6zu %6zu %12.4f %10.2f %10.4f %14.3e\n",
                      row.method.c_str(), row.seq_len, row.rank, row.top_k, row.compression_ratio,
                      row.speedup_vs_dense, row.mean_topk_agreement, row.output_rel_error_vs_dense);
        out += line;
    }
    out += "spec_hash: " + std::to_string(report.spec_hash) + "\n";
    return out;
}

namespace {

// Pulls q (rank 1 or 2), K and V (rank 2) out of a trace, checking shapes.
struct TraceWorkload {
    std::vector<Vec64> queries;
    KVCacheHead cache;
};

TraceWorkload workload_from_trace(const TraceFile& trace) {
    const TraceTensor* q = trace.find("q");
    const TraceTensor* k = trace.find("K");
    const TraceTensor* v = trace.find("V");
    if (q == nullptr || k == nullptr || v == nullptr) {
        throw Error("trace-shape-error", "trace must contain tensors named 'q', 'K' and 'V'");
    }
    if (k->dims.size() != 2 || v->dims.size() != 2 || k->dims != v->dims) {
        throw Error("trace-shape-error", "'K' and 'V' must both have shape [S, d_h]");
    }
    const std::size_t seq_len = k->dims[0];
    const std::size_t head_dim = k->dims[1];

    std::size_t group = 1;
    if (q->dims.size() == 2) {
        group = q->dims[0];
        if (q->dims[1] != head_dim) {
            throw Error("trace-shape-error", "'q' second dim must equal head_dim");
        }
    } else if (q->dims.size() != 1 || q->dims[0] != head_dim) {
        throw Error("trace-shape-error", "'q' must have shape [d_h] or [g, d_h]");
    }

    TraceWorkload workload{.queries = {}, .cache = KVCacheHead(head_dim)};
    for (std::size_t p = 0; p < seq_len; ++p) {
        workload.cache.append(std::span(k->data).subspan(p * head_dim, head_dim),
                              std::span(v->data).subspan(p * head_dim, head_dim));
    }
    for (std::size_t j = 0; j < group; ++j) {
        workload.queries.emplace_back(q->data.begin() + static_cast<std::ptrdiff_t>(j * head_dim),
                                      q->data.begin() + static_cast<std::ptrdiff_t>((j + 1) * head_dim));
    }
    return workload;
}

}  // namespace

SweepReport trace_eval(const TraceFile& trace, const TraceEvalParams& params) {
    TraceWorkload workload = workload_from_trace(trace);
    const std::size_t seq_len = workload.cache.size();
    const std::size_t head_dim = workload.cache.head_dim();
    const std::size_t group = workload.queries.size();
    if (seq_len == 0) {
        throw Error("trace-shape-error", "trace cache is empty");
    }

    SweepSpec cell_spec;
    cell_spec.head_dim = head_dim;
    cell_spec.group_size = group;
    cell_spec.reallocate_mean = params.reallocate_mean;
    cell_spec.local_rule = LocalRule::Fixed;
    cell_spec.local_fixed = params.local_window.value_or(params.top_k / 4);

    SweepRow row;
    row.method = method_name(params.method);
    row.seq_len = seq_len;
    row.rank = params.method == Method::Sparq ? params.rank : 0;
    row.top_k = params.method == Method::Dense ? 0 : params.top_k;

    std::vector<Vec64> dense_outputs;
    std::vector<Vec64> dense_scores;
    for (const Vec64& q : workload.queries) {
        dense_outputs.push_back(dense_attention(q, workload.cache).output);
        dense_scores.push_back(dense_scores_for(q, workload.cache));
    }

    TransferParams tp;
    tp.seq_len = seq_len;
    tp.head_dim = head_dim;

    double agreement = 0.0;
    double rel_error = 0.0;
    switch (params.method) {
        case Method::Dense: {
            for (std::size_t j = 0; j < group; ++j) {
                AttentionOutput out = dense_attention(workload.queries[j], workload.cache);
                reconcile(out.ledger, analytic_transfers(Method::Dense, tp));
                agreement += 1.0;
                rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
        case Method::Sparq: {
            tp.rank = params.rank;
            tp.top_k = params.top_k;
            const AttentionHeadConfig cfg =
                AttentionHeadConfig::make(head_dim, group, params.rank, params.top_k,
                                          cell_spec.local_fixed, params.reallocate_mean);
            tp.reallocate_mean = cfg.reallocate_mean;
            GroupAttentionResult grouped = sparq_attention_gqa(workload.queries, workload.cache, cfg);
            reconcile(grouped.ledger, analytic_transfers(Method::Sparq, tp));
            for (std::size_t j = 0; j < group; ++j) {
                agreement += selection_agreement(dense_scores[j],
                                                 grouped.outputs[j].selection->positions, params.top_k);
                rel_error += rel_l2_error(grouped.outputs[j].output, dense_outputs[j]);
            }
            break;
        }
        case Method::H2O: {
            tp.top_k = params.top_k;
            for (std::size_t j = 0; j < group; ++j) {
                KVCacheHead replay(head_dim);
                H2OState state(params.top_k, params.local_window.value_or(params.top_k / 4));
                AttentionOutput out;
                const MatView keys = workload.cache.keys_seq_major();
                const MatView values = workload.cache.values();
                for (std::size_t p = 0; p < seq_len; ++p) {
                    replay.append(keys.row(p), values.row(p));
                    out = h2o_attention(workload.queries[j], state, replay);
                }
                reconcile(out.ledger, analytic_transfers(Method::H2O, tp));
                agreement += selection_agreement(dense_scores[j], out.selection->positions, params.top_k);
                rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
        case Method::LmInfinite: {
            tp.top_k = params.top_k;
            for (std::size_t j = 0; j < group; ++j) {
                AttentionOutput out =
                    lm_infinite_attention(workload.queries[j], workload.cache, params.top_k);
                reconcile(out.ledger, analytic_transfers(Method::LmInfinite, tp));
                agreement += selection_agreement(dense_scores[j], out.selection->positions, params.top_k);
                rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
        case Method::FlexGen: {
            tp.top_k = params.top_k;
            for (std::size_t j = 0; j < group; ++j) {
                AttentionOutput out = flexgen_attention(workload.queries[j], workload.cache, params.top_k);
                reconcile(out.ledger, analytic_transfers(Method::FlexGen, tp));
                agreement += selection_agreement(dense_scores[j], out.selection->positions, params.top_k);
                rel_error += rel_l2_error(out.output, dense_outputs[j]);
            }
            break;
        }
    }
    row.mean_topk_agreement = agreement / static_cast<double>(group);
    row.output_rel_error_vs_dense = rel_error / static_cast<double>(group);
    row.compression_ratio = compression_ratio(params.method, tp);
    row.speedup_vs_dense = 1.0 / row.compression_ratio;

    SweepReport report;
    report.spec_hash = 0;
    report.rows.push_back(std::move(row));
    return report;
}

TraceFile workload_to_trace(const Workload& workload, TraceDtype dtype) {
    const std::size_t head_dim = workload.cache.head_dim();
    const std::size_t seq_len = workload.cache.size();
    const std::size_t group = workload.queries.size();

    TraceFile trace;
    if (group > 0) {  // a bare cache head serializes without a query tensor
        TraceTensor q;
        q.name = "q";
        q.dtype = dtype;
        if (group == 1) {
            q.dims = {head_dim};
            q.data = workload.queries[0];
        } else {
            q.dims = {group, head_dim};
            for (const Vec64& query : workload.queries) {
                q.data.insert(q.data.end(), query.begin(), query.end());
            }
        }
        trace.tensors.push_back(std::move(q));
    }

    const auto pack = [&](const char* name, const MatView& m) {
        TraceTensor t;
        t.name = name;
        t.dtype = dtype;
        t.dims = {seq_len, head_dim};
        t.data.reserve(seq_len * head_dim);
        for (std::size_t p = 0; p < seq_len; ++p) {
            const auto row = m.row(p);
            t.data.insert(t.data.end(), row.begin(), row.end());
        }
        trace.tensors.push_back(std::move(t));
    };
    pack("K", workload.cache.keys_seq_major());
    pack("V", workload.cache.values());
    return trace;
}

namespace {

// One trial of the agreement comparison: the same approximate-score machinery
// run with top-|q|, random-r and first-r component selections.
void accumulate_agreement(const Vec64& query, const KVCacheHead& cache, std::size_t top_k,
                          Rng& selector_rng, std::vector<AgreementRow>& rows) {
    const std::size_t head_dim = cache.head_dim();
    const Vec64 truth = dense_scores_for(query, cache);
    const std::size_t agreement_k = std::min(top_k, cache.size());

    for (AgreementRow& row : rows) {
        const std::size_t rank = row.rank;

        Vec64 magnitudes(query.size());
        for (std::size_t c = 0; c < query.size(); ++c) {
            magnitudes[c] = std::abs(query[c]);
        }
        TransferLedger scratch;
        const ApproxScores top =
            approx_scores_with_components(query, cache, argtopk(magnitudes, rank), scratch);
        row.mean_agreement_top += topk_agreement(truth, top.scores, agreement_k);

        // Random r components, sampled without replacement.
        std::vector<std::size_t> pool(head_dim);
        for (std::size_t c = 0; c < head_dim; ++c) {
            pool[c] = c;
        }
        for (std::size_t c = 0; c < rank; ++c) {
            std::swap(pool[c], pool[c + selector_rng.index(head_dim - c)]);
        }
        std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(rank));
        std::sort(chosen.begin(), chosen.end());
        const ApproxScores random = approx_scores_with_components(
            query, cache, IndexList(std::move(chosen), head_dim), scratch);
        row.mean_agreement_random += topk_agreement(truth, random.scores, agreement_k);

        std::vector<std::size_t> first(rank);
        for (std::size_t c = 0; c < rank; ++c) {
            first[c] = c;
        }
        const ApproxScores leading = approx_scores_with_components(
            query, cache, IndexList(std::move(first), head_dim), scratch);
        row.mean_agreement_first += topk_agreement(truth, leading.scores, agreement_k);
    }
}

void finalize_agreement(AgreementStudy& study, std::size_t trials, const Vec64& pooled_queries) {
    const double n = static_cast<double>(trials);
    for (AgreementRow& row : study.rows) {
        row.mean_agreement_top /= n;
        row.mean_agreement_random /= n;
        row.mean_agreement_first /= n;
    }
    study.query_kurtosis = fisher_kurtosis(pooled_queries);
}

}  // namespace

AgreementStudy run_agreement_study(const AgreementStudySpec& spec) {
    if (spec.ranks.empty() || spec.trials == 0) {
        throw Error("bad-parameter", "agreement study needs ranks and trials");
    }
    AgreementStudy study;
    study.rows.resize(spec.ranks.size());
    for (std::size_t i = 0; i < spec.ranks.size(); ++i) {
        study.rows[i].rank = std::min(spec.ranks[i], spec.head_dim);
    }

    Vec64 pooled_queries;
    pooled_queries.reserve(spec.trials * spec.head_dim);
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t seed = mix_seed(spec.seed, {0x5eedu, trial});
        const Workload workload = synth_workload(spec.seq_len, spec.head_dim, 1, spec.tail, seed);
        const Vec64& query = workload.queries[0];
        pooled_queries.insert(pooled_queries.end(), query.begin(), query.end());

        Rng selector_rng(mix_seed(spec.seed, {0xba5eu, trial}));
        accumulate_agreement(query, workload.cache, spec.top_k, selector_rng, study.rows);
    }
    finalize_agreement(study, spec.trials, pooled_queries);
    return study;
}

AgreementStudy run_agreement_study(const TraceFile& trace, const std::vector<std::size_t>& ranks,
                                   std::size_t top_k, std::uint64_t seed) {
    if (ranks.empty()) {
        throw Error("bad-parameter", "agreement study needs ranks");
    }
    TraceWorkload workload = workload_from_trace(trace);
    const std::size_t head_dim = workload.cache.head_dim();

    AgreementStudy study;
    study.rows.resize(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        study.rows[i].rank = std::min(ranks[i], head_dim);
    }

    Vec64 pooled_queries;
    for (std::size_t j = 0; j < workload.queries.size(); ++j) {
        const Vec64& query = workload.queries[j];
        pooled_queries.insert(pooled_queries.end(), query.begin(), query.end());
        Rng selector_rng(mix_seed(seed, {0xba5eu, j}));
        accumulate_agreement(query, workload.cache, top_k, selector_rng, study.rows);
    }
    finalize_agreement(study, workload.queries.size(), pooled_queries);
    return study;
}

}  // namespace sparq
