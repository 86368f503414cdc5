// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparq/cost_model.hpp"
#include "sparq/trace_io.hpp"
#include "sparq/workload.hpp"

namespace sparq {

enum class LocalRule { Fixed, QuarterTopK };

// A benchmark sweep: methods crossed with sequence lengths and budget grids
// over seeded synthetic workloads. Default grids follow the standard recipe
// of tuning the rank at a fixed number of fetched values.
struct SweepSpec {
    std::vector<Method> methods{Method::Sparq};
    std::vector<std::size_t> seq_lens{512};
    std::size_t head_dim = 64;
    std::size_t group_size = 1;
    std::vector<std::size_t> ranks{8, 16, 32, 64};     // sparq only
    std::vector<std::size_t> top_ks{128};
    LocalRule local_rule = LocalRule::QuarterTopK;     // l = k/4
    std::size_t local_fixed = 0;                       // used with LocalRule::Fixed
    std::optional<bool> reallocate_mean;               // default: on for g == 1
    TailKind tail = TailKind::Heavy;
    std::size_t trials = 10;
    std::uint64_t seed = 42;
};

// Stable fingerprint of every spec field; reports carry it so rows can be
// traced back to the exact configuration that produced them.
std::uint64_t sweep_spec_hash(const SweepSpec& spec);

// One report row. rank is 0 for methods that have no rank parameter, top_k 0
// for dense. mean_topk_agreement is the fraction of the true top-k scoring
// positions (k = the method's position budget) present in the method's
// selected set, averaged over trials and queries; output_rel_error_vs_dense
// is the mean relative L2 error of the attention output against the dense
// reference.
struct SweepRow {
    std::string method;
    std::size_t seq_len = 0;
    std::size_t rank = 0;
    std::size_t top_k = 0;
    double compression_ratio = 0.0;   // M_method / M_dense
    double speedup_vs_dense = 0.0;    // M_dense / M_method
    double mean_topk_agreement = 0.0;
    double output_rel_error_vs_dense = 0.0;
};

struct SweepReport {
    std::uint64_t spec_hash = 0;
    std::vector<SweepRow> rows;
};

// Runs every cell, verifying per call that counted transfers match the
// closed forms (a divergence aborts the sweep naming the cell). Rows come
// back sorted by (method, seq_len, rank, top_k). Deterministic for a fixed
// spec: repeated runs emit byte-identical reports.
SweepReport run_sweep(const SweepSpec& spec);

// Column order is fixed: method,seq_len,rank,top_k,compression_ratio,
// speedup_vs_dense,mean_topk_agreement,output_rel_error_vs_dense. The CSV
// leads with a "# spec_hash=..." comment line.
std::string sweep_to_csv(const SweepReport& report);
std::string sweep_to_json(const SweepReport& report);
std::string sweep_to_table(const SweepReport& report);

// Evaluates one method over tensors named "q" (rank 1 [d_h], or rank 2
// [g, d_h]), "K" and "V" (rank 2 [S, d_h]) from a trace file, producing the
// same row shape as a sweep cell.
// Errors: "trace-shape-error" for missing tensors or inconsistent dims.
struct TraceEvalParams {
    Method method = Method::Sparq;
    std::size_t rank = 32;
    std::size_t top_k = 128;
    std::optional<std::size_t> local_window;  // default: top_k / 4 for sparq
    std::optional<bool> reallocate_mean;
};

SweepReport trace_eval(const TraceFile& trace, const TraceEvalParams& params);

// Builds a synthetic workload and packages it as a trace file (q/K/V).
TraceFile workload_to_trace(const Workload& workload, TraceDtype dtype = TraceDtype::Float64);

// How step 1 picks its query components, for approximation-quality studies.
enum class ComponentSelector { TopMagnitude, Random, First };

struct AgreementStudySpec {
    std::size_t seq_len = 512;
    std::size_t head_dim = 64;
    std::vector<std::size_t> ranks{8, 16, 32, 64};
    std::size_t top_k = 32;
    TailKind tail = TailKind::Heavy;
    std::size_t trials = 200;
    std::uint64_t seed = 42;
};

struct AgreementRow {
    std::size_t rank = 0;
    double mean_agreement_top = 0.0;     // top-|q| component selection
    double mean_agreement_random = 0.0;  // random component baseline
    double mean_agreement_first = 0.0;   // first-r component baseline
};

struct AgreementStudy {
    std::vector<AgreementRow> rows;   // one per rank, ascending
    double query_kurtosis = 0.0;      // pooled over all sampled queries
};

// Measures how well approximate scores from r query components recover the
// true top-k scoring positions, for top-magnitude vs. baseline selectors.
AgreementStudy run_agreement_study(const AgreementStudySpec& spec);

// Same study over a trace's q/K/V; each query in the trace is one trial.
// The seed only drives the random-component baseline.
AgreementStudy run_agreement_study(const TraceFile& trace, const std::vector<std::size_t>& ranks,
                                   std::size_t top_k, std::uint64_t seed);

}  // namespace sparq
