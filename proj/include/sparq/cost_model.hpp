// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sparq/ledger.hpp"

namespace sparq {

enum class Method { Dense, Sparq, H2O, LmInfinite, FlexGen };

const char* method_name(Method method);  // "dense", "sparq", "h2o", "lm-infinite", "flexgen"
std::optional<Method> parse_method(std::string_view name);

// Parameters of the closed-form per-step transfer counts. rank/top_k are
// required only by the methods that use them.
struct TransferParams {
    std::size_t seq_len = 0;
    std::size_t head_dim = 0;
    std::optional<std::size_t> rank;
    std::optional<std::size_t> top_k;
    bool reallocate_mean = true;  // sparq only: drops the mean read/write term
};

// Closed-form scalar-element transfers per attention head per step:
//
//   dense        2*S*d_h + 2*d_h
//   sparq        S*r + 2*k*d_h + 4*d_h   (+2*d_h covers k/v writes; the other
//                2*d_h the mean vector read/write, dropped when reallocation
//                is off)
//   h2o          2*k*d_h + 2*d_h + 2*S
//   lm-infinite  2*k*d_h + 2*d_h
//   flexgen      S*d_h + k*d_h + 2*d_h
//
// rank is clamped to head_dim and top_k to seq_len, mirroring what the
// instrumented implementations actually transfer when a budget exceeds the
// data, so counted and analytic values stay comparable on clamped calls.
// Errors: "missing-parameter" when a method needs rank/top_k and it is absent.
std::uint64_t analytic_transfers(Method method, const TransferParams& params);

// M_method / M_dense. Below 1 means the method moves less data than dense.
double compression_ratio(Method method, const TransferParams& params);

// Transfers are counted in scalar elements to stay independent of the cache
// number format; a bytes view is just elements times the element width.
std::uint64_t transfer_bytes(std::uint64_t elements, std::size_t element_width_bytes);

// Whole-model shape for the transfer-fraction and intensity analysis.
// Defaults follow the standard decoder-layer accounting: N = 12*d_m^2
// parameters and C = 2*S*d_m/g cached elements per batch item.
struct ModelShape {
    std::size_t model_dim = 0;  // d_m
    std::size_t seq_len = 0;    // S
    double batch_size = 1.0;    // B
    std::size_t group_size = 1; // g (grouped-query heads per KV head)
    double params_per_layer = 0.0;      // N
    double kv_elements_per_item = 0.0;  // C

    static ModelShape standard(std::size_t model_dim, std::size_t seq_len, double batch_size,
                               std::size_t group_size = 1);

    // rho = S / (g * d_m): the shape variable deciding when KV-cache
    // transfers dominate parameter transfers.
    double rho() const;
};

// Fraction of per-step data transfer spent on the KV cache:
// B*C / (B*C + N), which reduces to rho / (rho + 6/B) with default N and C.
double attention_transfer_fraction(const ModelShape& shape);

// Arithmetic intensity A/M = (N + C*g) / (N/B + C) multiply-adds per
// transferred element; reduces to (6 + rho*g)/(6/B + rho) with defaults.
double arithmetic_intensity(const ModelShape& shape);

// Large-batch limit of the intensity: g + N/C, i.e. g + 6/rho with defaults.
double max_arithmetic_intensity(const ModelShape& shape);

// Hardware described by its compute and transfer rates.
struct HardwareSpec {
    std::string name;
    double compute_ops_per_s = 0.0;       // r_A: multiply-adds per second
    double transfer_elems_per_s = 0.0;    // r_M: scalar elements per second

    double machine_balance() const { return compute_ops_per_s / transfer_elems_per_s; }
};

namespace hardware {
HardwareSpec bow_ipu();  // 175e12 ops/s, 5.5e12 elem/s (exchange memory)
HardwareSpec a10();      // 125e12 ops/s, 0.6e12 elem/s
HardwareSpec h100();     // 990e12 ops/s, 3.35e12 elem/s
}  // namespace hardware

// A workload in absolute terms: arithmetic operations and transferred
// elements per step. For a transformer layer, A = B*N + B*C*g and M = N + B*C.
struct WorkloadCost {
    double ops = 0.0;       // A
    double elements = 0.0;  // M
};

WorkloadCost model_workload(const ModelShape& shape);

struct RooflineReport {
    double intensity = 0.0;        // A/M
    double machine_balance = 0.0;  // r_A/r_M
    // Strictly below the balance: data transfer takes longer than the
    // arithmetic under concurrent compute and transfer. Exactly at the
    // balance counts as not bandwidth bound.
    bool is_bandwidth_bound = false;
    double time_lower_bound_s = 0.0;  // max(A/r_A, M/r_M)
};

RooflineReport bandwidth_bound(const WorkloadCost& cost, const HardwareSpec& hw);
RooflineReport bandwidth_bound(const ModelShape& shape, const HardwareSpec& hw);

// Cross-validation of counted vs. closed-form transfers. The comparison
// excludes the dual-layout extra write (see TransferLedger). Throws
// LedgerDivergence naming the per-category breakdown on mismatch.
struct ReconcileReport {
    std::uint64_t counted = 0;
    std::uint64_t analytic = 0;
    std::string breakdown;
};

ReconcileReport reconcile(const TransferLedger& ledger, std::uint64_t analytic);

}  // namespace sparq
