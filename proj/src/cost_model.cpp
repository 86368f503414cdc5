// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/cost_model.hpp"

#include <algorithm>

#include "sparq/error.hpp"

namespace sparq {

const char* method_name(Method method) {
    switch (method) {
        case Method::Dense: return "dense";
        case Method::Sparq: return "sparq";
        case Method::H2O: return "h2o";
        case Method::LmInfinite: return "lm-infinite";
        case Method::FlexGen: return "flexgen";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    if (name == "dense") return Method::Dense;
    if (name == "sparq") return Method::Sparq;
    if (name == "h2o") return Method::H2O;
    if (name == "lm-infinite" || name == "lm-inf" || name == "lminf") return Method::LmInfinite;
    if (name == "flexgen") return Method::FlexGen;
    return std::nullopt;
}

namespace {

std::uint64_t require_param(const std::optional<std::size_t>& value, Method method, const char* name) {
    if (!value.has_value()) {
        throw Error("missing-parameter",
                    std::string(method_name(method)) + " requires parameter '" + name + "'");
    }
    return *value;
}

}  // namespace

std::uint64_t analytic_transfers(Method method, const TransferParams& params) {
    const std::uint64_t s = params.seq_len;
    const std::uint64_t d = params.head_dim;
    if (s == 0 || d == 0) {
        throw Error("missing-parameter", "seq_len and head_dim must be positive");
    }
    switch (method) {
        case Method::Dense:
            return 2 * s * d + 2 * d;
        case Method::Sparq: {
            const std::uint64_t r = std::min<std::uint64_t>(require_param(params.rank, method, "rank"), d);
            const std::uint64_t k = std::min<std::uint64_t>(require_param(params.top_k, method, "top_k"), s);
            return s * r + 2 * k * d + (params.reallocate_mean ? 4 : 2) * d;
        }
        case Method::H2O: {
            const std::uint64_t k = std::min<std::uint64_t>(require_param(params.top_k, method, "top_k"), s);
            return 2 * k * d + 2 * d + 2 * s;
        }
        case Method::LmInfinite: {
            const std::uint64_t k = std::min<std::uint64_t>(require_param(params.top_k, method, "top_k"), s);
            return 2 * k * d + 2 * d;
        }
        case Method::FlexGen: {
            const std::uint64_t k = std::min<std::uint64_t>(require_param(params.top_k, method, "top_k"), s);
            return s * d + k * d + 2 * d;
        }
    }
    throw Error("bad-parameter", "unknown method");
}

double compression_ratio(Method method, const TransferParams& params) {
    const auto dense = static_cast<double>(analytic_transfers(Method::Dense, params));
    return static_cast<double>(analytic_transfers(method, params)) / dense;
}

std::uint64_t transfer_bytes(std::uint64_t elements, std::size_t element_width_bytes) {
    if (element_width_bytes == 0) {
        throw Error("bad-parameter", "element width must be positive");
    }
    return elements * element_width_bytes;
}

ModelShape ModelShape::standard(std::size_t model_dim, std::size_t seq_len, double batch_size,
                                std::size_t group_size) {
    if (model_dim == 0 || seq_len == 0 || group_size == 0 || !(batch_size > 0.0)) {
        throw Error("bad-parameter", "model shape requires positive dimensions and batch size");
    }
    ModelShape shape;
    shape.model_dim = model_dim;
    shape.seq_len = seq_len;
    shape.batch_size = batch_size;
    shape.group_size = group_size;
    const double dm = static_cast<double>(model_dim);
    shape.params_per_layer = 12.0 * dm * dm;
    shape.kv_elements_per_item = 2.0 * static_cast<double>(seq_len) * dm / static_cast<double>(group_size);
    return shape;
}

double ModelShape::rho() const {
    return static_cast<double>(seq_len) / (static_cast<double>(group_size) * static_cast<double>(model_dim));
}

double attention_transfer_fraction(const ModelShape& shape) {
    const double bc = shape.batch_size * shape.kv_elements_per_item;
    return bc / (bc + shape.params_per_layer);
}

double arithmetic_intensity(const ModelShape& shape) {
    const WorkloadCost cost = model_workload(shape);
    return cost.ops / cost.elements;
}

double max_arithmetic_intensity(const ModelShape& shape) {
    return static_cast<double>(shape.group_size) + shape.params_per_layer / shape.kv_elements_per_item;
}

namespace hardware {
HardwareSpec bow_ipu() { return {"Bow IPU", 175e12, 5.5e12}; }
HardwareSpec a10() { return {"A10", 125e12, 0.6e12}; }
HardwareSpec h100() { return {"H100 SXM", 990e12, 3.35e12}; }
}  // namespace hardware

WorkloadCost model_workload(const ModelShape& shape) {
    const double n = shape.params_per_layer;
    const double c = shape.kv_elements_per_item;
    const double b = shape.batch_size;
    const double g = static_cast<double>(shape.group_size);
    return {b * n + b * c * g, n + b * c};
}

RooflineReport bandwidth_bound(const WorkloadCost& cost, const HardwareSpec& hw) {
    RooflineReport report;
    report.intensity = cost.ops / cost.elements;
    report.machine_balance = hw.machine_balance();
    report.is_bandwidth_bound = report.intensity < report.machine_balance;
    report.time_lower_bound_s =
        std::max(cost.ops / hw.compute_ops_per_s, cost.elements / hw.transfer_elems_per_s);
    return report;
}

RooflineReport bandwidth_bound(const ModelShape& shape, const HardwareSpec& hw) {
    return bandwidth_bound(model_workload(shape), hw);
}

ReconcileReport reconcile(const TransferLedger& ledger, std::uint64_t analytic) {
    ReconcileReport report;
    report.counted = ledger.reconcilable_total();
    report.analytic = analytic;
    report.breakdown = ledger.breakdown();
    if (report.counted != report.analytic) {
        throw LedgerDivergence("counted " + std::to_string(report.counted) + " elements vs analytic " +
                               std::to_string(report.analytic) + "; ledger breakdown: " + report.breakdown);
    }
    return report;
}

}  // namespace sparq
