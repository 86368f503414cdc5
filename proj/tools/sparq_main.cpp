// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: benchmark sweeps, analytic transfer tables with a
// roofline view, approximation-quality studies, and trace-file tooling.
//
// Exit codes: 0 success, 2 validation error, 3 counted/analytic transfer
// divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sparq/cost_model.hpp"
#include "sparq/metrics.hpp"
#include "sparq/sweep.hpp"
#include "sparq/trace_io.hpp"
#include "sparq/workload.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

std::vector<sparq::Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<sparq::Method> methods;
    for (const std::string& name : names) {
        const auto method = sparq::parse_method(name);
        if (!method.has_value()) {
            throw sparq::Error("bad-parameter", "unknown method '" + name + "'");
        }
        methods.push_back(*method);
    }
    return methods;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw sparq::Error("io-error", "cannot open '" + out_path + "' for writing");
    }
    out << text;
}

sparq::TailKind parse_tail(const std::string& name) {
    if (name == "gaussian") {
        return sparq::TailKind::Gaussian;
    }
    if (name == "heavy") {
        return sparq::TailKind::Heavy;
    }
    throw sparq::Error("bad-parameter", "unknown tail kind '" + name + "'");
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::vector<std::string> methods{"dense", "sparq", "h2o", "lm-infinite", "flexgen"};
    std::vector<std::size_t> seq_lens{512};
    std::size_t head_dim = 64;
    std::size_t gqa = 1;
    std::vector<std::size_t> ranks{8, 16, 32, 64};
    std::vector<std::size_t> top_ks{128};
    long long local = -1;  // -1: l = k/4
    std::size_t trials = 10;
    std::string tail = "heavy";
    bool no_realloc = false;
    bool realloc = false;
    std::uint64_t seed = 42;
    std::string format = "csv";
    std::string out;
};

int run_bench(const BenchArgs& args) {
    sparq::SweepSpec spec;
    spec.methods = parse_methods(args.methods);
    spec.seq_lens = args.seq_lens;
    spec.head_dim = args.head_dim;
    spec.group_size = args.gqa;
    spec.ranks = args.ranks;
    spec.top_ks = args.top_ks;
    if (args.local >= 0) {
        spec.local_rule = sparq::LocalRule::Fixed;
        spec.local_fixed = static_cast<std::size_t>(args.local);
    }
    spec.trials = args.trials;
    spec.tail = parse_tail(args.tail);
    if (args.no_realloc) {
        spec.reallocate_mean = false;
    } else if (args.realloc) {
        spec.reallocate_mean = true;
    }
    spec.seed = args.seed;

    const sparq::SweepReport report = sparq::run_sweep(spec);
    if (args.format == "csv") {
        emit(sparq::sweep_to_csv(report), args.out);
    } else if (args.format == "json") {
        emit(sparq::sweep_to_json(report), args.out);
    } else {
        emit(sparq::sweep_to_table(report), args.out);
    }
    return 0;
}

// ---- cost -----------------------------------------------------------------

struct CostArgs {
    std::vector<std::string> methods{"dense", "sparq", "h2o", "lm-infinite", "flexgen"};
    std::vector<std::size_t> seq_lens{4096};
    std::size_t head_dim = 128;
    std::size_t rank = 32;
    std::size_t top_k = 128;
    bool no_realloc = false;
    std::size_t element_bytes = 0;  // 0: elements only, no bytes column
    std::size_t model_dim = 0;      // 0: skip the roofline section
    double batch = 1.0;
    std::size_t gqa = 1;
    std::string hardware = "h100";
    std::string format = "table";
    std::string out;
};

sparq::HardwareSpec parse_hardware(const std::string& name) {
    if (name == "bow" || name == "bow-ipu" || name == "ipu") {
        return sparq::hardware::bow_ipu();
    }
    if (name == "a10") {
        return sparq::hardware::a10();
    }
    if (name == "h100") {
        return sparq::hardware::h100();
    }
    throw sparq::Error("bad-parameter", "unknown hardware '" + name + "' (bow|a10|h100)");
}

int run_cost(const CostArgs& args) {
    const std::vector<sparq::Method> methods = parse_methods(args.methods);

    struct Line {
        sparq::Method method;
        std::size_t seq_len;
        std::uint64_t elements;
        double ratio;
        double speedup;
    };
    std::vector<Line> lines;
    for (std::size_t seq_len : args.seq_lens) {
        for (sparq::Method method : methods) {
            sparq::TransferParams params;
            params.seq_len = seq_len;
            params.head_dim = args.head_dim;
            params.reallocate_mean = !args.no_realloc;
            if (method == sparq::Method::Sparq) {
                params.rank = args.rank;
            }
            if (method != sparq::Method::Dense) {
                params.top_k = args.top_k;
            }
            const std::uint64_t elements = sparq::analytic_transfers(method, params);
            const double ratio = sparq::compression_ratio(method, params);
            lines.push_back({method, seq_len, elements, ratio, 1.0 / ratio});
        }
    }

    std::optional<sparq::ModelShape> shape;
    if (args.model_dim != 0) {
        shape = sparq::ModelShape::standard(args.model_dim, args.seq_lens.front(), args.batch, args.gqa);
    }
    const sparq::HardwareSpec hw = parse_hardware(args.hardware);

    std::string text;
    if (args.format == "json") {
        text += "{\n  \"transfers\": [";
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const Line& l = lines[i];
            text += i == 0 ? "\n" : ",\n";
            text += std::string("    {\"method\": \"") + sparq::method_name(l.method) + "\"";
            text += ", \"seq_len\": " + std::to_string(l.seq_len);
            text += ", \"head_dim\": " + std::to_string(args.head_dim);
            if (l.method == sparq::Method::Sparq) {
                text += ", \"rank\": " + std::to_string(args.rank);
            }
            if (l.method != sparq::Method::Dense) {
                text += ", \"top_k\": " + std::to_string(args.top_k);
            }
            text += ", \"elements\": " + std::to_string(l.elements);
            if (args.element_bytes != 0) {
                text += ", \"bytes\": " +
                        std::to_string(sparq::transfer_bytes(l.elements, args.element_bytes));
            }
            text += ", \"compression_ratio\": " + format_double(l.ratio);
            text += ", \"speedup_vs_dense\": " + format_double(l.speedup);
            text += "}";
        }
        text += "\n  ]";
        if (shape.has_value()) {
            const sparq::RooflineReport roof = sparq::bandwidth_bound(*shape, hw);
            text += ",\n  \"roofline\": {";
            text += "\"rho\": " + format_double(shape->rho());
            text += ", \"attention_transfer_fraction\": " +
                    format_double(sparq::attention_transfer_fraction(*shape));
            text += ", \"arithmetic_intensity\": " + format_double(sparq::arithmetic_intensity(*shape));
            text += ", \"max_arithmetic_intensity\": " +
                    format_double(sparq::max_arithmetic_intensity(*shape));
            text += ", \"hardware\": \"" + hw.name + "\"";
            text += ", \"machine_balance\": " + format_double(hw.machine_balance());
            text += ", \"bandwidth_bound\": " + std::string(roof.is_bandwidth_bound ? "true" : "false");
            text += ", \"time_lower_bound_s\": " + format_double(roof.time_lower_bound_s);
            text += "}";
        }
        text += "\n}\n";
    } else {
        char line[256];
        std::snprintf(line, sizeof(line), "%-12s %8s %6s %6s %6s %14s %12s %10s\n", "method", "seq_len",
                      "d_h", "rank", "top_k", "elements", "compression", "speedup");
        text += line;
        for (const Line& l : lines) {
            const bool has_rank = l.method == sparq::Method::Sparq;
            const bool has_k = l.method != sparq::Method::Dense;
            std::snprintf(line, sizeof(line), "%-12s %8zu %6zu %6s %6s %14llu %12.4f %10.2f",
                          sparq::method_name(l.method), l.seq_len, args.head_dim,
                          has_rank ? std::to_string(args.rank).c_str() : "-",
                          has_k ? std::to_string(args.top_k).c_str() : "-",
                          static_cast<unsigned long long>(l.elements), l.ratio, l.speedup);
            text += line;
            if (args.element_bytes != 0) {
                std::snprintf(line, sizeof(line), " %12llu B",
                              static_cast<unsigned long long>(
                                  sparq::transfer_bytes(l.elements, args.element_bytes)));
                text += line;
            }
            text += '\n';
        }
        if (shape.has_value()) {
            const sparq::RooflineReport roof = sparq::bandwidth_bound(*shape, hw);
            std::snprintf(line, sizeof(line), "\nmodel: d_m=%zu S=%zu B=%g g=%zu  rho=%g\n",
                          args.model_dim, args.seq_lens.front(), args.batch, args.gqa, shape->rho());
            text += line;
            std::snprintf(line, sizeof(line),
                          "attention transfer fraction: %.4f\narithmetic intensity: %.4f (max %.4f)\n",
                          sparq::attention_transfer_fraction(*shape),
                          sparq::arithmetic_intensity(*shape),
                          sparq::max_arithmetic_intensity(*shape));
            text += line;
            std::snprintf(line, sizeof(line), "%s: machine balance %.1f -> %s, step time >= %.3e s\n",
                          hw.name.c_str(), hw.machine_balance(),
                          roof.is_bandwidth_bound ? "bandwidth bound" : "compute bound",
                          roof.time_lower_bound_s);
            text += line;
        }
    }
    emit(text, args.out);
    return 0;
}

// ---- agreement ------------------------------------------------------------

struct AgreementArgs {
    std::string trace;  // when set, study the trace instead of synthetic data
    std::size_t seq_len = 512;
    std::size_t head_dim = 64;
    std::vector<std::size_t> ranks{8, 16, 32, 64};
    std::size_t top_k = 32;
    std::size_t trials = 200;
    std::string tail = "heavy";
    std::uint64_t seed = 42;
    std::string format = "table";
    std::string out;
};

int run_agreement(const AgreementArgs& args) {
    sparq::AgreementStudy study;
    if (!args.trace.empty()) {
        study = sparq::run_agreement_study(sparq::read_trace_file(args.trace), args.ranks, args.top_k,
                                           args.seed);
    } else {
        sparq::AgreementStudySpec spec;
        spec.seq_len = args.seq_len;
        spec.head_dim = args.head_dim;
        spec.ranks = args.ranks;
        spec.top_k = args.top_k;
        spec.tail = parse_tail(args.tail);
        spec.trials = args.trials;
        spec.seed = args.seed;
        study = sparq::run_agreement_study(spec);
    }

    std::string text;
    if (args.format == "json") {
        text += "{\n  \"query_kurtosis\": " + format_double(study.query_kurtosis) + ",\n  \"rows\": [";
        for (std::size_t i = 0; i < study.rows.size(); ++i) {
            const sparq::AgreementRow& row = study.rows[i];
            text += i == 0 ? "\n" : ",\n";
            text += "    {\"rank\": " + std::to_string(row.rank);
            text += ", \"top_components\": " + format_double(row.mean_agreement_top);
            text += ", \"random_components\": " + format_double(row.mean_agreement_random);
            text += ", \"first_components\": " + format_double(row.mean_agreement_first);
            text += "}";
        }
        text += "\n  ]\n}\n";
    } else if (args.format == "csv") {
        text += "rank,top_components,random_components,first_components\n";
        for (const sparq::AgreementRow& row : study.rows) {
            text += std::to_string(row.rank) + ',' + format_double(row.mean_agreement_top) + ',' +
                    format_double(row.mean_agreement_random) + ',' +
                    format_double(row.mean_agreement_first) + '\n';
        }
    } else {
        char line[160];
        std::snprintf(line, sizeof(line), "query kurtosis (pooled): %.3f\n", study.query_kurtosis);
        text += line;
        std::snprintf(line, sizeof(line), "%6s %16s %16s %16s\n", "rank", "top-|q|", "random", "first-r");
        text += line;
        for (const sparq::AgreementRow& row : study.rows) {
            std::snprintf(line, sizeof(line), "%6zu %16.4f %16.4f %16.4f\n", row.rank,
                          row.mean_agreement_top, row.mean_agreement_random, row.mean_agreement_first);
            text += line;
        }
    }
    emit(text, args.out);
    return 0;
}

// ---- gen-trace / trace-eval -------------------------------------------------

struct GenTraceArgs {
    std::string out;
    std::size_t seq_len = 512;
    std::size_t head_dim = 64;
    std::size_t gqa = 1;
    std::string tail = "heavy";
    std::uint64_t seed = 42;
    bool f32 = false;
};

int run_gen_trace(const GenTraceArgs& args) {
    const sparq::Workload workload =
        sparq::synth_workload(args.seq_len, args.head_dim, args.gqa, parse_tail(args.tail), args.seed);
    sparq::write_trace_file(
        args.out, sparq::workload_to_trace(workload, args.f32 ? sparq::TraceDtype::Float32
                                                              : sparq::TraceDtype::Float64));
    std::cerr << "wrote " << args.out << " (S=" << args.seq_len << ", d_h=" << args.head_dim
              << ", g=" << args.gqa << ")\n";
    return 0;
}

struct TraceEvalArgs {
    std::string in;
    std::string method = "sparq";
    std::size_t rank = 32;
    std::size_t top_k = 128;
    long long local = -1;
    bool no_realloc = false;
    std::string format = "table";
    std::string out;
};

int run_trace_eval(const TraceEvalArgs& args) {
    const sparq::TraceFile trace = sparq::read_trace_file(args.in);
    sparq::TraceEvalParams params;
    const auto method = sparq::parse_method(args.method);
    if (!method.has_value()) {
        throw sparq::Error("bad-parameter", "unknown method '" + args.method + "'");
    }
    params.method = *method;
    params.rank = args.rank;
    params.top_k = args.top_k;
    if (args.local >= 0) {
        params.local_window = static_cast<std::size_t>(args.local);
    }
    if (args.no_realloc) {
        params.reallocate_mean = false;
    }
    const sparq::SweepReport report = sparq::trace_eval(trace, params);
    if (args.format == "csv") {
        emit(sparq::sweep_to_csv(report), args.out);
    } else if (args.format == "json") {
        emit(sparq::sweep_to_json(report), args.out);
    } else {
        emit(sparq::sweep_to_table(report), args.out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SparQ attention workbench: transfer-efficient attention methods over an "
                 "instrumented KV cache with an analytic data-transfer cost model"};
    app.require_subcommand(1);

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep over synthetic workloads");
    bench_cmd->add_option("--method", bench.methods, "methods to run")->delimiter(',');
    bench_cmd->add_option("--seq-len", bench.seq_lens, "sequence length grid")->delimiter(',');
    bench_cmd->add_option("--head-dim", bench.head_dim, "head dimension d_h");
    bench_cmd->add_option("--gqa", bench.gqa, "grouped-query heads per KV head");
    bench_cmd->add_option("--rank", bench.ranks, "rank grid (sparq)")->delimiter(',');
    bench_cmd->add_option("--topk", bench.top_ks, "fetched-position budget grid")->delimiter(',');
    bench_cmd->add_option("--local", bench.local, "local window (default: topk/4)");
    bench_cmd->add_option("--trials", bench.trials, "trials per cell");
    bench_cmd->add_option("--tail", bench.tail, "query tail: gaussian|heavy");
    bench_cmd->add_flag("--no-realloc", bench.no_realloc, "disable mean value reallocation");
    bench_cmd->add_flag("--realloc", bench.realloc, "force mean value reallocation on");
    bench_cmd->add_option("--seed", bench.seed, "RNG seed");
    bench_cmd->add_option("--format", bench.format, "csv|json|table");
    bench_cmd->add_option("--out", bench.out, "output file (default stdout)");

    CostArgs cost;
    CLI::App* cost_cmd = app.add_subcommand("cost", "analytic transfer table and roofline view");
    cost_cmd->add_option("--method", cost.methods, "methods to include")->delimiter(',');
    cost_cmd->add_option("--seq-len", cost.seq_lens, "sequence lengths")->delimiter(',');
    cost_cmd->add_option("--head-dim", cost.head_dim, "head dimension d_h");
    cost_cmd->add_option("--rank", cost.rank, "sparq rank r");
    cost_cmd->add_option("--topk", cost.top_k, "fetched-position budget k");
    cost_cmd->add_flag("--no-realloc", cost.no_realloc, "sparq without mean reallocation");
    cost_cmd->add_option("--element-bytes", cost.element_bytes,
                         "also report bytes at this element width");
    cost_cmd->add_option("--model-dim", cost.model_dim, "model dimension (enables the roofline section)");
    cost_cmd->add_option("--batch", cost.batch, "batch size");
    cost_cmd->add_option("--gqa", cost.gqa, "grouped-query heads per KV head");
    cost_cmd->add_option("--hardware", cost.hardware, "bow|a10|h100");
    cost_cmd->add_option("--format", cost.format, "table|json");
    cost_cmd->add_option("--out", cost.out, "output file (default stdout)");

    AgreementArgs agreement;
    CLI::App* agreement_cmd =
        app.add_subcommand("agreement", "top-k agreement of approximate scores vs. true scores");
    agreement_cmd->add_option("--trace", agreement.trace, "study a trace file instead of synthetic data");
    agreement_cmd->add_option("--seq-len", agreement.seq_len, "sequence length");
    agreement_cmd->add_option("--head-dim", agreement.head_dim, "head dimension d_h");
    agreement_cmd->add_option("--rank", agreement.ranks, "rank grid")->delimiter(',');
    agreement_cmd->add_option("--topk", agreement.top_k, "agreement set size k");
    agreement_cmd->add_option("--trials", agreement.trials, "trials");
    agreement_cmd->add_option("--tail", agreement.tail, "query tail: gaussian|heavy");
    agreement_cmd->add_option("--seed", agreement.seed, "RNG seed");
    agreement_cmd->add_option("--format", agreement.format, "table|csv|json");
    agreement_cmd->add_option("--out", agreement.out, "output file (default stdout)");

    GenTraceArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-trace", "write a synthetic q/K/V trace file");
    gen_cmd->add_option("--out", gen.out, "trace file path")->required();
    gen_cmd->add_option("--seq-len", gen.seq_len, "sequence length");
    gen_cmd->add_option("--head-dim", gen.head_dim, "head dimension d_h");
    gen_cmd->add_option("--gqa", gen.gqa, "number of queries");
    gen_cmd->add_option("--tail", gen.tail, "query tail: gaussian|heavy");
    gen_cmd->add_option("--seed", gen.seed, "RNG seed");
    gen_cmd->add_flag("--f32", gen.f32, "store payloads as 32-bit floats");

    TraceEvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("trace-eval", "evaluate a method over a trace file");
    eval_cmd->add_option("--in", eval.in, "trace file path")->required();
    eval_cmd->add_option("--method", eval.method, "method to run");
    eval_cmd->add_option("--rank", eval.rank, "sparq rank r");
    eval_cmd->add_option("--topk", eval.top_k, "fetched-position budget k");
    eval_cmd->add_option("--local", eval.local, "local window (default: topk/4)");
    eval_cmd->add_flag("--no-realloc", eval.no_realloc, "disable mean value reallocation");
    eval_cmd->add_option("--format", eval.format, "table|csv|json");
    eval_cmd->add_option("--out", eval.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (bench_cmd->parsed()) {
            return run_bench(bench);
        }
        if (cost_cmd->parsed()) {
            return run_cost(cost);
        }
        if (agreement_cmd->parsed()) {
            return run_agreement(agreement);
        }
        if (gen_cmd->parsed()) {
            return run_gen_trace(gen);
        }
        if (eval_cmd->parsed()) {
            return run_trace_eval(eval);
        }
    } catch (const sparq::LedgerDivergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const sparq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
