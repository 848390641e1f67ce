// gpart: generate benchmark graphs, pre-train the pair classifier, run the
// partition pipeline (static or snowball streaming), evaluate, and benchmark.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpart/bench.hpp"
#include "gpart/checkpoint_io.hpp"
#include "gpart/infer.hpp"
#include "gpart/io.hpp"
#include "gpart/metrics.hpp"
#include "gpart/pretrain.hpp"
#include "gpart/report.hpp"
#include "gpart/sbm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonIoOpts {
    bool zero_based = false;
    bool one_based() const { return !zero_based; }
};

void add_io_flag(CLI::App* cmd, CommonIoOpts& opts) {
    cmd->add_flag("--zero-based", opts.zero_based,
                  "node ids in TSV files are 0-based (default: 1-based)");
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

json params_to_json(const gpart::GeneratorParams& p) {
    return {{"n", p.n},
            {"k_target", p.k_target},
            {"within_between_ratio", p.within_between_ratio},
            {"size_heterogeneity", p.size_heterogeneity},
            {"avg_degree", p.avg_degree},
            {"degree_exponent", p.degree_exponent},
            {"seed", p.seed}};
}

gpart::RefinerConfig make_refiner(const std::string& kind, const std::string& external_cmd,
                                  std::uint64_t seed, double timeout_s) {
    gpart::RefinerConfig cfg;
    if (kind == "external") {
        cfg.kind = gpart::RefinerConfig::Kind::external;
        cfg.external_cmd = external_cmd;
    } else if (kind != "builtin") {
        throw CLI::ValidationError("--refiner must be 'builtin' or 'external'");
    }
    cfg.seed = seed;
    cfg.timeout_s = timeout_s;
    return cfg;
}

std::vector<std::pair<gpart::Graph, gpart::Partition>> load_corpus_dir(const std::string& dir,
                                                                       bool one_based) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".edges.tsv";
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            names.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(names.begin(), names.end());
    std::vector<std::pair<gpart::Graph, gpart::Partition>> corpus;
    for (const auto& stem : names) {
        const std::string edges = dir + "/" + stem + ".edges.tsv";
        const std::string truth = dir + "/" + stem + ".truth.tsv";
        if (!fs::exists(truth)) {
            throw std::runtime_error("corpus graph " + edges + " has no matching " + truth);
        }
        gpart::Graph g = gpart::read_edge_tsv(edges, one_based);
        gpart::Partition t = gpart::read_partition_tsv(truth, one_based, g.n());
        corpus.emplace_back(std::move(g), std::move(t));
    }
    if (corpus.empty()) throw std::runtime_error("no <name>.edges.tsv files in " + dir);
    return corpus;
}

std::vector<std::pair<gpart::Graph, gpart::Partition>> synth_corpus(int count,
                                                                    std::uint64_t seed) {
    std::vector<std::pair<gpart::Graph, gpart::Partition>> corpus;
    const gpart::ParamRanges ranges;
    for (int i = 0; i < count; ++i) {
        gpart::GeneratedGraph gen =
            gpart::generate(gpart::sample_params(ranges, gpart::derive_seed(seed, 10 + i)));
        corpus.emplace_back(std::move(gen.graph), std::move(gen.truth));
    }
    return corpus;
}

int cmd_generate(std::int64_t n, int k, double ratio, double heterogeneity, double avg_degree,
                 double exponent, std::uint64_t seed, const std::string& out_prefix,
                 const CommonIoOpts& io) {
    gpart::GeneratorParams p;
    p.n = n;
    p.k_target = k;
    p.within_between_ratio = ratio;
    p.size_heterogeneity = heterogeneity;
    p.avg_degree = avg_degree;
    p.degree_exponent = exponent;
    p.seed = seed;
    const gpart::GeneratedGraph gen = gpart::generate(p);
    gpart::write_edge_tsv(out_prefix + ".edges.tsv", gen.graph, io.one_based());
    gpart::write_partition_tsv(out_prefix + ".truth.tsv", gen.truth, io.one_based());
    json sidecar = params_to_json(gen.params);
    sidecar["n_nodes"] = gen.graph.n();
    sidecar["n_edges"] = gen.graph.num_edges();
    sidecar["k_blocks"] = gen.truth.k;
    sidecar["one_based"] = io.one_based();
    write_json_file(out_prefix + ".params.json", sidecar);
    std::printf("wrote %s.{edges,truth}.tsv: N=%lld |E|=%lld K=%d\n", out_prefix.c_str(),
                static_cast<long long>(gen.graph.n()),
                static_cast<long long>(gen.graph.num_edges()), gen.truth.k);
    return 0;
}

int cmd_stream_split(const std::string& graph_path, const std::string& truth_path, int steps,
                     std::uint64_t seed, const std::string& out_dir, const CommonIoOpts& io) {
    const gpart::Graph g = gpart::read_edge_tsv(graph_path, io.one_based());
    const gpart::Partition truth = gpart::read_partition_tsv(truth_path, io.one_based(), g.n());
    const gpart::SnowballSplit split = gpart::snowball_split(g, truth, steps, seed);
    fs::create_directories(out_dir);

    json manifest;
    manifest["schema_version"] = gpart::kReportSchemaVersion;
    manifest["n_total"] = g.n();
    manifest["t_steps"] = steps;
    manifest["seed"] = seed;
    manifest["one_based"] = io.one_based();
    json steps_json = json::array();
    for (int t = 0; t < steps; ++t) {
        const auto& step = split.steps[t];
        char stem[32];
        std::snprintf(stem, sizeof stem, "step_%02d", t + 1);
        const std::string base = out_dir + "/" + stem;
        gpart::write_edge_tsv(base + ".edges.tsv", step.graph, io.one_based());
        gpart::write_partition_tsv(base + ".truth.tsv", step.truth, io.one_based());
        {
            // local id -> original id map, one original id per line
            std::ofstream nodes(base + ".nodes.tsv", std::ios::trunc);
            const std::int64_t shift = io.one_based() ? 1 : 0;
            for (const gpart::NodeId orig : step.nodes) nodes << (orig + shift) << "\n";
        }
        steps_json.push_back({{"step", t + 1},
                              {"n", step.graph.n()},
                              {"m", step.graph.num_edges()},
                              {"edges_file", std::string(stem) + ".edges.tsv"},
                              {"truth_file", std::string(stem) + ".truth.tsv"},
                              {"nodes_file", std::string(stem) + ".nodes.tsv"}});
    }
    manifest["steps"] = steps_json;
    write_json_file(out_dir + "/manifest.json", manifest);
    std::printf("wrote %d snowball steps and manifest.json under %s\n", steps, out_dir.c_str());
    return 0;
}

int cmd_pretrain(const std::string& corpus_dir, int synth_count, const std::string& out_ckpt,
                 int epochs, std::uint64_t seed, double lr, double neg_ratio, double lambda_mod,
                 const std::string& trace_csv, const CommonIoOpts& io) {
    const auto corpus = corpus_dir.empty() ? synth_corpus(synth_count, seed)
                                           : load_corpus_dir(corpus_dir, io.one_based());
    std::fprintf(stderr, "pre-training on %zu graphs, %d epochs\n", corpus.size(), epochs);

    gpart::ModelConfig config;
    config.projection_seed = gpart::derive_seed(seed, 1);
    gpart::TrainHyper hyper;
    hyper.epochs = epochs;
    hyper.learning_rate = lr;
    hyper.neg_ratio = neg_ratio;
    hyper.lambda_mod = lambda_mod;
    hyper.seed = gpart::derive_seed(seed, 2);

    const gpart::TrainResult res = gpart::pretrain(corpus, config, hyper);
    gpart::save_checkpoint(res.checkpoint, out_ckpt);

    const std::string trace_path = trace_csv.empty() ? out_ckpt + ".loss.csv" : trace_csv;
    std::ofstream trace(trace_path, std::ios::trunc);
    trace << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
        trace << (e + 1) << "," << res.epoch_loss[e] << "\n";
    }
    std::printf("wrote %s (loss %.4f -> %.4f, trace in %s)\n", out_ckpt.c_str(),
                res.epoch_loss.front(), res.epoch_loss.back(), trace_path.c_str());
    return 0;
}

int cmd_partition(const std::string& graph_path, const std::string& ckpt_path,
                  const std::string& out_partition, const std::string& report_path,
                  const std::string& truth_path, const std::string& refiner_kind,
                  const std::string& external_cmd, double threshold, std::uint64_t seed,
                  double timeout_s, const CommonIoOpts& io) {
    const gpart::Graph g = gpart::read_edge_tsv(graph_path, io.one_based());
    const gpart::ModelCheckpoint ckpt = gpart::load_checkpoint(ckpt_path);
    const gpart::RefinerConfig cfg = make_refiner(refiner_kind, external_cmd, seed, timeout_s);

    gpart::InferResult res = gpart::generalize_and_refine(g, ckpt, cfg, threshold);
    if (!truth_path.empty()) {
        const gpart::Partition truth = gpart::read_partition_tsv(truth_path, io.one_based(), g.n());
        res.report.quality = gpart::compute_quality(g, res.partition, truth);
    }
    gpart::write_partition_tsv(out_partition, res.partition, io.one_based());
    json report = gpart::to_json(res.report);
    report["graph"] = graph_path;
    report["checkpoint"] = ckpt_path;
    report["refiner"] = refiner_kind;
    report["refiner_seed"] = seed;
    report["threshold"] = threshold;
    if (!report_path.empty()) write_json_file(report_path, report);
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_stream(const std::string& manifest_path, const std::string& ckpt_path,
               const std::string& out_dir, const std::string& report_path,
               const std::string& refiner_kind, const std::string& external_cmd, double threshold,
               std::uint64_t seed, double timeout_s) {
    std::ifstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot open manifest: " + manifest_path);
    const json manifest = json::parse(mf);
    const bool one_based = manifest.at("one_based").get<bool>();
    const std::string dir = fs::path(manifest_path).parent_path().string();

    fs::create_directories(out_dir);
    std::ofstream report_out;
    if (!report_path.empty()) report_out.open(report_path, std::ios::trunc);

    const gpart::ModelCheckpoint ckpt = gpart::load_checkpoint(ckpt_path);
    int step_no = 0;
    for (const auto& step : manifest.at("steps")) {
        ++step_no;
        const std::string edges = dir + "/" + step.at("edges_file").get<std::string>();
        const gpart::Graph g = gpart::read_edge_tsv(edges, one_based);
        gpart::RefinerConfig cfg =
            make_refiner(refiner_kind, external_cmd, gpart::derive_seed(seed, step_no), timeout_s);

        gpart::InferResult res = gpart::generalize_and_refine(g, ckpt, cfg, threshold);
        res.report.phase = "stream-step " + std::to_string(step_no);
        if (step.contains("truth_file")) {
            const gpart::Partition truth = gpart::read_partition_tsv(
                dir + "/" + step.at("truth_file").get<std::string>(), one_based, g.n());
            res.report.quality = gpart::compute_quality(g, res.partition, truth);
        }
        char stem[32];
        std::snprintf(stem, sizeof stem, "step_%02d", step_no);
        gpart::write_partition_tsv(out_dir + "/" + stem + ".part.tsv", res.partition, one_based);
        json row = gpart::to_json(res.report);
        row["step"] = step_no;
        row["refiner_seed"] = gpart::derive_seed(seed, step_no);
        if (report_out) report_out << row.dump() << "\n";
        std::string quality_note;
        if (res.report.quality) {
            quality_note = " ARI=" + std::to_string(res.report.quality->ari);
        }
        std::printf("step %2d: N=%lld N~=%lld K=%d total=%.2fs%s\n", step_no,
                    static_cast<long long>(res.report.n),
                    static_cast<long long>(res.report.n_super), res.report.k_final,
                    res.report.timings.total_s, quality_note.c_str());
    }
    return 0;
}

int cmd_eval(const std::string& graph_path, const std::string& pred_path,
             const std::string& truth_path, const CommonIoOpts& io) {
    const json metrics = gpart::eval_files(graph_path, pred_path, truth_path, io.one_based());
    std::cout << metrics.dump(2) << "\n";
    return 0;
}

void write_rows_jsonl(const std::string& path, const std::vector<json>& rows) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc);
    for (const auto& row : rows) out << row.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph partitioning via pre-trained pair classification and coarse refinement"};
    app.require_subcommand(1);

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "generate a benchmark graph + ground truth");
    std::int64_t gen_n = 10000;
    int gen_k = 0;
    double gen_ratio = 2.5, gen_het = 3.0, gen_deg = 85.0, gen_exp = 2.5;
    std::uint64_t gen_seed = 1;
    std::string gen_prefix = "graph";
    CommonIoOpts gen_io;
    gen_cmd->add_option("--n", gen_n, "node count")->required();
    gen_cmd->add_option("--k", gen_k, "block count (0 = from n)");
    gen_cmd->add_option("--ratio", gen_ratio, "within/between edge-count ratio");
    gen_cmd->add_option("--heterogeneity", gen_het, "max/min block-size ratio");
    gen_cmd->add_option("--avg-degree", gen_deg, "average degree");
    gen_cmd->add_option("--exponent", gen_exp, "degree propensity power-law exponent");
    gen_cmd->add_option("--seed", gen_seed, "generator seed");
    gen_cmd->add_option("--out-prefix", gen_prefix, "output file prefix")->required();
    add_io_flag(gen_cmd, gen_io);

    // stream-split
    auto* split_cmd = app.add_subcommand("stream-split", "split a graph into snowball steps");
    std::string split_graph, split_truth, split_out;
    int split_steps = 10;
    std::uint64_t split_seed = 1;
    CommonIoOpts split_io;
    split_cmd->add_option("--graph", split_graph)->required();
    split_cmd->add_option("--truth", split_truth)->required();
    split_cmd->add_option("--steps", split_steps, "number of snowball steps");
    split_cmd->add_option("--seed", split_seed);
    split_cmd->add_option("--out-dir", split_out)->required();
    add_io_flag(split_cmd, split_io);

    // pretrain
    auto* pre_cmd = app.add_subcommand("pretrain", "pre-train the pair classifier");
    std::string pre_corpus, pre_out = "model.ckpt", pre_trace;
    int pre_synth = 100, pre_epochs = 50;
    std::uint64_t pre_seed = 1;
    double pre_lr = 1e-3, pre_neg = 1.0, pre_lambda = 0.1;
    CommonIoOpts pre_io;
    pre_cmd->add_option("--corpus-dir", pre_corpus,
                        "directory of <name>.edges.tsv/<name>.truth.tsv pairs");
    pre_cmd->add_option("--synth-count", pre_synth,
                        "generate this many corpus graphs when --corpus-dir is absent");
    pre_cmd->add_option("--out-ckpt", pre_out)->required();
    pre_cmd->add_option("--epochs", pre_epochs);
    pre_cmd->add_option("--seed", pre_seed);
    pre_cmd->add_option("--lr", pre_lr, "learning rate");
    pre_cmd->add_option("--neg-ratio", pre_neg, "negatives per positive");
    pre_cmd->add_option("--lambda-mod", pre_lambda, "weight of the modularity term");
    pre_cmd->add_option("--trace-csv", pre_trace, "loss trace output (default <ckpt>.loss.csv)");
    add_io_flag(pre_cmd, pre_io);

    // partition
    auto* part_cmd = app.add_subcommand("partition", "partition one graph");
    std::string part_graph, part_ckpt, part_out, part_report, part_truth;
    std::string part_refiner = "builtin", part_external;
    double part_threshold = 0.5, part_timeout = 10000.0;
    std::uint64_t part_seed = 1;
    CommonIoOpts part_io;
    part_cmd->add_option("--graph", part_graph)->required();
    part_cmd->add_option("--ckpt", part_ckpt)->required();
    part_cmd->add_option("--out-partition", part_out)->required();
    part_cmd->add_option("--report", part_report, "write the run report JSON here");
    part_cmd->add_option("--truth", part_truth, "ground truth for quality metrics");
    part_cmd->add_option("--refiner", part_refiner, "builtin|external");
    part_cmd->add_option("--external-cmd", part_external,
                         "command template with {graph} {init} {out}");
    part_cmd->add_option("--threshold", part_threshold);
    part_cmd->add_option("--seed", part_seed, "refiner seed");
    part_cmd->add_option("--timeout", part_timeout, "external refiner timeout (s)");
    add_io_flag(part_cmd, part_io);

    // stream
    auto* stream_cmd = app.add_subcommand("stream", "run the pipeline over snowball steps");
    std::string stream_manifest, stream_ckpt, stream_out, stream_report;
    std::string stream_refiner = "builtin", stream_external;
    double stream_threshold = 0.5, stream_timeout = 10000.0;
    std::uint64_t stream_seed = 1;
    stream_cmd->add_option("--manifest", stream_manifest)->required();
    stream_cmd->add_option("--ckpt", stream_ckpt)->required();
    stream_cmd->add_option("--out-dir", stream_out)->required();
    stream_cmd->add_option("--report", stream_report, "JSON-lines report stream");
    stream_cmd->add_option("--refiner", stream_refiner, "builtin|external");
    stream_cmd->add_option("--external-cmd", stream_external);
    stream_cmd->add_option("--threshold", stream_threshold);
    stream_cmd->add_option("--seed", stream_seed);
    stream_cmd->add_option("--timeout", stream_timeout);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a partition against ground truth");
    std::string eval_graph, eval_pred, eval_truth;
    CommonIoOpts eval_io;
    eval_cmd->add_option("--graph", eval_graph)->required();
    eval_cmd->add_option("--pred", eval_pred)->required();
    eval_cmd->add_option("--truth", eval_truth)->required();
    add_io_flag(eval_cmd, eval_io);

    // bench-static
    auto* bs_cmd = app.add_subcommand("bench-static", "two-arm static benchmark");
    std::string bs_ckpt, bs_report, bs_scales = "10000,50000";
    int bs_trials = 5;
    std::uint64_t bs_seed = 1;
    double bs_oot = 10000.0;
    bs_cmd->add_option("--ckpt", bs_ckpt)->required();
    bs_cmd->add_option("--scales", bs_scales, "comma-separated node counts");
    bs_cmd->add_option("--trials", bs_trials);
    bs_cmd->add_option("--seed", bs_seed);
    bs_cmd->add_option("--report", bs_report, "JSON-lines output");
    bs_cmd->add_option("--oot", bs_oot, "out-of-time limit (s)");

    // bench-stream
    auto* bst_cmd = app.add_subcommand("bench-stream", "two-arm snowball streaming benchmark");
    std::string bst_ckpt, bst_report;
    std::int64_t bst_n = 100000;
    int bst_steps = 10, bst_trials = 5;
    std::uint64_t bst_seed = 1;
    double bst_oot = 10000.0;
    bst_cmd->add_option("--ckpt", bst_ckpt)->required();
    bst_cmd->add_option("--n", bst_n, "total node count");
    bst_cmd->add_option("--steps", bst_steps);
    bst_cmd->add_option("--trials", bst_trials);
    bst_cmd->add_option("--seed", bst_seed);
    bst_cmd->add_option("--report", bst_report, "JSON-lines output");
    bst_cmd->add_option("--oot", bst_oot);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) {
            return cmd_generate(gen_n, gen_k, gen_ratio, gen_het, gen_deg, gen_exp, gen_seed,
                                gen_prefix, gen_io);
        }
        if (split_cmd->parsed()) {
            return cmd_stream_split(split_graph, split_truth, split_steps, split_seed, split_out,
                                    split_io);
        }
        if (pre_cmd->parsed()) {
            return cmd_pretrain(pre_corpus, pre_synth, pre_out, pre_epochs, pre_seed, pre_lr,
                                pre_neg, pre_lambda, pre_trace, pre_io);
        }
        if (part_cmd->parsed()) {
            return cmd_partition(part_graph, part_ckpt, part_out, part_report, part_truth,
                                 part_refiner, part_external, part_threshold, part_seed,
                                 part_timeout, part_io);
        }
        if (stream_cmd->parsed()) {
            return cmd_stream(stream_manifest, stream_ckpt, stream_out, stream_report,
                              stream_refiner, stream_external, stream_threshold, stream_seed,
                              stream_timeout);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_graph, eval_pred, eval_truth, eval_io);
        }
        if (bs_cmd->parsed()) {
            gpart::BenchSettings settings;
            settings.scales.clear();
            for (const auto& tok : CLI::detail::split(bs_scales, ',')) {
                settings.scales.push_back(std::stoll(tok));
            }
            settings.trials = bs_trials;
            settings.seed = bs_seed;
            settings.oot_s = bs_oot;
            const gpart::ModelCheckpoint ckpt = gpart::load_checkpoint(bs_ckpt);
            const auto rows = gpart::bench_static(ckpt, settings, std::cout);
            write_rows_jsonl(bs_report, rows);
            return 0;
        }
        if (bst_cmd->parsed()) {
            gpart::BenchSettings settings;
            settings.trials = bst_trials;
            settings.seed = bst_seed;
            settings.oot_s = bst_oot;
            const gpart::ModelCheckpoint ckpt = gpart::load_checkpoint(bst_ckpt);
            const auto rows = gpart::bench_stream(ckpt, settings, bst_n, bst_steps, std::cout);
            write_rows_jsonl(bst_report, rows);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
