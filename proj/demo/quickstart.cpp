// Minimal end-to-end walkthrough: build a small training corpus, pre-train a
// tiny model, then partition a fresh graph and compare against the planted
// blocks. Runs in well under a minute.

#include <cstdio>

#include "gpart/bench.hpp"
#include "gpart/infer.hpp"
#include "gpart/pretrain.hpp"
#include "gpart/sbm.hpp"

int main() {
    using namespace gpart;

    // a handful of small graphs with varied topology
    std::vector<std::pair<Graph, Partition>> corpus;
    ParamRanges ranges;
    ranges.n = {300, 1200};
    for (int i = 0; i < 10; ++i) {
        GeneratedGraph gen = generate(sample_params(ranges, derive_seed(7, i)));
        corpus.emplace_back(std::move(gen.graph), std::move(gen.truth));
    }

    ModelConfig config;
    config.k = 16;
    config.projection_seed = derive_seed(7, 100);
    TrainHyper hyper;
    hyper.epochs = 15;
    hyper.seed = derive_seed(7, 101);
    hyper.lambda_mod = 0.1;
    const TrainResult trained = pretrain(corpus, config, hyper);
    std::printf("pre-training: %zu graphs, loss %.4f -> %.4f\n", corpus.size(),
                trained.epoch_loss.front(), trained.epoch_loss.back());

    // a fresh, larger graph the model has never seen
    GeneratorParams p;
    p.n = 5000;
    p.avg_degree = 40.0;
    p.seed = 99;
    const GeneratedGraph target = generate(p);

    RefinerConfig refiner;
    refiner.seed = 5;
    const InferResult result = generalize_and_refine(target.graph, trained.checkpoint, refiner);
    const QualityMetrics q = compute_quality(target.graph, result.partition, target.truth);

    std::printf("target graph: N=%d |E|=%lld planted K=%d\n", target.graph.n(),
                static_cast<long long>(target.graph.num_edges()), target.truth.k);
    std::printf("initial partition: %lld super-nodes -> refined K=%d\n",
                static_cast<long long>(result.report.n_super), result.report.k_final);
    std::printf("quality: AC=%.3f ARI=%.3f F1=%.3f modularity=%.3f\n", q.ac, q.ari, q.f1,
                q.modularity);
    std::printf("timings: feat=%.3fs ffp=%.3fs init=%.3fs refine=%.3fs total=%.3fs\n",
                result.report.timings.feat_s, result.report.timings.ffp_s,
                result.report.timings.init_s, result.report.timings.refine_s,
                result.report.timings.total_s);
    return 0;
}
