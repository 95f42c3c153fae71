#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "printwatch/capture.hpp"
#include "printwatch/dataset.hpp"
#include "printwatch/evaluation.hpp"
#include "printwatch/features.hpp"
#include "printwatch/learners.hpp"
#include "printwatch/rng.hpp"
#include "printwatch/selection.hpp"
#include "printwatch/stats.hpp"
#include "printwatch/synthesis.hpp"

namespace {

using namespace printwatch;

const SynthCorpus& corpus_2k() {
    static const SynthCorpus corpus = [] {
        SynthConfig cfg;
        cfg.seed = 1;
        cfg.n_benign = 1200;
        cfg.n_malicious = 800;
        return gen_corpus(cfg, true);
    }();
    return corpus;
}

void BM_ComputeStats(benchmark::State& state) {
    Rng rng(3);
    std::vector<double> series(static_cast<std::size_t>(state.range(0)));
    for (double& v : series) v = std::floor(rng.uniform(0, 1500));
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_stats(series));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeStats)->Arg(64)->Arg(1024)->Arg(16384);

void BM_ExtractFeatures(benchmark::State& state) {
    SynthConfig cfg;
    Rng rng(8);
    // A print-job heavy session with a few hundred packets.
    TcpSession session;
    do {
        session = gen_benign_session(cfg, rng);
    } while (session.packets.size() < 200);
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_features(session));
    }
    state.SetItemsProcessed(state.iterations() * session.packets.size());
}
BENCHMARK(BM_ExtractFeatures);

void BM_ParsePcap(benchmark::State& state) {
    const std::vector<std::uint8_t> bytes = write_pcap(corpus_2k().packets);
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_pcap(bytes));
    }
    state.SetBytesProcessed(state.iterations() * bytes.size());
}
BENCHMARK(BM_ParsePcap);

void BM_Reassemble(benchmark::State& state) {
    const auto& packets = corpus_2k().packets;
    for (auto _ : state) {
        benchmark::DoNotOptimize(reassemble_sessions(packets));
    }
    state.SetItemsProcessed(state.iterations() * packets.size());
}
BENCHMARK(BM_Reassemble);

void BM_TrainTree(benchmark::State& state) {
    const Dataset& ds = corpus_2k().dataset;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train(ModelKind::DecisionTreeC45, ds, {}, 0));
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(BM_TrainTree);

void BM_TrainNaiveBayes(benchmark::State& state) {
    const Dataset& ds = corpus_2k().dataset;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train(ModelKind::NaiveBayes, ds, {}, 0));
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(BM_TrainNaiveBayes);

void BM_RankInfoGain(benchmark::State& state) {
    const Dataset& ds = corpus_2k().dataset;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rank_features(ds, RankMethod::InfoGain));
    }
}
BENCHMARK(BM_RankInfoGain);

void BM_RocAuc(benchmark::State& state) {
    Rng rng(12);
    std::vector<std::pair<double, Label>> scored;
    scored.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
        scored.emplace_back(rng.uniform(),
                            rng.uniform() < 0.4 ? Label::Malicious : Label::Benign);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(roc_auc(scored));
    }
    state.SetItemsProcessed(state.iterations() * scored.size());
}
BENCHMARK(BM_RocAuc);

} // namespace

BENCHMARK_MAIN();
