// drrag: two-stage retrieval QA engine.
//
// Subcommands: ingest (build on-disk indexes), run (answer a dataset with a
// retrieval strategy), eval (score a results file), gen-pairs (classifier
// training data), synth (synthetic two-hop benchmark), recompute (report
// self-check).
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 backend transport
// error.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "drrag/classifier.hpp"
#include "drrag/dataset.hpp"
#include "drrag/errors.hpp"
#include "drrag/eval.hpp"
#include "drrag/index_store.hpp"
#include "drrag/llm_client.hpp"
#include "drrag/pipeline.hpp"
#include "drrag/synth.hpp"

namespace fs = std::filesystem;
using namespace drrag;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_writable(const std::string& path, bool force) {
    if (!force && fs::exists(path)) {
        throw DataError("refusing to overwrite existing file " + path + " (pass --force)");
    }
}

bool hermetic_selector(const std::string& classifier_sel, const std::string& llm_sel) {
    bool classifier_ok = classifier_sel.empty() || classifier_sel == "lexical" ||
                         classifier_sel == "always-positive" || classifier_sel == "always-negative";
    bool llm_ok = llm_sel == "mock" || llm_sel.rfind("mock:", 0) == 0;
    return classifier_ok && llm_ok;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
    std::string corpus;
    std::string out_dir;
    std::string embeddings;
    int dim = static_cast<int>(HashedBowEmbedder::kDefaultDimension);
};

int cmd_ingest(const IngestArgs& args) {
    HashedBowEmbedder embedder(static_cast<std::size_t>(args.dim));
    std::optional<std::string> sidecar;
    if (!args.embeddings.empty()) sidecar = args.embeddings;
    IngestResult result = write_index(args.corpus, args.out_dir, sidecar, embedder);
    if (result.up_to_date) {
        std::cout << "up to date: " << args.out_dir << "\n";
    } else {
        std::cout << "indexed " << result.manifest.doc_count << " docs, dim "
                  << result.manifest.dimension << ", embedder " << result.manifest.embedder_id
                  << " -> " << args.out_dir << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string strategy = "sm";
    int k = 4;
    int k1 = 0;
    int k2 = 0;
    double threshold = 0.5;
    bool cis_full_pairwise = false;
    std::string dataset;
    std::string index_dir;
    std::string classifier;
    std::string llm = "mock";
    std::string out;
    std::uint64_t seed = 0;  // reserved for stochastic backends; runs are deterministic
    int jobs = 1;
    bool keep_going = false;
    bool force = false;
};

int cmd_run(const RunArgs& args) {
    PipelineConfig config;
    config.strategy = strategy_from_string(args.strategy);
    config.k = args.k;
    config.k1 = args.k1;
    config.k2 = args.k2;
    config.classifier_threshold = args.threshold;
    config.cis_full_pairwise = args.cis_full_pairwise;
    config = config.normalized();

    if (needs_classifier(config.strategy) && args.classifier.empty()) {
        throw UsageError(std::string(strategy_name(config.strategy)) +
                         " requires --classifier (lexical or http:URL)");
    }

    ensure_writable(args.out, args.force);

    SearchIndex index = load_index(args.index_dir);
    std::vector<QueryRecord> dataset = load_dataset(args.dataset);

    std::shared_ptr<ClassifierBackend> classifier;
    if (!args.classifier.empty()) classifier = make_classifier(args.classifier);
    std::shared_ptr<LlmBackend> llm = make_llm(args.llm);

    // Hermetic backends record zero wall time so repeated runs are
    // byte-identical; timing is only meaningful against live backends.
    bool hermetic = hermetic_selector(args.classifier, args.llm);

    struct Slot {
        std::optional<AnswerResult> result;
        std::string error;
        bool transport = false;
    };
    std::vector<Slot> slots(dataset.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= dataset.size() || abort.load()) return;
            try {
                slots[i].result =
                    answer_query(dataset[i], config, index, classifier.get(), *llm);
            } catch (const TransportError& e) {
                slots[i].error = e.what();
                slots[i].transport = true;
                if (!args.keep_going) abort.store(true);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
                if (!args.keep_going) abort.store(true);
            }
        }
    };

    int jobs = std::max(1, args.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    bool any_transport = false;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].error.empty()) {
            if (!args.keep_going) {
                if (slots[i].transport) throw TransportError(slots[i].error);
                throw DataError(slots[i].error);
            }
            any_transport = any_transport || slots[i].transport;
        }
    }

    // Aggregate in query-id order regardless of completion order.
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dataset[a].query_id < dataset[b].query_id;
    });

    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + args.out);
    std::size_t failed = 0;
    for (std::size_t i : order) {
        if (slots[i].result) {
            AnswerResult& result = *slots[i].result;
            if (hermetic) result.trace.wall_time_ms = 0.0;
            out << result_record_json(result).dump() << "\n";
        } else {
            ++failed;
            nlohmann::json j{{"query_id", dataset[i].query_id}, {"error", slots[i].error}};
            out << j.dump() << "\n";
        }
    }
    std::cout << "wrote " << (dataset.size() - failed) << "/" << dataset.size() << " results to "
              << args.out << "\n";
    if (failed > 0) return any_transport ? 3 : 2;
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string results;
    std::string dataset;
    std::string baseline;
    std::string out;
    bool force = false;
};

int cmd_eval(const EvalArgs& args) {
    EvalReport report = evaluate_run(args.results, args.dataset);
    if (!args.baseline.empty()) {
        EvalReport base = evaluate_run(args.baseline, args.dataset);
        apply_baseline(report, base);
    }
    std::cout << report_table(report);
    if (!args.out.empty()) {
        ensure_writable(args.out, args.force);
        std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + args.out);
        out << report_to_json(report).dump(2) << "\n";
        std::cout << "report written to " << args.out << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gen-pairs

struct GenPairsArgs {
    std::string dataset;
    std::string corpus;
    std::string ratio = "1:1";
    std::uint64_t seed = 0;
    std::string out;
    bool force = false;
};

int cmd_gen_pairs(const GenPairsArgs& args) {
    ensure_writable(args.out, args.force);
    PairGenOptions options;
    parse_ratio(args.ratio, options.ratio_pos, options.ratio_neg);
    options.seed = args.seed;

    CorpusHandle corpus = ingest_corpus(args.corpus);
    std::vector<QueryRecord> dataset = load_dataset(args.dataset);

    PairGenSummary summary;
    std::vector<TrainingPair> pairs = gen_training_pairs(dataset, corpus, options, &summary);

    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + args.out);
    for (const TrainingPair& pair : pairs) {
        nlohmann::json j{{"query", pair.query},
                         {"doc_a", pair.doc_a},
                         {"doc_b", pair.doc_b},
                         {"label", pair.positive ? "positive" : "negative"}};
        out << j.dump() << "\n";
    }
    std::cout << "pairs=" << pairs.size() << " positives=" << summary.positives
              << " neg_gold_distractor=" << summary.neg_gold_distractor
              << " neg_distractor_distractor=" << summary.neg_distractor_distractor
              << " skipped=" << summary.skipped_records
              << " shortfall=" << summary.negative_shortfall << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    int queries = 100;
    int distractors = 3;
    std::uint64_t seed = 0;
    int bridge_pool = 0;
    int vocab_size = 0;
    std::string out_corpus;
    std::string out_dataset;
    bool force = false;
};

int cmd_synth(const SynthArgs& args) {
    ensure_writable(args.out_corpus, args.force);
    ensure_writable(args.out_dataset, args.force);
    SynthSpec spec;
    spec.num_queries = args.queries;
    spec.distractors_per_query = args.distractors;
    spec.seed = args.seed;
    spec.bridge_entity_pool = args.bridge_pool;
    spec.vocab_size = args.vocab_size;
    SynthData data = generate(spec);
    write_corpus_jsonl(data.corpus, args.out_corpus);
    write_dataset_jsonl(data.dataset, args.out_dataset);
    std::cout << "generated " << data.corpus.size() << " docs, " << data.dataset.size()
              << " queries\n";
    if (data.margin_violations > 0) {
        std::cout << "note: " << data.margin_violations
                  << " queries did not satisfy the retrieval-margin checks within the "
                     "resampling budget\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// recompute

int cmd_recompute(const std::string& report_path) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) throw DataError("cannot open report: " + report_path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("malformed report JSON: " + report_path);
    EvalReport report = report_from_json(j);

    double em = 0, f1 = 0, acc = 0, recall = 0, context = 0, steps = 0, time = 0;
    std::size_t recall_rows = 0;
    for (const PerQueryEval& row : report.per_query) {
        em += row.em;
        f1 += row.f1;
        acc += row.acc;
        context += static_cast<double>(row.context_size);
        steps += static_cast<double>(row.llm_calls);
        time += row.wall_time_ms;
        if (row.recall) {
            recall += *row.recall;
            ++recall_rows;
        }
    }
    double n = static_cast<double>(report.per_query.size());
    EvalReport check;
    if (n > 0) {
        check.em = 100.0 * em / n;
        check.f1 = 100.0 * f1 / n;
        check.acc = 100.0 * acc / n;
        check.actual_numbers = context / n;
        check.steps = steps / n;
        check.time_per_query_ms = time / n;
    }
    if (recall_rows > 0) check.recall_rate = 100.0 * recall / static_cast<double>(recall_rows);

    bool ok = check.em == report.em && check.f1 == report.f1 && check.acc == report.acc &&
              check.recall_rate == report.recall_rate &&
              check.actual_numbers == report.actual_numbers && check.steps == report.steps &&
              check.time_per_query_ms == report.time_per_query_ms;
    check.query_count = report.per_query.size();
    std::cout << report_table(check);
    if (!ok) {
        std::cerr << "recomputed aggregates do not match the stored header\n";
        return 2;
    }
    std::cout << "aggregates verified\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drrag: two-stage retrieval QA engine"};
    app.require_subcommand(1);

    // Config file (flat INI mirroring flag names, [subcommand] sections);
    // flags take precedence over the file, the file over defaults.
    const char* env_config = std::getenv("DRRAG_CONFIG");
    app.set_config("--config", env_config ? env_config : "",
                   "Config file (also via DRRAG_CONFIG)", false);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Build on-disk indexes from a corpus");
    ingest->add_option("--corpus", ingest_args.corpus, "Corpus JSONL path")->required();
    ingest->add_option("--out", ingest_args.out_dir, "Index directory")->required();
    ingest->add_option("--embeddings", ingest_args.embeddings,
                       "Precomputed document embedding sidecar JSONL");
    ingest->add_option("--dim", ingest_args.dim, "Embedding dimension")
        ->default_val(static_cast<int>(HashedBowEmbedder::kDefaultDimension));

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a retrieval strategy over a dataset");
    run->add_option("--strategy", run_args.strategy, "bm25 | sm | qdc | cis | cfs")->required();
    run->add_option("--k", run_args.k, "Total context budget")->required();
    run->add_option("--k1", run_args.k1, "First-stage count (default: ceil(k/2))");
    run->add_option("--k2", run_args.k2, "Second-stage depth per parent (default: k - k1)");
    run->add_option("--threshold", run_args.threshold, "Classifier threshold in [0,1]")
        ->default_val(0.5);
    run->add_flag("--cis-full-pairwise", run_args.cis_full_pairwise,
                  "CIS variant: classify all context pairs, first stage removable");
    run->add_option("--dataset", run_args.dataset, "Dataset JSONL path")->required();
    run->add_option("--index", run_args.index_dir, "Index directory from `drrag ingest`")
        ->required();
    run->add_option("--classifier", run_args.classifier,
                    "lexical | http:URL | always-positive | always-negative");
    run->add_option("--llm", run_args.llm, "mock | mock:FIXTURE | http:URL")->default_val("mock");
    run->add_option("--out", run_args.out, "Results JSONL path")->required();
    run->add_option("--seed", run_args.seed, "Run seed (reserved for stochastic backends)")
        ->default_val(0);
    run->add_option("--jobs", run_args.jobs, "Concurrent queries")->default_val(1);
    run->add_flag("--keep-going", run_args.keep_going,
                  "Record per-query failures as error rows instead of aborting");
    run->add_flag("--force", run_args.force, "Overwrite an existing output file");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Score a results file against its dataset");
    eval->add_option("--results", eval_args.results, "Results JSONL path")->required();
    eval->add_option("--dataset", eval_args.dataset, "Dataset JSONL path")->required();
    eval->add_option("--baseline", eval_args.baseline,
                     "Baseline results JSONL for normalized Step/Time columns");
    eval->add_option("--out", eval_args.out, "Write the JSON report here");
    eval->add_flag("--force", eval_args.force, "Overwrite an existing report");

    GenPairsArgs pairs_args;
    auto* pairs = app.add_subcommand("gen-pairs", "Generate classifier training pairs");
    pairs->add_option("--dataset", pairs_args.dataset, "Dataset JSONL path")->required();
    pairs->add_option("--corpus", pairs_args.corpus, "Corpus JSONL path")->required();
    pairs->add_option("--ratio", pairs_args.ratio, "positive:negative ratio")->default_val("1:1");
    pairs->add_option("--seed", pairs_args.seed, "Sampling seed")->default_val(0);
    pairs->add_option("--out", pairs_args.out, "Pairs JSONL path")->required();
    pairs->add_flag("--force", pairs_args.force, "Overwrite an existing output file");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-hop benchmark");
    synth->add_option("--queries", synth_args.queries, "Number of queries")->default_val(100);
    synth->add_option("--distractors", synth_args.distractors, "Distractors per query")
        ->default_val(3);
    synth->add_option("--seed", synth_args.seed, "Generation seed")->default_val(0);
    synth->add_option("--bridge-pool", synth_args.bridge_pool,
                      "Bridge entity pool size (default: one per query)");
    synth->add_option("--vocab-size", synth_args.vocab_size,
                      "Base words drawn from the built-in list (default: all)");
    synth->add_option("--out-corpus", synth_args.out_corpus, "Corpus JSONL path")->required();
    synth->add_option("--out-dataset", synth_args.out_dataset, "Dataset JSONL path")->required();
    synth->add_flag("--force", synth_args.force, "Overwrite existing output files");

    std::string report_path;
    auto* recompute =
        app.add_subcommand("recompute", "Re-derive report aggregates from per-query rows");
    recompute->add_option("--report", report_path, "Report JSON from `drrag eval --out`")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(ingest_args);
        if (app.got_subcommand(run)) return cmd_run(run_args);
        if (app.got_subcommand(eval)) return cmd_eval(eval_args);
        if (app.got_subcommand(pairs)) return cmd_gen_pairs(pairs_args);
        if (app.got_subcommand(synth)) return cmd_synth(synth_args);
        if (app.got_subcommand(recompute)) return cmd_recompute(report_path);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
