// semdrift: train per-period word embeddings over a time-stamped corpus and
// track how the pair distance between chosen terms moves across periods.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semdrift/cli.hpp"
#include "semdrift/kernels.hpp"
#include "semdrift/trend.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDegenerate = 2;

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal word-embedding trend tracker"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string config_file;
    app.add_option("--config", config_file, "pipeline config file (key = value lines)");

    // global overrides, applied on top of the config file
    std::string corpus, format, granularity, stopwords, out_dir, arch;
    int vector_size = -1, window = -1, min_count = -1, negatives = -1, epochs = -1, workers = -1,
        jobs = -1;
    double initial_lr = -1.0, final_lr = -1.0, subsample = -1.0;
    std::uint64_t seed = UINT64_MAX;
    app.add_option("--corpus", corpus, "corpus path");
    app.add_option("--format", format, "jsonl|newsgroups_dir");
    app.add_option("--granularity", granularity, "month|year");
    app.add_option("--stopwords", stopwords, "stopword override file");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--arch", arch, "cbow|skipgram");
    app.add_option("--vector-size", vector_size, "embedding dimensions");
    app.add_option("--window", window, "context window");
    app.add_option("--min-count", min_count, "minimum token frequency");
    app.add_option("--negatives", negatives, "negative samples (0 = exact softmax)");
    app.add_option("--initial-lr", initial_lr, "initial learning rate");
    app.add_option("--final-lr", final_lr, "final learning rate");
    app.add_option("--epochs", epochs, "training epochs");
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--workers", workers, "threads per slice (1 = deterministic)");
    app.add_option("--jobs", jobs, "slices trained in parallel");
    app.add_option("--subsample", subsample, "frequent-word subsampling threshold");

    auto* ingest_cmd = app.add_subcommand("ingest", "load corpus, slice it, build token caches");
    auto* train_cmd = app.add_subcommand("train", "train one embedding model per slice");

    auto* trend_cmd = app.add_subcommand("trend", "base-vs-relative pair distances over slices");
    std::string base, terms_csv, slices_csv, mode_name = "word_pair", trend_out;
    trend_cmd->add_option("--base", base, "base term")->required();
    trend_cmd->add_option("--terms", terms_csv, "relative terms, comma-separated")->required();
    trend_cmd->add_option("--slices", slices_csv, "slice labels, comma-separated (default: all)");
    trend_cmd->add_option("--mode", mode_name, "word_pair|centroid_pair");
    trend_cmd->add_option("--out", trend_out, "output path prefix");

    auto* neighbors_cmd = app.add_subcommand("neighbors", "angle-wise nearest neighbors of a term");
    std::string nb_slice, nb_term;
    int nb_k = 10;
    neighbors_cmd->add_option("--slice", nb_slice, "slice label")->required();
    neighbors_cmd->add_option("--term", nb_term, "query term")->required();
    neighbors_cmd->add_option("--k", nb_k, "neighbor count");

    auto* cluster_cmd = app.add_subcommand("cluster", "topic neighborhood + k-means report");
    std::string cl_slice, cl_term;
    int cl_neighborhood = 100, cl_k = 1;
    std::uint64_t cl_seed = 1;
    cluster_cmd->add_option("--slice", cl_slice, "slice label")->required();
    cluster_cmd->add_option("--term", cl_term, "seed term")->required();
    cluster_cmd->add_option("--neighborhood", cl_neighborhood, "neighborhood size");
    cluster_cmd->add_option("--kmeans-k", cl_k, "cluster count");
    cluster_cmd->add_option("--kmeans-seed", cl_seed, "k-means seed");

    auto* projection_cmd = app.add_subcommand("projection", "2-D scatter of term vectors (PCA)");
    std::string pj_slice, pj_terms, pj_out;
    projection_cmd->add_option("--slice", pj_slice, "slice label")->required();
    projection_cmd->add_option("--terms", pj_terms, "terms, comma-separated")->required();
    projection_cmd->add_option("--out", pj_out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints message or requested help
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        semdrift::cli::PipelineConfig config;
        if (!config_file.empty()) config = semdrift::cli::PipelineConfig::from_file(config_file);
        if (!corpus.empty()) config.apply_line("corpus", corpus);
        if (!format.empty()) config.apply_line("format", format);
        if (!granularity.empty()) config.apply_line("granularity", granularity);
        if (!stopwords.empty()) config.apply_line("stopwords", stopwords);
        if (!out_dir.empty()) config.apply_line("out_dir", out_dir);
        if (!arch.empty()) config.apply_line("arch", arch);
        if (vector_size >= 0) config.train.vector_size = vector_size;
        if (window >= 0) config.train.window = window;
        if (min_count >= 0) config.train.min_count = min_count;
        if (negatives >= 0) config.train.negatives = negatives;
        if (initial_lr >= 0.0) config.train.initial_lr = initial_lr;
        if (final_lr >= 0.0) config.train.final_lr = final_lr;
        if (epochs >= 0) config.train.epochs = epochs;
        if (seed != UINT64_MAX) config.train.seed = seed;
        if (workers >= 0) config.train.workers = workers;
        if (jobs >= 0) config.jobs = jobs;
        if (subsample >= 0.0) config.train.subsample_threshold = subsample;
        if (const char* env = std::getenv("SEMDRIFT_OUT_DIR")) config.out_dir = env;

        if (*ingest_cmd) {
            const auto result = semdrift::cli::cmd_ingest(config);
            if (result.cache_hit) std::cout << "cache hit, nothing to do\n";
            for (const auto& slice : result.slices) {
                std::cout << slice.label << ": " << slice.documents << " docs, vocab "
                          << slice.vocab_size << "\n";
            }
            if (result.skipped_documents > 0) {
                std::cout << "skipped " << result.skipped_documents << " unparseable document(s)\n";
            }
        } else if (*train_cmd) {
            const auto result = semdrift::cli::cmd_train(config);
            for (const auto& label : result.cached) std::cout << label << ": cached\n";
            for (const auto& label : result.trained) {
                std::cout << label << ": trained -> " << config.model_path(label).string() << "\n";
            }
            std::cout << "backend: " << semdrift::kernels::backend_name(semdrift::kernels::active_backend())
                      << "\n";
        } else if (*trend_cmd) {
            const auto mode = semdrift::trend::parse_trend_mode(mode_name);
            if (!mode) {
                std::cerr << "error: unknown trend mode: " << mode_name << "\n";
                return kExitUsage;
            }
            const auto artifacts = semdrift::cli::cmd_trend(config, base, split_csv(terms_csv),
                                                            split_csv(slices_csv), *mode, trend_out);
            std::cout << artifacts.csv.string() << "\n" << artifacts.json.string() << "\n";
            if (!artifacts.svg.empty()) std::cout << artifacts.svg.string() << "\n";
        } else if (*neighbors_cmd) {
            std::cout << semdrift::cli::cmd_neighbors(config, nb_slice, nb_term, nb_k);
        } else if (*cluster_cmd) {
            std::cout << semdrift::cli::cmd_cluster(config, cl_slice, cl_term, cl_neighborhood,
                                                    cl_k, cl_seed);
        } else if (*projection_cmd) {
            const auto model = semdrift::cli::load_slice_model(config, pj_slice);
            semdrift::trend::export_projection_svg(model, split_csv(pj_terms), pj_out,
                                                   config.config_hash());
            std::cout << pj_out << "\n";
        }
        return kExitOk;
    } catch (const semdrift::trend::DegenerateQueryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
