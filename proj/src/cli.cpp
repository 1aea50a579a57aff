#include "semdrift/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "semdrift/cluster.hpp"
#include "semdrift/preprocess.hpp"

namespace semdrift::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

nlohmann::json read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("no manifest at " + path.string() + " (run ingest first)");
    nlohmann::json doc;
    in >> doc;
    return doc;
}

std::uint64_t derive_slice_seed(std::uint64_t base_seed, const std::string& label) {
    return mix_seed(base_seed ^ std::stoull(fnv1a_hash(label), nullptr, 16));
}

}  // namespace

std::string fnv1a_hash(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void PipelineConfig::apply_line(const std::string& key, const std::string& value) {
    if (key == "corpus") corpus_path = value;
    else if (key == "format") {
        const auto f = corpus::parse_corpus_format(value);
        if (!f) throw std::runtime_error("unknown corpus format: " + value);
        format = *f;
    } else if (key == "granularity") {
        const auto g = corpus::parse_granularity(value);
        if (!g) throw std::runtime_error("unknown granularity: " + value);
        granularity = *g;
    } else if (key == "stopwords") stopword_file = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "jobs") jobs = std::stoi(value);
    else if (key == "arch" || key == "architecture") {
        const auto a = embedding::parse_architecture(value);
        if (!a) throw std::runtime_error("unknown architecture: " + value);
        train.architecture = *a;
    } else if (key == "vector_size") train.vector_size = std::stoi(value);
    else if (key == "window") train.window = std::stoi(value);
    else if (key == "min_count") train.min_count = std::stoi(value);
    else if (key == "negatives") train.negatives = std::stoi(value);
    else if (key == "initial_lr") train.initial_lr = std::stod(value);
    else if (key == "final_lr") train.final_lr = std::stod(value);
    else if (key == "epochs") train.epochs = std::stoi(value);
    else if (key == "seed") train.seed = std::stoull(value);
    else if (key == "workers") train.workers = std::stoi(value);
    else if (key == "subsample_threshold") train.subsample_threshold = std::stod(value);
    else throw std::runtime_error("unknown config key: " + key);
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    PipelineConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        }
        config.apply_line(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
    return config;
}

std::string PipelineConfig::serialize() const {
    // jobs and out_dir are execution details, not provenance
    std::ostringstream out;
    out << "corpus = " << corpus_path.string() << '\n';
    out << "format = " << (format == corpus::CorpusFormat::jsonl ? "jsonl" : "newsgroups_dir") << '\n';
    out << "granularity = " << corpus::granularity_name(granularity) << '\n';
    out << "stopwords = " << stopword_file.string() << '\n';
    out << "arch = " << embedding::architecture_name(train.architecture) << '\n';
    out << "vector_size = " << train.vector_size << '\n';
    out << "window = " << train.window << '\n';
    out << "min_count = " << train.min_count << '\n';
    out << "negatives = " << train.negatives << '\n';
    out << "initial_lr = " << train.initial_lr << '\n';
    out << "final_lr = " << train.final_lr << '\n';
    out << "epochs = " << train.epochs << '\n';
    out << "seed = " << train.seed << '\n';
    out << "workers = " << train.workers << '\n';
    out << "subsample_threshold = " << train.subsample_threshold << '\n';
    return out.str();
}

std::string PipelineConfig::config_hash() const { return fnv1a_hash(serialize()); }

IngestResult cmd_ingest(const PipelineConfig& config) {
    const std::string hash = config.config_hash();
    IngestResult result;

    // cache hit: manifest with the same hash and all cache files present
    if (std::filesystem::exists(config.manifest_path())) {
        try {
            const auto manifest = read_manifest(config.manifest_path());
            if (manifest.value("config_hash", "") == hash) {
                bool complete = true;
                IngestResult cached;
                cached.skipped_documents = manifest.value("skipped_documents", std::size_t{0});
                for (const auto& slice : manifest.at("slices")) {
                    const std::string label = slice.at("label").get<std::string>();
                    if (!std::filesystem::exists(config.cache_path(label))) {
                        complete = false;
                        break;
                    }
                    cached.slices.push_back(SliceSummary{label, slice.at("documents").get<std::size_t>(),
                                                         slice.at("vocab_size").get<int>()});
                }
                if (complete) {
                    cached.cache_hit = true;
                    return cached;
                }
            }
        } catch (const std::exception&) {
            // unreadable manifest: fall through and rebuild
        }
    }

    const auto store = corpus::ingest_documents(config.corpus_path, config.format);
    result.skipped_documents = store.skipped;
    const auto slices = corpus::slice_by_period(store, config.granularity);

    const preprocess::StopwordSet stopwords = config.stopword_file.empty()
                                                  ? preprocess::default_stopwords()
                                                  : preprocess::load_stopwords(config.stopword_file);

    std::filesystem::create_directories(config.out_dir / "cache");

    nlohmann::json manifest;
    manifest["config_hash"] = hash;
    manifest["corpus"] = config.corpus_path.string();
    manifest["format"] = config.format == corpus::CorpusFormat::jsonl ? "jsonl" : "newsgroups_dir";
    manifest["granularity"] = corpus::granularity_name(config.granularity);
    manifest["skipped_documents"] = store.skipped;
    manifest["slices"] = nlohmann::json::array();

    for (const auto& slice : slices) {
        std::vector<preprocess::TokenSequence> sequences;
        sequences.reserve(slice.documents.size());
        for (const auto& doc : slice.documents) {
            sequences.push_back(preprocess::preprocess_document(doc, stopwords));
        }

        preprocess::Vocabulary vocab;
        std::vector<std::vector<int>> encoded;
        try {
            vocab = preprocess::build_vocabulary(sequences, config.train.min_count);
            encoded.reserve(sequences.size());
            for (const auto& seq : sequences) encoded.push_back(preprocess::encode(seq, vocab));
        } catch (const std::exception&) {
            // nothing survives min_count in this slice; keep an empty cache
            vocab = preprocess::Vocabulary{};
            encoded.assign(sequences.size(), {});
        }
        preprocess::write_slice_cache(config.cache_path(slice.label), vocab, encoded);

        nlohmann::json entry;
        entry["label"] = slice.label;
        entry["documents"] = slice.documents.size();
        entry["vocab_size"] = vocab.size();
        entry["cache"] = config.cache_path(slice.label).string();
        manifest["slices"].push_back(std::move(entry));
        result.slices.push_back(SliceSummary{slice.label, slice.documents.size(), vocab.size()});
    }

    std::ofstream out(config.manifest_path());
    if (!out) throw std::runtime_error("cannot write manifest: " + config.manifest_path().string());
    out << manifest.dump(2) << '\n';
    return result;
}

std::vector<std::string> manifest_slice_labels(const PipelineConfig& config) {
    const auto manifest = read_manifest(config.manifest_path());
    std::vector<std::string> labels;
    for (const auto& slice : manifest.at("slices")) labels.push_back(slice.at("label").get<std::string>());
    return labels;
}

TrainResult cmd_train(const PipelineConfig& config) {
    config.train.validate();
    const std::string hash = config.config_hash();
    const auto manifest = read_manifest(config.manifest_path());
    if (manifest.value("config_hash", "") != hash) {
        std::cerr << "warning: manifest was built with a different config (hash "
                  << manifest.value("config_hash", "?") << " != " << hash << "); re-run ingest\n";
    }

    std::filesystem::create_directories(config.out_dir / "models");

    struct Job {
        std::string label;
        int vocab_size;
    };
    std::vector<Job> jobs;
    TrainResult result;
    for (const auto& slice : manifest.at("slices")) {
        jobs.push_back(Job{slice.at("label").get<std::string>(), slice.at("vocab_size").get<int>()});
    }

    const auto train_one = [&](const Job& job) {
        const auto cache = preprocess::read_slice_cache(config.cache_path(job.label));
        embedding::TrainConfig train_config = config.train;
        train_config.seed = derive_slice_seed(config.train.seed, job.label);
        const auto model =
            embedding::train_slice(cache.documents, cache.vocab, train_config, job.label);
        embedding::save_model(model, config.model_path(job.label), hash);
    };

    std::vector<Job> to_train;
    for (const auto& job : jobs) {
        if (job.vocab_size == 0) {
            std::cerr << "warning: slice " << job.label
                      << " has an empty vocabulary after min_count filtering, skipped\n";
            result.skipped_empty.push_back(job.label);
            continue;
        }
        const auto path = config.model_path(job.label);
        if (std::filesystem::exists(path) && embedding::read_model_provenance(path) == hash) {
            result.cached.push_back(job.label);
            continue;
        }
        to_train.push_back(job);
    }

    if (result.skipped_empty.size() == jobs.size()) {
        throw std::runtime_error("every slice has an empty vocabulary; nothing to train");
    }

    if (config.jobs > 1 && to_train.size() > 1) {
        std::vector<std::future<void>> futures;
        futures.reserve(to_train.size());
        std::atomic<std::size_t> next{0};
        const int lanes = std::min<int>(config.jobs, static_cast<int>(to_train.size()));
        for (int lane = 0; lane < lanes; ++lane) {
            futures.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next.fetch_add(1); i < to_train.size(); i = next.fetch_add(1)) {
                    train_one(to_train[i]);
                }
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (const auto& job : to_train) train_one(job);
    }
    for (const auto& job : to_train) result.trained.push_back(job.label);
    return result;
}

embedding::EmbeddingModel load_slice_model(const PipelineConfig& config, const std::string& label) {
    const auto path = config.model_path(label);
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("no model for slice label: " + label);
    }
    const std::string recorded = embedding::read_model_provenance(path);
    if (!recorded.empty() && recorded != config.config_hash()) {
        std::cerr << "warning: model " << path.string()
                  << " was trained with a different config (hash " << recorded << ")\n";
    }
    return embedding::load_model(path);
}

TrendArtifacts cmd_trend(const PipelineConfig& config, const std::string& base_term,
                         const std::vector<std::string>& relative_terms,
                         std::vector<std::string> slice_labels, trend::TrendMode mode,
                         const std::filesystem::path& out_prefix) {
    const auto all_labels = manifest_slice_labels(config);
    if (slice_labels.empty()) {
        for (const auto& label : all_labels) {
            if (std::filesystem::exists(config.model_path(label))) slice_labels.push_back(label);
        }
        if (slice_labels.empty()) throw std::runtime_error("no trained models found (run train first)");
    } else {
        for (const auto& label : slice_labels) {
            if (std::find(all_labels.begin(), all_labels.end(), label) == all_labels.end()) {
                std::string available;
                for (const auto& l : all_labels) {
                    if (!available.empty()) available += ", ";
                    available += l;
                }
                throw std::runtime_error("unknown slice label: " + label +
                                         " (available: " + available + ")");
            }
        }
        // chronological regardless of request order; manifest order is chronological
        std::vector<std::string> ordered;
        for (const auto& label : all_labels) {
            if (std::find(slice_labels.begin(), slice_labels.end(), label) != slice_labels.end()) {
                ordered.push_back(label);
            }
        }
        slice_labels = std::move(ordered);
    }

    std::map<std::string, embedding::EmbeddingModel> models;
    for (const auto& label : slice_labels) {
        models.emplace(label, load_slice_model(config, label));
    }

    trend::TrendQuery query;
    query.base_term = base_term;
    query.relative_terms = relative_terms;
    query.slice_labels = slice_labels;
    query.mode = mode;

    trend::TrendTable table = trend::compute_trend(models, query);
    table.provenance = config.config_hash();

    std::filesystem::path prefix = out_prefix;
    if (prefix.empty()) {
        prefix = config.out_dir / ("trend_" + table.query.base_term);
    }
    if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());

    TrendArtifacts artifacts;
    artifacts.csv = prefix.string() + ".csv";
    artifacts.json = prefix.string() + ".json";
    trend::export_table_csv(table, artifacts.csv);
    trend::export_table_json(table, artifacts.json);
    if (table.query.slice_labels.size() >= 2) {
        artifacts.svg = prefix.string() + ".svg";
        trend::export_plot_svg(table, artifacts.svg);
    } else {
        std::cerr << "note: single-slice query, skipping the trend plot\n";
    }
    return artifacts;
}

std::string cmd_neighbors(const PipelineConfig& config, const std::string& slice_label,
                          const std::string& term, int k) {
    const auto model = load_slice_model(config, slice_label);
    const std::string normalized = preprocess::normalize_term(term);
    const int capped = std::min(k, model.vocab_size() - 1);
    const auto neighbors = embedding::nearest_neighbors(model, normalized, capped);

    nlohmann::json doc;
    doc["config_hash"] = config.config_hash();
    doc["slice"] = slice_label;
    doc["term"] = normalized;
    doc["neighbors"] = nlohmann::json::array();
    for (const auto& [token, cosine] : neighbors) {
        doc["neighbors"].push_back({{"token", token}, {"cosine", cosine}});
    }
    return doc.dump(2) + "\n";
}

std::string cmd_cluster(const PipelineConfig& config, const std::string& slice_label,
                        const std::string& term, int neighborhood_size, int kmeans_k,
                        std::uint64_t kmeans_seed) {
    const auto model = load_slice_model(config, slice_label);
    const std::string normalized = preprocess::normalize_term(term);
    const auto topic =
        cluster::topic_cluster(model, normalized, neighborhood_size, kmeans_k, kmeans_seed);

    nlohmann::json doc;
    doc["config_hash"] = config.config_hash();
    doc["slice"] = slice_label;
    doc["seed_term"] = normalized;
    doc["neighborhood"] = nlohmann::json::array();
    for (const auto& [token, cosine] : topic.neighborhood) {
        doc["neighborhood"].push_back({{"token", token}, {"cosine", cosine}});
    }
    doc["k"] = topic.clustering.k;
    doc["iterations"] = topic.clustering.iterations;
    doc["converged"] = topic.clustering.converged;
    doc["objective"] = topic.clustering.objective;
    doc["objective_trace"] = topic.clustering.objective_trace;
    doc["assignments"] = topic.clustering.assignments;
    doc["centroids"] = nlohmann::json::array();
    for (int c = 0; c < topic.clustering.k; ++c) {
        const auto centroid = topic.clustering.centroid(c);
        doc["centroids"].push_back(std::vector<double>(centroid.begin(), centroid.end()));
    }
    doc["centroid_of_topic"] = topic.centroid_of_topic;
    return doc.dump(2) + "\n";
}

}  // namespace semdrift::cli
