#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semdrift/corpus.hpp"
#include "semdrift/embedding.hpp"
#include "semdrift/trend.hpp"

namespace semdrift::cli {

// Whole-pipeline configuration; every produced artifact records its hash so
// stale caches and models are detectable.
struct PipelineConfig {
    std::filesystem::path corpus_path;
    corpus::CorpusFormat format = corpus::CorpusFormat::jsonl;
    corpus::Granularity granularity = corpus::Granularity::month;
    std::filesystem::path stopword_file;  // empty selects the built-in list
    embedding::TrainConfig train;
    std::filesystem::path out_dir = "out";
    int jobs = 1;  // slice-level training parallelism

    // "key = value" lines, '#' comments
    static PipelineConfig from_file(const std::filesystem::path& path);
    void apply_line(const std::string& key, const std::string& value);

    std::string serialize() const;    // canonical key=value form
    std::string config_hash() const;  // FNV-1a 64 over serialize()

    std::filesystem::path manifest_path() const { return out_dir / "manifest.json"; }
    std::filesystem::path cache_path(const std::string& label) const {
        return out_dir / "cache" / (label + ".tokens");
    }
    std::filesystem::path model_path(const std::string& label) const {
        return out_dir / "models" / (label + ".vec");
    }
};

struct SliceSummary {
    std::string label;
    std::size_t documents = 0;
    int vocab_size = 0;
};

struct IngestResult {
    std::vector<SliceSummary> slices;
    std::size_t skipped_documents = 0;
    bool cache_hit = false;
};

// ingest + slice + preprocess: writes one token cache per slice and the
// manifest. A manifest with a matching config hash short-circuits the rerun.
IngestResult cmd_ingest(const PipelineConfig& config);

struct TrainResult {
    std::vector<std::string> trained;  // slice labels with fresh models
    std::vector<std::string> skipped_empty;
    std::vector<std::string> cached;
};

// trains one model per non-empty slice from the caches; slices whose
// vocabulary emptied under min_count are skipped with a warning
TrainResult cmd_train(const PipelineConfig& config);

struct TrendArtifacts {
    std::filesystem::path csv;
    std::filesystem::path json;
    std::filesystem::path svg;
};

// Computes the trend table over the requested slices (all manifest slices
// with models when `slice_labels` is empty) and writes CSV + JSON + SVG under
// `out_prefix` (defaults to "<out_dir>/trend_<base>"). Throws
// trend::DegenerateQueryError when the base term is absent everywhere.
TrendArtifacts cmd_trend(const PipelineConfig& config, const std::string& base_term,
                         const std::vector<std::string>& relative_terms,
                         std::vector<std::string> slice_labels, trend::TrendMode mode,
                         const std::filesystem::path& out_prefix = {});

std::string cmd_neighbors(const PipelineConfig& config, const std::string& slice_label,
                          const std::string& term, int k);  // JSON report

std::string cmd_cluster(const PipelineConfig& config, const std::string& slice_label,
                        const std::string& term, int neighborhood_size, int kmeans_k,
                        std::uint64_t kmeans_seed);  // JSON report

// Labels recorded in the manifest, in chronological order.
std::vector<std::string> manifest_slice_labels(const PipelineConfig& config);

// Loads the model for one slice, warning on a provenance mismatch.
embedding::EmbeddingModel load_slice_model(const PipelineConfig& config, const std::string& label);

std::string fnv1a_hash(std::string_view data);

}  // namespace semdrift::cli
