#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semdrift/preprocess.hpp"
#include "semdrift/rng.hpp"

namespace semdrift::embedding {

enum class Architecture { cbow, skipgram };

std::string architecture_name(Architecture a);
std::optional<Architecture> parse_architecture(std::string_view name);

struct TrainConfig {
    Architecture architecture = Architecture::cbow;
    int vector_size = 100;
    int window = 5;
    int min_count = 10;
    int negatives = 5;  // 0 selects exact-softmax updates (small vocabularies only)
    double initial_lr = 0.025;
    double final_lr = 0.0001;
    int epochs = 5;
    std::uint64_t seed = 1;
    int workers = 1;
    double subsample_threshold = 0.0;  // 0 disables frequent-word subsampling

    void validate() const;  // throws std::invalid_argument
};

struct EmbeddingModel {
    preprocess::Vocabulary vocab;
    std::vector<double> input_weights;   // V x D row-major; rows are the word embeddings
    std::vector<double> output_weights;  // V x D row-major
    TrainConfig config;
    std::string slice_label;

    int dim() const { return config.vector_size; }
    int vocab_size() const { return vocab.size(); }

    std::span<const double> input_row(int id) const {
        return {input_weights.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
    std::span<double> input_row(int id) {
        return {input_weights.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
    std::span<const double> output_row(int id) const {
        return {output_weights.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
    std::span<double> output_row(int id) {
        return {output_weights.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
};

// One training example. CBOW predicts center from all context ids; skip-gram
// pairs carry exactly one context id and predict it from the center.
struct TrainingPair {
    int center_id = -1;
    std::vector<int> context_ids;
};

// Context ids at offsets +-1..+-half_width around `position`, clipped to the
// sequence, the center excluded.
std::vector<int> fixed_window_context(std::span<const int> sequence, std::size_t position,
                                      int half_width);

// Window expansion with the dynamic-window rule: per center position a width
// b is drawn uniformly from [1, window] and offsets +-1..+-b inside the
// sequence become context. Sequences shorter than 2 produce nothing.
std::vector<TrainingPair> generate_training_examples(std::span<const int> sequence,
                                                     Architecture architecture, int window,
                                                     Rng& rng);

// exp(v'_t . v_i) / sum_j exp(v'_j . v_i), max-subtracted for stability
double softmax_probability(const EmbeddingModel& model, int input_id, int target_id);

// Gradients w.r.t. every touched weight row, coalesced per row id.
struct RowGradients {
    std::vector<std::pair<int, std::vector<double>>> input;
    std::vector<std::pair<int, std::vector<double>>> output;
    void clear() {
        input.clear();
        output.clear();
    }
};

// loss = -log sigmoid(v'_pos . h) - sum_neg log sigmoid(-v'_neg . h) with
// h = v_center (skip-gram) or the mean of the context input rows (CBOW).
// negative_ids must exclude the positive target.
std::pair<double, RowGradients> loss_and_gradients_negative_sampling(
    const EmbeddingModel& model, const TrainingPair& pair, std::span<const int> negative_ids,
    Architecture architecture);

// Full-softmax cross-entropy loss; touches all V output rows. The exact
// counterpart used to verify the sampled estimator on small vocabularies.
std::pair<double, RowGradients> loss_and_gradients_softmax(const EmbeddingModel& model,
                                                           const TrainingPair& pair,
                                                           Architecture architecture);

// row -= lr * gradient, in listed order
void apply_gradients(EmbeddingModel& model, const RowGradients& gradients, double lr);

// Unigram^power noise distribution as a Walker alias table.
class NoiseSampler {
public:
    explicit NoiseSampler(std::span<const std::int64_t> frequencies, double power = 0.75);
    int sample(Rng& rng) const;
    // redraws until != exclude; -1 when the vocabulary has no other token
    int sample_excluding(Rng& rng, int exclude) const;

private:
    std::vector<double> prob_;
    std::vector<int> alias_;
};

using EpochCallback = std::function<void(int epoch, const EmbeddingModel& model)>;

// Online SGD over the encoded sequences. Input weights start uniform in
// [-0.5/D, +0.5/D] from config.seed, output weights at zero; the learning
// rate decays linearly from initial_lr to final_lr over all positions x
// epochs. workers=1 is bit-reproducible for a fixed seed; workers>1 updates
// rows lock-free and is not.
EmbeddingModel train_slice(const std::vector<std::vector<int>>& sequences,
                           const preprocess::Vocabulary& vocab, const TrainConfig& config,
                           std::string slice_label = "",
                           const EpochCallback& on_epoch_end = nullptr);

// Mean full-softmax cross-entropy over a fixed-width (b = window) expansion
// of the sequences; deterministic, used to audit training progress.
double corpus_negative_log_likelihood(const EmbeddingModel& model,
                                      const std::vector<std::vector<int>>& sequences,
                                      Architecture architecture, int window);

double cosine_similarity(std::span<const double> u, std::span<const double> v);  // throws on zero norm

// Scaled cosine distance (1 - cos)/2 in [0, 1]; 0 means interchangeable
// usage, 1 means never the same context. nullopt when either term is absent
// from the model vocabulary. Terms must already be pipeline-normalized.
std::optional<double> pair_distance(const EmbeddingModel& model, const std::string& term_a,
                                    const std::string& term_b);

// Top-k rows of input_weights by cosine, query excluded, ties by token id.
std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingModel& model,
                                                              const std::string& term, int k);

// Text format: "V D" header, V input rows "token x1 .. xD", V output rows
// prefixed "#out ", plus "#freq"/"#meta" trailer lines for frequencies and
// provenance. Weights are written with full round-trip precision.
void save_model(const EmbeddingModel& model, const std::filesystem::path& path,
                const std::string& provenance = "");
EmbeddingModel load_model(const std::filesystem::path& path);

// Config hash recorded at save time, empty when absent.
std::string read_model_provenance(const std::filesystem::path& path);

}  // namespace semdrift::embedding
