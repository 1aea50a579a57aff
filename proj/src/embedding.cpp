#include "semdrift/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "semdrift/kernels.hpp"

namespace semdrift::embedding {

namespace {

double log_sigmoid(double x) {
    // -log(1 + exp(-|x|)) shifted; avoids overflow on both tails
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Reusable per-row gradient accumulator; coalesces by row id without
// reallocating between examples.
class GradBuf {
public:
    void reset() { used_ = 0; }

    std::vector<double>& row_for(int id, std::size_t dim) {
        for (std::size_t i = 0; i < used_; ++i) {
            if (rows_[i].first == id) return rows_[i].second;
        }
        if (used_ == rows_.size()) {
            rows_.emplace_back(id, std::vector<double>(dim, 0.0));
        } else {
            rows_[used_].first = id;
            rows_[used_].second.assign(dim, 0.0);
        }
        return rows_[used_++].second;
    }

    std::size_t size() const { return used_; }
    const std::pair<int, std::vector<double>>& entry(std::size_t i) const { return rows_[i]; }

private:
    std::vector<std::pair<int, std::vector<double>>> rows_;
    std::size_t used_ = 0;
};

struct StepScratch {
    std::vector<double> h;
    std::vector<double> grad_h;
    GradBuf input_grads;
    GradBuf output_grads;
    std::vector<int> context;
    std::vector<int> negatives;
    std::vector<int> filtered;
    std::vector<double> scores;
};

// h for the example: the center's input row (skip-gram) or the mean of the
// context input rows (CBOW, written into scratch).
std::span<const double> build_hidden(const EmbeddingModel& model, const TrainingPair& pair,
                                     Architecture arch, std::vector<double>& scratch) {
    const std::size_t d = static_cast<std::size_t>(model.dim());
    if (arch == Architecture::skipgram) return model.input_row(pair.center_id);
    scratch.assign(d, 0.0);
    for (const int id : pair.context_ids) {
        kernels::axpy(1.0, model.input_row(id).data(), scratch.data(), d);
    }
    kernels::scale(scratch.data(), 1.0 / static_cast<double>(pair.context_ids.size()), d);
    return scratch;
}

// Distributes dL/dh onto the input rows that produced h.
void scatter_hidden_gradient(const TrainingPair& pair, Architecture arch,
                             std::span<const double> grad_h, GradBuf& input_grads) {
    const std::size_t d = grad_h.size();
    if (arch == Architecture::skipgram) {
        kernels::axpy(1.0, grad_h.data(), input_grads.row_for(pair.center_id, d).data(), d);
        return;
    }
    const double inv_c = 1.0 / static_cast<double>(pair.context_ids.size());
    for (const int id : pair.context_ids) {
        kernels::axpy(inv_c, grad_h.data(), input_grads.row_for(id, d).data(), d);
    }
}

int positive_target(const TrainingPair& pair, Architecture arch) {
    return arch == Architecture::cbow ? pair.center_id : pair.context_ids.front();
}

double ns_loss_and_gradients(const EmbeddingModel& model, const TrainingPair& pair,
                             std::span<const int> negative_ids, Architecture arch,
                             StepScratch& scratch) {
    const std::size_t d = static_cast<std::size_t>(model.dim());
    scratch.input_grads.reset();
    scratch.output_grads.reset();
    const std::span<const double> h = build_hidden(model, pair, arch, scratch.h);
    scratch.grad_h.assign(d, 0.0);

    double loss = 0.0;
    const int pos = positive_target(pair, arch);

    const auto accumulate = [&](int target, double label) {
        const std::span<const double> out = model.output_row(target);
        const double s = kernels::dot(out.data(), h.data(), d);
        loss += (label > 0.5) ? -log_sigmoid(s) : -log_sigmoid(-s);
        const double g = sigmoid(s) - label;  // dL/ds
        kernels::axpy(g, out.data(), scratch.grad_h.data(), d);
        kernels::axpy(g, h.data(), scratch.output_grads.row_for(target, d).data(), d);
    };

    accumulate(pos, 1.0);
    for (const int neg : negative_ids) accumulate(neg, 0.0);

    scatter_hidden_gradient(pair, arch, scratch.grad_h, scratch.input_grads);
    return loss;
}

double softmax_loss_and_gradients(const EmbeddingModel& model, const TrainingPair& pair,
                                  Architecture arch, StepScratch& scratch,
                                  std::vector<double>& score_scratch) {
    const std::size_t d = static_cast<std::size_t>(model.dim());
    const int v = model.vocab_size();
    scratch.input_grads.reset();
    scratch.output_grads.reset();
    const std::span<const double> h = build_hidden(model, pair, arch, scratch.h);
    scratch.grad_h.assign(d, 0.0);

    score_scratch.resize(static_cast<std::size_t>(v));
    double max_score = -HUGE_VAL;
    for (int j = 0; j < v; ++j) {
        score_scratch[static_cast<std::size_t>(j)] = kernels::dot(model.output_row(j).data(), h.data(), d);
        max_score = std::max(max_score, score_scratch[static_cast<std::size_t>(j)]);
    }
    double z = 0.0;
    for (int j = 0; j < v; ++j) z += std::exp(score_scratch[static_cast<std::size_t>(j)] - max_score);

    const int target = positive_target(pair, arch);
    const double loss = -(score_scratch[static_cast<std::size_t>(target)] - max_score) + std::log(z);

    for (int j = 0; j < v; ++j) {
        const double p = std::exp(score_scratch[static_cast<std::size_t>(j)] - max_score) / z;
        const double g = p - (j == target ? 1.0 : 0.0);
        kernels::axpy(g, model.output_row(j).data(), scratch.grad_h.data(), d);
        kernels::axpy(g, h.data(), scratch.output_grads.row_for(j, d).data(), d);
    }
    scatter_hidden_gradient(pair, arch, scratch.grad_h, scratch.input_grads);
    return loss;
}

void apply_grad_buf(EmbeddingModel& model, const GradBuf& input, const GradBuf& output, double lr) {
    const std::size_t d = static_cast<std::size_t>(model.dim());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto& [id, grad] = input.entry(i);
        kernels::axpy(-lr, grad.data(), model.input_row(id).data(), d);
    }
    for (std::size_t i = 0; i < output.size(); ++i) {
        const auto& [id, grad] = output.entry(i);
        kernels::axpy(-lr, grad.data(), model.output_row(id).data(), d);
    }
}

RowGradients to_row_gradients(const GradBuf& input, const GradBuf& output) {
    RowGradients out;
    out.input.reserve(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) out.input.push_back(input.entry(i));
    out.output.reserve(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) out.output.push_back(output.entry(i));
    return out;
}

// Context ids for center position t at fixed half-width b, offsets
// -b..-1,+1..+b clipped to the sequence.
void context_for_position(std::span<const int> seq, std::size_t t, int b, std::vector<int>& out) {
    out.clear();
    const std::size_t lo = t >= static_cast<std::size_t>(b) ? t - static_cast<std::size_t>(b) : 0;
    const std::size_t hi = std::min(seq.size() - 1, t + static_cast<std::size_t>(b));
    for (std::size_t p = lo; p <= hi; ++p) {
        if (p != t) out.push_back(seq[p]);
    }
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_or_throw(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("malformed number in " + context);
    }
    return v;
}

template <typename Int>
Int parse_int_or_throw(std::string_view s, const std::string& context) {
    Int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("malformed number in " + context);
    }
    return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::size_t start = line.find_first_not_of(' ', pos);
        if (start == std::string_view::npos) break;
        std::size_t end = line.find(' ', start);
        if (end == std::string_view::npos) end = line.size();
        fields.push_back(line.substr(start, end - start));
        pos = end;
    }
    return fields;
}

}  // namespace

std::vector<int> fixed_window_context(std::span<const int> sequence, std::size_t position,
                                      int half_width) {
    std::vector<int> out;
    context_for_position(sequence, position, half_width, out);
    return out;
}

std::string architecture_name(Architecture a) {
    return a == Architecture::cbow ? "cbow" : "skipgram";
}

std::optional<Architecture> parse_architecture(std::string_view name) {
    if (name == "cbow") return Architecture::cbow;
    if (name == "skipgram") return Architecture::skipgram;
    return std::nullopt;
}

void TrainConfig::validate() const {
    if (vector_size < 1) throw std::invalid_argument("vector_size must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (negatives < 0) throw std::invalid_argument("negatives must be >= 0");
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (!(initial_lr > final_lr) || !(final_lr > 0.0)) {
        throw std::invalid_argument("learning rates must satisfy initial_lr > final_lr > 0");
    }
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (subsample_threshold < 0.0) throw std::invalid_argument("subsample_threshold must be >= 0");
}

std::vector<TrainingPair> generate_training_examples(std::span<const int> sequence,
                                                     Architecture architecture, int window,
                                                     Rng& rng) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<TrainingPair> pairs;
    if (sequence.size() < 2) return pairs;

    std::vector<int> context;
    for (std::size_t t = 0; t < sequence.size(); ++t) {
        const int b = rng.uniform_int(1, window);
        context_for_position(sequence, t, b, context);
        if (context.empty()) continue;
        if (architecture == Architecture::cbow) {
            pairs.push_back(TrainingPair{sequence[t], context});
        } else {
            for (const int c : context) {
                pairs.push_back(TrainingPair{sequence[t], {c}});
            }
        }
    }
    return pairs;
}

double softmax_probability(const EmbeddingModel& model, int input_id, int target_id) {
    const int v = model.vocab_size();
    if (input_id < 0 || input_id >= v || target_id < 0 || target_id >= v) {
        throw std::out_of_range("softmax_probability: token id out of range");
    }
    const std::size_t d = static_cast<std::size_t>(model.dim());
    const std::span<const double> h = model.input_row(input_id);

    std::vector<double> scores(static_cast<std::size_t>(v));
    double max_score = -HUGE_VAL;
    for (int j = 0; j < v; ++j) {
        scores[static_cast<std::size_t>(j)] = kernels::dot(model.output_row(j).data(), h.data(), d);
        max_score = std::max(max_score, scores[static_cast<std::size_t>(j)]);
    }
    double z = 0.0;
    for (int j = 0; j < v; ++j) z += std::exp(scores[static_cast<std::size_t>(j)] - max_score);
    return std::exp(scores[static_cast<std::size_t>(target_id)] - max_score) / z;
}

std::pair<double, RowGradients> loss_and_gradients_negative_sampling(
    const EmbeddingModel& model, const TrainingPair& pair, std::span<const int> negative_ids,
    Architecture architecture) {
    if (pair.context_ids.empty()) throw std::invalid_argument("training pair has no context");
    StepScratch scratch;
    const double loss = ns_loss_and_gradients(model, pair, negative_ids, architecture, scratch);
    return {loss, to_row_gradients(scratch.input_grads, scratch.output_grads)};
}

std::pair<double, RowGradients> loss_and_gradients_softmax(const EmbeddingModel& model,
                                                           const TrainingPair& pair,
                                                           Architecture architecture) {
    if (pair.context_ids.empty()) throw std::invalid_argument("training pair has no context");
    StepScratch scratch;
    std::vector<double> scores;
    const double loss = softmax_loss_and_gradients(model, pair, architecture, scratch, scores);
    return {loss, to_row_gradients(scratch.input_grads, scratch.output_grads)};
}

void apply_gradients(EmbeddingModel& model, const RowGradients& gradients, double lr) {
    const std::size_t d = static_cast<std::size_t>(model.dim());
    for (const auto& [id, grad] : gradients.input) {
        kernels::axpy(-lr, grad.data(), model.input_row(id).data(), d);
    }
    for (const auto& [id, grad] : gradients.output) {
        kernels::axpy(-lr, grad.data(), model.output_row(id).data(), d);
    }
}

NoiseSampler::NoiseSampler(std::span<const std::int64_t> frequencies, double power) {
    const std::size_t v = frequencies.size();
    if (v == 0) throw std::invalid_argument("NoiseSampler: empty frequency table");
    std::vector<double> weights(v);
    double total = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        weights[i] = std::pow(static_cast<double>(std::max<std::int64_t>(frequencies[i], 0)), power);
        total += weights[i];
    }
    if (total <= 0.0) {
        weights.assign(v, 1.0);
        total = static_cast<double>(v);
    }

    // Walker alias table
    prob_.assign(v, 0.0);
    alias_.assign(v, 0);
    std::vector<int> small, large;
    std::vector<double> scaled(v);
    for (std::size_t i = 0; i < v; ++i) {
        scaled[i] = weights[i] * static_cast<double>(v) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
    }
    while (!small.empty() && !large.empty()) {
        const int s = small.back();
        small.pop_back();
        const int l = large.back();
        large.pop_back();
        prob_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
        alias_[static_cast<std::size_t>(s)] = l;
        scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
        (scaled[static_cast<std::size_t>(l)] < 1.0 ? small : large).push_back(l);
    }
    for (const int i : large) prob_[static_cast<std::size_t>(i)] = 1.0;
    for (const int i : small) prob_[static_cast<std::size_t>(i)] = 1.0;
}

int NoiseSampler::sample(Rng& rng) const {
    const int slot = rng.uniform_int(0, static_cast<int>(prob_.size()) - 1);
    return rng.next_double() < prob_[static_cast<std::size_t>(slot)]
               ? slot
               : alias_[static_cast<std::size_t>(slot)];
}

int NoiseSampler::sample_excluding(Rng& rng, int exclude) const {
    if (prob_.size() <= 1) return -1;
    for (int tries = 0; tries < 1000; ++tries) {
        const int s = sample(rng);
        if (s != exclude) return s;
    }
    // frequencies are >= 1, so this is unreachable in practice
    return exclude == 0 ? 1 : 0;
}

EmbeddingModel train_slice(const std::vector<std::vector<int>>& sequences,
                           const preprocess::Vocabulary& vocab, const TrainConfig& config,
                           std::string slice_label, const EpochCallback& on_epoch_end) {
    config.validate();
    const int v = vocab.size();
    if (v == 0) throw std::runtime_error("train_slice: empty vocabulary");
    const std::size_t d = static_cast<std::size_t>(config.vector_size);

    EmbeddingModel model;
    model.vocab = vocab;
    model.config = config;
    model.slice_label = std::move(slice_label);
    model.input_weights.resize(static_cast<std::size_t>(v) * d);
    model.output_weights.assign(static_cast<std::size_t>(v) * d, 0.0);
    {
        Rng init_rng(mix_seed(config.seed));
        for (auto& w : model.input_weights) {
            w = (init_rng.next_double() - 0.5) / static_cast<double>(d);
        }
    }

    std::size_t total_positions = 0;
    for (const auto& seq : sequences) total_positions += seq.size();
    if (config.epochs == 0 || total_positions == 0) return model;

    std::optional<NoiseSampler> noise;
    if (config.negatives > 0) noise.emplace(vocab.frequency);

    const double total_updates =
        static_cast<double>(total_positions) * static_cast<double>(config.epochs);
    std::atomic<std::uint64_t> processed{0};

    const auto lr_at = [&](std::uint64_t done) {
        const double frac = std::min(1.0, static_cast<double>(done) / total_updates);
        return config.initial_lr + (config.final_lr - config.initial_lr) * frac;
    };

    const std::int64_t total_tokens = [&] {
        std::int64_t t = 0;
        for (const auto f : vocab.frequency) t += f;
        return std::max<std::int64_t>(t, 1);
    }();

    // p_keep for frequent-word subsampling (classic formulation)
    const auto keep_probability = [&](int id) {
        const double f = static_cast<double>(vocab.frequency[static_cast<std::size_t>(id)]) /
                         static_cast<double>(total_tokens);
        const double t = config.subsample_threshold;
        if (f <= 0.0) return 1.0;
        return std::min(1.0, (std::sqrt(f / t) + 1.0) * (t / f));
    };

    const std::uint64_t stream_base = mix_seed(config.seed ^ 0x7261696eULL);

    const auto run_worker = [&](int epoch, int worker, std::size_t begin, std::size_t end) {
        Rng rng(mix_seed(stream_base + static_cast<std::uint64_t>(epoch) * 65537ULL +
                         static_cast<std::uint64_t>(worker)));
        StepScratch scratch;
        TrainingPair pair;

        for (std::size_t si = begin; si < end; ++si) {
            const auto& original = sequences[si];
            std::span<const int> seq(original);
            if (config.subsample_threshold > 0.0) {
                scratch.filtered.clear();
                for (const int id : original) {
                    if (rng.next_double() < keep_probability(id)) scratch.filtered.push_back(id);
                }
                seq = scratch.filtered;
            }
            const std::uint64_t base =
                processed.fetch_add(original.size(), std::memory_order_relaxed);
            if (seq.size() < 2) continue;

            for (std::size_t t = 0; t < seq.size(); ++t) {
                const double lr = lr_at(base + t);
                const int b = rng.uniform_int(1, config.window);
                context_for_position(seq, t, b, scratch.context);
                if (scratch.context.empty()) continue;

                const auto train_example = [&](const TrainingPair& ex) {
                    if (config.negatives == 0) {
                        softmax_loss_and_gradients(model, ex, config.architecture, scratch,
                                                   scratch.scores);
                    } else {
                        scratch.negatives.clear();
                        const int pos = positive_target(ex, config.architecture);
                        for (int n = 0; n < config.negatives; ++n) {
                            const int id = noise->sample_excluding(rng, pos);
                            if (id >= 0) scratch.negatives.push_back(id);
                        }
                        ns_loss_and_gradients(model, ex, scratch.negatives, config.architecture,
                                              scratch);
                    }
                    apply_grad_buf(model, scratch.input_grads, scratch.output_grads, lr);
                };

                if (config.architecture == Architecture::cbow) {
                    pair.center_id = seq[t];
                    pair.context_ids = scratch.context;
                    train_example(pair);
                } else {
                    for (const int c : scratch.context) {
                        pair.center_id = seq[t];
                        pair.context_ids.assign(1, c);
                        train_example(pair);
                    }
                }
            }
        }
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.workers == 1) {
            run_worker(epoch, 0, 0, sequences.size());
        } else {
            const std::size_t n = sequences.size();
            const int w = std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(n, 1)));
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(w));
            for (int i = 0; i < w; ++i) {
                const std::size_t begin = n * static_cast<std::size_t>(i) / static_cast<std::size_t>(w);
                const std::size_t end = n * static_cast<std::size_t>(i + 1) / static_cast<std::size_t>(w);
                threads.emplace_back(run_worker, epoch, i, begin, end);
            }
            for (auto& th : threads) th.join();
        }
        if (on_epoch_end) on_epoch_end(epoch, model);
    }
    return model;
}

double corpus_negative_log_likelihood(const EmbeddingModel& model,
                                      const std::vector<std::vector<int>>& sequences,
                                      Architecture architecture, int window) {
    const std::size_t d = static_cast<std::size_t>(model.dim());
    const int v = model.vocab_size();
    std::vector<double> scores(static_cast<std::size_t>(v));
    std::vector<double> h_scratch;
    std::vector<int> context;

    const auto nll_of = [&](std::span<const double> h, int target) {
        double max_score = -HUGE_VAL;
        for (int j = 0; j < v; ++j) {
            scores[static_cast<std::size_t>(j)] = kernels::dot(model.output_row(j).data(), h.data(), d);
            max_score = std::max(max_score, scores[static_cast<std::size_t>(j)]);
        }
        double z = 0.0;
        for (int j = 0; j < v; ++j) z += std::exp(scores[static_cast<std::size_t>(j)] - max_score);
        return -(scores[static_cast<std::size_t>(target)] - max_score) + std::log(z);
    };

    double total = 0.0;
    std::size_t count = 0;
    for (const auto& seq : sequences) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            context_for_position(seq, t, window, context);
            if (context.empty()) continue;
            if (architecture == Architecture::cbow) {
                h_scratch.assign(d, 0.0);
                for (const int id : context) {
                    kernels::axpy(1.0, model.input_row(id).data(), h_scratch.data(), d);
                }
                kernels::scale(h_scratch.data(), 1.0 / static_cast<double>(context.size()), d);
                total += nll_of(h_scratch, seq[t]);
                ++count;
            } else {
                for (const int c : context) {
                    total += nll_of(model.input_row(seq[t]), c);
                    ++count;
                }
            }
        }
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: size mismatch");
    const double nu = kernels::norm(u.data(), u.size());
    const double nv = kernels::norm(v.data(), v.size());
    if (nu == 0.0 || nv == 0.0) throw std::domain_error("cosine_similarity: zero-norm vector");
    const double c = kernels::dot(u.data(), v.data(), u.size()) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

std::optional<double> pair_distance(const EmbeddingModel& model, const std::string& term_a,
                                    const std::string& term_b) {
    const int a = model.vocab.id(term_a);
    const int b = model.vocab.id(term_b);
    if (a < 0 || b < 0) return std::nullopt;
    const double c = cosine_similarity(model.input_row(a), model.input_row(b));
    return std::clamp((1.0 - c) / 2.0, 0.0, 1.0);
}

std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingModel& model,
                                                              const std::string& term, int k) {
    const int query = model.vocab.id(term);
    if (query < 0) throw std::runtime_error("term not in vocabulary: " + term);
    const int v = model.vocab_size();
    if (k < 0 || k > v - 1) throw std::invalid_argument("nearest_neighbors: k must be in [0, V-1]");

    const std::size_t d = static_cast<std::size_t>(model.dim());
    const std::span<const double> q = model.input_row(query);
    const double qn = kernels::norm(q.data(), d);
    if (qn == 0.0) throw std::domain_error("nearest_neighbors: query vector has zero norm");

    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(static_cast<std::size_t>(v) - 1);
    for (int id = 0; id < v; ++id) {
        if (id == query) continue;
        const std::span<const double> row = model.input_row(id);
        const double rn = kernels::norm(row.data(), d);
        // zero rows rank as orthogonal
        const double c =
            rn == 0.0 ? 0.0
                      : std::clamp(kernels::dot(q.data(), row.data(), d) / (qn * rn), -1.0, 1.0);
        ranked.emplace_back(c, id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<std::pair<std::string, double>> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        out.emplace_back(model.vocab.token_of[static_cast<std::size_t>(ranked[static_cast<std::size_t>(i)].second)],
                         ranked[static_cast<std::size_t>(i)].first);
    }
    return out;
}

void save_model(const EmbeddingModel& model, const std::filesystem::path& path,
                const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    const int v = model.vocab_size();
    out << v << ' ' << model.dim() << '\n';
    for (int id = 0; id < v; ++id) {
        out << model.vocab.token_of[static_cast<std::size_t>(id)];
        for (const double x : model.input_row(id)) out << ' ' << format_double(x);
        out << '\n';
    }
    for (int id = 0; id < v; ++id) {
        out << "#out " << model.vocab.token_of[static_cast<std::size_t>(id)];
        for (const double x : model.output_row(id)) out << ' ' << format_double(x);
        out << '\n';
    }
    out << "#freq";
    for (const auto f : model.vocab.frequency) out << ' ' << f;
    out << '\n';
    out << "#meta slice=" << model.slice_label << " min_count=" << model.vocab.min_count
        << " arch=" << architecture_name(model.config.architecture)
        << " vector_size=" << model.config.vector_size << " window=" << model.config.window
        << " negatives=" << model.config.negatives
        << " initial_lr=" << format_double(model.config.initial_lr)
        << " final_lr=" << format_double(model.config.final_lr)
        << " epochs=" << model.config.epochs << " seed=" << model.config.seed
        << " workers=" << model.config.workers
        << " subsample=" << format_double(model.config.subsample_threshold);
    if (!provenance.empty()) out << " hash=" << provenance;
    out << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    const std::string where = path.string();

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty model file: " + where);
    const auto header = split_fields(line);
    if (header.size() != 2) throw std::runtime_error("malformed model header in " + where);
    int v = 0, d = 0;
    if (std::from_chars(header[0].data(), header[0].data() + header[0].size(), v).ec != std::errc{} ||
        std::from_chars(header[1].data(), header[1].data() + header[1].size(), d).ec != std::errc{} ||
        v < 1 || d < 1) {
        throw std::runtime_error("malformed model header in " + where);
    }

    EmbeddingModel model;
    model.config.vector_size = d;
    model.input_weights.resize(static_cast<std::size_t>(v) * static_cast<std::size_t>(d));
    model.output_weights.resize(static_cast<std::size_t>(v) * static_cast<std::size_t>(d));
    model.vocab.token_of.reserve(static_cast<std::size_t>(v));
    model.vocab.frequency.assign(static_cast<std::size_t>(v), 1);

    for (int id = 0; id < v; ++id) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated model file: " + where);
        const auto fields = split_fields(line);
        if (fields.size() != static_cast<std::size_t>(d) + 1 || fields[0].front() == '#') {
            throw std::runtime_error("dimension mismatch in " + where);
        }
        model.vocab.id_of.emplace(std::string(fields[0]), id);
        model.vocab.token_of.emplace_back(fields[0]);
        for (int j = 0; j < d; ++j) {
            model.input_row(id)[static_cast<std::size_t>(j)] =
                parse_double_or_throw(fields[static_cast<std::size_t>(j) + 1], where);
        }
    }
    for (int id = 0; id < v; ++id) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated model file: " + where);
        const auto fields = split_fields(line);
        if (fields.size() != static_cast<std::size_t>(d) + 2 || fields[0] != "#out") {
            throw std::runtime_error("dimension mismatch in " + where);
        }
        if (std::string_view(fields[1]) != model.vocab.token_of[static_cast<std::size_t>(id)]) {
            throw std::runtime_error("output row token order mismatch in " + where);
        }
        for (int j = 0; j < d; ++j) {
            model.output_row(id)[static_cast<std::size_t>(j)] =
                parse_double_or_throw(fields[static_cast<std::size_t>(j) + 2], where);
        }
    }

    while (std::getline(in, line)) {
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields[0] == "#freq") {
            if (fields.size() != static_cast<std::size_t>(v) + 1) {
                throw std::runtime_error("malformed #freq line in " + where);
            }
            for (int id = 0; id < v; ++id) {
                std::int64_t f = 0;
                const auto& s = fields[static_cast<std::size_t>(id) + 1];
                if (std::from_chars(s.data(), s.data() + s.size(), f).ec != std::errc{}) {
                    throw std::runtime_error("malformed #freq line in " + where);
                }
                model.vocab.frequency[static_cast<std::size_t>(id)] = f;
            }
        } else if (fields[0] == "#meta") {
            for (std::size_t i = 1; i < fields.size(); ++i) {
                const auto eq = fields[i].find('=');
                if (eq == std::string_view::npos) continue;
                const std::string_view key = fields[i].substr(0, eq);
                const std::string_view value = fields[i].substr(eq + 1);
                const std::string value_str(value);
                if (key == "slice") model.slice_label = value_str;
                else if (key == "min_count") model.vocab.min_count = parse_int_or_throw<int>(value, where);
                else if (key == "arch") model.config.architecture = parse_architecture(value).value_or(Architecture::cbow);
                else if (key == "window") model.config.window = parse_int_or_throw<int>(value, where);
                else if (key == "negatives") model.config.negatives = parse_int_or_throw<int>(value, where);
                else if (key == "initial_lr") model.config.initial_lr = parse_double_or_throw(value, where);
                else if (key == "final_lr") model.config.final_lr = parse_double_or_throw(value, where);
                else if (key == "epochs") model.config.epochs = parse_int_or_throw<int>(value, where);
                else if (key == "seed") model.config.seed = parse_int_or_throw<std::uint64_t>(value, where);
                else if (key == "workers") model.config.workers = parse_int_or_throw<int>(value, where);
                else if (key == "subsample") model.config.subsample_threshold = parse_double_or_throw(value, where);
                // "hash" is provenance; clients read it with read_model_provenance()
            }
            model.config.min_count = model.vocab.min_count;
        }
        // unknown # lines are ignored
    }
    return model;
}

std::string read_model_provenance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("#meta", 0) != 0) continue;
        for (const auto field : split_fields(line)) {
            if (field.rfind("hash=", 0) == 0) return std::string(field.substr(5));
        }
    }
    return {};
}

}  // namespace semdrift::embedding
