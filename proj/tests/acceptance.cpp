// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion carries its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semdrift/cli.hpp"
#include "semdrift/cluster.hpp"
#include "semdrift/embedding.hpp"
#include "semdrift/trend.hpp"
#include "testutil.hpp"

using namespace semdrift;
using testutil::read_file;
using testutil::TempDir;
using testutil::write_file;

namespace {

struct CriterionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CriterionFailure(message);
}

// ---------------------------------------------------------------------------
// gradient oracle: analytic vs central finite differences (eps = 1e-5)

double finite_difference_worst_error(embedding::EmbeddingModel model,
                                     const embedding::TrainingPair& pair,
                                     const std::vector<int>& negatives,
                                     embedding::Architecture arch, bool exact_softmax) {
    const double eps = 1e-5;
    const auto eval = [&](const embedding::EmbeddingModel& m) {
        return exact_softmax
                   ? embedding::loss_and_gradients_softmax(m, pair, arch).first
                   : embedding::loss_and_gradients_negative_sampling(m, pair, negatives, arch).first;
    };
    const auto grads = exact_softmax
                           ? embedding::loss_and_gradients_softmax(model, pair, arch).second
                           : embedding::loss_and_gradients_negative_sampling(model, pair, negatives, arch).second;

    double worst = 0.0;
    const auto probe = [&](const auto& entries, bool input_side) {
        for (const auto& [id, grad] : entries) {
            for (int j = 0; j < model.dim(); ++j) {
                auto& w = input_side ? model.input_row(id)[static_cast<std::size_t>(j)]
                                     : model.output_row(id)[static_cast<std::size_t>(j)];
                const double saved = w;
                w = saved + eps;
                const double up = eval(model);
                w = saved - eps;
                const double down = eval(model);
                w = saved;
                const double fd = (up - down) / (2.0 * eps);
                const double analytic = grad[static_cast<std::size_t>(j)];
                worst = std::max(worst, std::abs(analytic - fd) /
                                            std::max({std::abs(analytic), std::abs(fd), 1e-6}));
            }
        }
    };
    probe(grads.input, true);
    probe(grads.output, false);
    return worst;
}

embedding::EmbeddingModel random_model(int v, int d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> tokens;
    for (int i = 0; i < v; ++i) tokens.push_back("w" + std::to_string(i));
    std::vector<double> input(static_cast<std::size_t>(v) * static_cast<std::size_t>(d));
    std::vector<double> output(input.size());
    for (auto& x : input) x = rng.next_double() - 0.5;
    for (auto& x : output) x = rng.next_double() - 0.5;
    return testutil::make_model(tokens, d, std::move(input), std::move(output));
}

std::string criterion_gradient_oracle() {
    double worst = 0.0;
    for (std::uint64_t instance = 1; instance <= 100; ++instance) {
        auto model = random_model(10, 4, instance);
        Rng rng(instance * 131 + 7);
        const auto arch =
            (instance % 2 == 0) ? embedding::Architecture::cbow : embedding::Architecture::skipgram;
        embedding::TrainingPair pair;
        pair.center_id = rng.uniform_int(0, 9);
        const int contexts = arch == embedding::Architecture::cbow ? rng.uniform_int(1, 4) : 1;
        for (int c = 0; c < contexts; ++c) pair.context_ids.push_back(rng.uniform_int(0, 9));
        const int positive = arch == embedding::Architecture::cbow ? pair.center_id
                                                                   : pair.context_ids.front();
        std::vector<int> negatives;
        for (int i = 0; i < 3; ++i) {
            int neg = rng.uniform_int(0, 9);
            while (neg == positive) neg = rng.uniform_int(0, 9);
            negatives.push_back(neg);
        }
        worst = std::max(worst, finite_difference_worst_error(model, pair, negatives, arch, false));
        worst = std::max(worst, finite_difference_worst_error(model, pair, negatives, arch, true));
        require(worst <= 1e-4, "relative error " + std::to_string(worst) + " at instance " +
                                   std::to_string(instance));
    }
    std::ostringstream detail;
    detail << "100 instances, worst relative error " << worst;
    return detail.str();
}

// ---------------------------------------------------------------------------

std::string criterion_softmax_normalization() {
    double worst = 0.0;
    for (const int v : {2, 7, 25, 50}) {
        const auto model = random_model(v, 8, static_cast<std::uint64_t>(v) * 17 + 1);
        for (int i = 0; i < v; ++i) {
            double total = 0.0;
            for (int j = 0; j < v; ++j) total += embedding::softmax_probability(model, i, j);
            worst = std::max(worst, std::abs(total - 1.0));
        }
    }
    require(worst <= 1e-9, "normalization off by " + std::to_string(worst));
    std::ostringstream detail;
    detail << "V in {2,7,25,50}, worst |sum-1| = " << worst;
    return detail.str();
}

// ---------------------------------------------------------------------------

std::string criterion_kmeans_optimality() {
    int optimal = 0;
    int monotone = 0;
    const int instances = 100;
    for (int t = 0; t < instances; ++t) {
        Rng rng(5000 + static_cast<std::uint64_t>(t));
        const int n = 4 + rng.uniform_int(0, 4);  // N <= 8
        std::vector<double> points;
        for (int i = 0; i < 2 * n; ++i) points.push_back(rng.next_double() * 4.0 - 2.0);

        const auto result = cluster::kmeans(points, 2, 2, 9000 + static_cast<std::uint64_t>(t));
        const double best = testutil::brute_force_kmeans_k2(points, 2);
        if (std::abs(result.objective - best) <= 1e-9) ++optimal;

        bool ok = true;
        for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
            if (result.objective_trace[i] > result.objective_trace[i - 1] + 1e-12) ok = false;
        }
        if (ok) ++monotone;
    }
    require(monotone == instances,
            "objective trace increased in " + std::to_string(instances - monotone) + " runs");
    require(optimal >= 95, "brute-force optimum reached in only " + std::to_string(optimal) + "/100");
    return "optimal " + std::to_string(optimal) + "/100, non-increasing trace 100/100";
}

// ---------------------------------------------------------------------------

std::string criterion_cooccurrence_attraction() {
    int hits = 0;
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto corpus = testutil::make_cooccurrence_corpus(seed, 200);
        embedding::TrainConfig config;
        config.vector_size = 16;
        config.window = 2;
        config.epochs = 5;
        config.min_count = 1;
        config.seed = seed;
        const auto model = embedding::train_slice(corpus.sequences, corpus.vocab, config);
        const double ab = embedding::cosine_similarity(model.input_row(0), model.input_row(1));
        const double ac = embedding::cosine_similarity(model.input_row(0), model.input_row(2));
        if (ab > ac) ++hits;
    }
    require(hits == 3, "cos(A,B) > cos(A,C) held in only " + std::to_string(hits) + "/3 seeds");
    return "cos(A,B) > cos(A,C) in 3/3 seeds";
}

// ---------------------------------------------------------------------------

double overlap_schedule_rho(std::uint64_t seed, bool reversed) {
    std::vector<double> overlaps = {0.0, 0.25, 0.5, 0.75, 1.0};
    if (reversed) std::reverse(overlaps.begin(), overlaps.end());
    std::vector<double> distances;
    for (std::size_t s = 0; s < overlaps.size(); ++s) {
        preprocess::Vocabulary vocab;
        const auto sequences = testutil::make_overlap_slice(seed * 100 + s, overlaps[s], 240, vocab);
        embedding::TrainConfig config;
        config.architecture = embedding::Architecture::skipgram;
        config.vector_size = 12;
        config.window = 2;
        config.epochs = 4;
        config.min_count = 1;
        config.seed = seed;
        const auto model = embedding::train_slice(sequences, vocab, config);
        distances.push_back(*embedding::pair_distance(model, "alpha", "basis"));
    }
    const std::vector<double> index = {0, 1, 2, 3, 4};
    return testutil::spearman_rho(index, distances);
}

std::string criterion_trend_detection() {
    int convergent = 0, divergent = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        if (overlap_schedule_rho(seed, false) <= -0.8) ++convergent;
        if (overlap_schedule_rho(seed, true) >= 0.8) ++divergent;
    }
    require(convergent >= 4,
            "convergent rho <= -0.8 in only " + std::to_string(convergent) + "/5 seeds");
    require(divergent >= 4,
            "divergent rho >= +0.8 in only " + std::to_string(divergent) + "/5 seeds");
    return "convergent " + std::to_string(convergent) + "/5, divergent " +
           std::to_string(divergent) + "/5";
}

// ---------------------------------------------------------------------------

std::string criterion_table_flags() {
    using trend::CellFlag;
    using trend::TrendCell;
    const std::vector<TrendCell> row = {
        {std::nullopt, CellFlag::none}, {0.262, CellFlag::none}, {0.123, CellFlag::none},
        {0.116, CellFlag::none},        {0.109, CellFlag::none}, {0.112, CellFlag::none},
    };
    const auto annotated = trend::annotate_extrema(row);
    const std::vector<CellFlag> expected = {CellFlag::missing, CellFlag::max,  CellFlag::none,
                                            CellFlag::none,    CellFlag::min, CellFlag::none};
    for (std::size_t i = 0; i < annotated.size(); ++i) {
        require(annotated[i].flag == expected[i],
                "flag mismatch at column " + std::to_string(i) + " (" +
                    trend::cell_flag_name(annotated[i].flag) + " != " +
                    trend::cell_flag_name(expected[i]) + ")");
    }
    return "Jan'20 ignored (blue), Jun'20 max (red), Jun'21 min (green)";
}

// ---------------------------------------------------------------------------
// two-newsgroup smoke test on a generated newsgroups_dir fixture

void write_newsgroup_fixture(const std::filesystem::path& root, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> sport = {"hockey", "game",   "team",   "puck",  "season",
                                            "playoff", "goal",  "skate",  "score", "league"};
    const std::vector<std::string> faith = {"church", "faith",  "god",    "prayer", "scripture",
                                            "belief", "gospel", "worship", "bible", "grace"};
    const std::vector<std::string> filler = {"night", "week", "city", "crowd", "story",
                                             "friend", "place", "year", "reason", "letter"};

    const auto sentence = [&](const std::vector<std::string>& pool, bool mix_filler) {
        std::string s;
        for (int w = 0; w < 7; ++w) {
            const auto& src = (mix_filler && rng.next_double() < 0.25) ? filler : pool;
            if (!s.empty()) s += ' ';
            s += src[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(src.size()) - 1))];
        }
        return s;
    };

    const auto write_group = [&](const std::string& group, const std::vector<std::string>& pool,
                                 const std::vector<std::string>& off_topic, const std::string& month) {
        for (int p = 0; p < 80; ++p) {
            std::string body;
            for (int line = 0; line < 8; ++line) {
                // off-topic asides keep both term families above min_count in
                // both groups, each family in its own contexts
                const bool aside = line >= 6 && rng.next_double() < 0.45;
                body += sentence(aside ? off_topic : pool, !aside) + "\n";
            }
            const int day = 1 + rng.uniform_int(0, 27);
            char date[32];
            std::snprintf(date, sizeof(date), "%s-%02d", month.c_str(), day);
            write_file(root / group / ("post" + std::to_string(p)),
                       "From: someone@example.com\nDate: " + std::string(date) +
                           "\nSubject: post\n\n" + body);
        }
    };
    write_group("rec.sport.hockey", sport, faith, "2020-01");
    write_group("soc.religion.christian", faith, sport, "2020-02");
}

std::string criterion_newsgroups_smoke() {
    int hits = 0;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TempDir dir("acc_ng");
        write_newsgroup_fixture(dir / "corpus", 7000 + seed);

        cli::PipelineConfig config;
        config.corpus_path = dir / "corpus";
        config.format = corpus::CorpusFormat::newsgroups_dir;
        config.granularity = corpus::Granularity::month;
        config.out_dir = dir / "out";
        config.train.vector_size = 50;
        config.train.min_count = 10;
        config.train.epochs = 5;
        config.train.seed = seed;

        cli::cmd_ingest(config);
        cli::cmd_train(config);

        const auto sport_model = cli::load_slice_model(config, "2020-01");
        const auto within = embedding::pair_distance(sport_model, "hockey", "game");
        const auto cross = embedding::pair_distance(sport_model, "hockey", "faith");
        require(within.has_value(), "sport terms missing from the sport-group model");
        require(cross.has_value(), "religion probe term missing from the sport-group model");
        if (*within < *cross) ++hits;
        detail << (seed > 1 ? " " : "") << "seed" << seed << ":" << (*within < *cross ? "ok" : "MISS");
    }
    require(hits >= 4, "within < cross in only " + std::to_string(hits) + "/5 seeds");
    return "within-domain < cross-domain in " + std::to_string(hits) + "/5 seeds (" + detail.str() +
           ")";
}

// ---------------------------------------------------------------------------
// end-to-end determinism through the real CLI binary

std::string criterion_end_to_end_determinism() {
    const char* bin = std::getenv("SEMDRIFT_BIN");
    require(bin != nullptr, "SEMDRIFT_BIN not set");

    TempDir dir("acc_e2e");
    write_file(dir / "corpus.jsonl", testutil::fixture_jsonl_corpus());

    const auto run_pipeline = [&](const std::string& out_dir) {
        const std::string flags = std::string(bin) + " --corpus " + (dir / "corpus.jsonl").string() +
                                  " --out-dir " + out_dir +
                                  " --granularity month --vector-size 12 --window 3 --min-count 3"
                                  " --epochs 3 --seed 7 --workers 1 ";
        require(std::system((flags + "ingest > /dev/null 2>&1").c_str()) == 0, "ingest failed");
        require(std::system((flags + "train > /dev/null 2>&1").c_str()) == 0, "train failed");
        require(std::system((flags + "trend --base cdc --terms report,official,olympics"
                                     " > /dev/null 2>&1")
                                .c_str()) == 0,
                "trend failed");
    };

    // both runs write to the same path so every recorded path/hash matches
    const std::string out_dir = (dir / "out").string();
    run_pipeline(out_dir);
    const std::string csv_a = read_file(dir / "out" / "trend_cdc.csv");
    const std::string svg_a = read_file(dir / "out" / "trend_cdc.svg");
    std::filesystem::remove_all(dir / "out");
    run_pipeline(out_dir);
    const std::string csv_b = read_file(dir / "out" / "trend_cdc.csv");
    const std::string svg_b = read_file(dir / "out" / "trend_cdc.svg");

    require(!csv_a.empty() && !svg_a.empty(), "pipeline produced empty artifacts");
    require(csv_a == csv_b, "CSV bytes differ between runs");
    require(svg_a == svg_b, "SVG bytes differ between runs");
    return "CSV and SVG byte-identical across two full runs (" +
           std::to_string(csv_a.size()) + " + " + std::to_string(svg_a.size()) + " bytes)";
}

// ---------------------------------------------------------------------------

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<std::string()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"gradient-oracle", 10.0, criterion_gradient_oracle},
        {"softmax-normalization", 1.0, criterion_softmax_normalization},
        {"kmeans-optimality", 30.0, criterion_kmeans_optimality},
        {"cooccurrence-attraction", 60.0, criterion_cooccurrence_attraction},
        {"trend-detection", 120.0, criterion_trend_detection},
        {"table-flag-fidelity", 10.0, criterion_table_flags},
        {"newsgroups-smoke", 300.0, criterion_newsgroups_smoke},
        {"end-to-end-determinism", 120.0, criterion_end_to_end_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool passed = true;
        try {
            detail = criterion.run();
        } catch (const std::exception& e) {
            passed = false;
            detail = e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (passed && seconds > criterion.budget_seconds) {
            passed = false;
            detail += " [exceeded " + std::to_string(criterion.budget_seconds) + "s budget]";
        }
        if (!passed) ++failures;
        std::printf("[%s] %-24s (%6.2fs) %s\n", passed ? "PASS" : "FAIL", criterion.name.c_str(),
                    seconds, detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
