#include "semdrift/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "semdrift/kernels.hpp"
#include "semdrift/rng.hpp"

namespace semdrift::cluster {

namespace {

std::span<const double> point_at(std::span<const double> points, int dim, int i) {
    return points.subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(dim),
                          static_cast<std::size_t>(dim));
}

// nearest centroid, ties to the lowest index
std::pair<int, double> nearest_centroid(std::span<const double> x, const std::vector<double>& centroids,
                                        int k, int dim) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        const double d = kernels::squared_distance(
            x.data(), centroids.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return {best, best_d};
}

void kmeanspp_init(std::span<const double> points, int n, int dim, int k, Rng& rng,
                   std::vector<double>& centroids) {
    centroids.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(dim), 0.0);
    std::vector<double> dist2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

    int first = rng.uniform_int(0, n - 1);
    std::copy_n(point_at(points, dim, first).data(), dim, centroids.begin());

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = kernels::squared_distance(
                point_at(points, dim, i).data(),
                centroids.data() + static_cast<std::size_t>(c - 1) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim));
            dist2[static_cast<std::size_t>(i)] = std::min(dist2[static_cast<std::size_t>(i)], d);
            total += dist2[static_cast<std::size_t>(i)];
        }
        int chosen = -1;
        if (total > 0.0) {
            const double target = rng.next_double() * total;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += dist2[static_cast<std::size_t>(i)];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) chosen = n - 1;
        } else {
            // all remaining points coincide with a chosen center
            chosen = rng.uniform_int(0, n - 1);
        }
        std::copy_n(point_at(points, dim, chosen).data(), dim,
                    centroids.begin() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim));
    }
}

Clustering kmeans_single(std::span<const double> points, int n, int dim, int k, Rng& rng,
                         int max_iter, double tol) {
    Clustering result;
    result.k = k;
    result.dim = dim;
    result.assignments.assign(static_cast<std::size_t>(n), -1);
    kmeanspp_init(points, n, dim, k, rng, result.centroids);

    std::vector<int> counts(static_cast<std::size_t>(k));
    std::vector<double> sums(static_cast<std::size_t>(k) * static_cast<std::size_t>(dim));
    double prev_j = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step; leaves (assignments, centroids, objective) consistent
        bool changed = false;
        double j = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto [c, d] = nearest_centroid(point_at(points, dim, i), result.centroids, k, dim);
            if (result.assignments[static_cast<std::size_t>(i)] != c) changed = true;
            result.assignments[static_cast<std::size_t>(i)] = c;
            j += d;
        }
        result.objective_trace.push_back(j);
        result.iterations = iter + 1;
        result.objective = j;
        if (!changed || std::abs(prev_j - j) < tol) {
            result.converged = true;
            break;
        }
        prev_j = j;
        if (iter + 1 == max_iter) break;

        // update step: means of non-empty clusters
        std::fill(counts.begin(), counts.end(), 0);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const int c = result.assignments[static_cast<std::size_t>(i)];
            ++counts[static_cast<std::size_t>(c)];
            kernels::axpy(1.0, point_at(points, dim, i).data(),
                          sums.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim),
                          static_cast<std::size_t>(dim));
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) continue;
            double* centroid = result.centroids.data() +
                               static_cast<std::size_t>(c) * static_cast<std::size_t>(dim);
            std::copy_n(sums.begin() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim),
                        dim, centroid);
            kernels::scale(centroid, 1.0 / counts[static_cast<std::size_t>(c)],
                           static_cast<std::size_t>(dim));
        }
        // repair: re-seed each empty cluster to the point farthest from its
        // (freshly updated) assigned centroid
        std::vector<int> claimed;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (std::find(claimed.begin(), claimed.end(), i) != claimed.end()) continue;
                const int a = result.assignments[static_cast<std::size_t>(i)];
                const double d = kernels::squared_distance(
                    point_at(points, dim, i).data(),
                    result.centroids.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(dim),
                    static_cast<std::size_t>(dim));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            std::copy_n(point_at(points, dim, far).data(), dim,
                        result.centroids.begin() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim));
            claimed.push_back(far);
        }
    }
    return result;
}

}  // namespace

Clustering kmeans(std::span<const double> points, int dim, int k, std::uint64_t seed, int max_iter,
                  double tol, int restarts) {
    if (dim < 1) throw std::invalid_argument("kmeans: dim must be >= 1");
    if (points.size() % static_cast<std::size_t>(dim) != 0) {
        throw std::invalid_argument("kmeans: points size not a multiple of dim");
    }
    const int n = static_cast<int>(points.size() / static_cast<std::size_t>(dim));
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > n) throw std::invalid_argument("kmeans: k exceeds number of points");
    for (const double x : points) {
        if (!std::isfinite(x)) throw std::invalid_argument("kmeans: non-finite point");
    }
    if (restarts < 1) restarts = 1;

    Clustering best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(mix_seed(seed + static_cast<std::uint64_t>(r) * 0x9e37ULL));
        Clustering run = kmeans_single(points, n, dim, k, rng, max_iter, tol);
        if (!have_best || run.objective < best.objective) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

double kmeans_objective(std::span<const double> points, int dim, const Clustering& clustering) {
    const int n = static_cast<int>(points.size() / static_cast<std::size_t>(dim));
    if (clustering.assignments.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("kmeans_objective: assignment count mismatch");
    }
    double j = 0.0;
    for (int i = 0; i < n; ++i) {
        const int c = clustering.assignments[static_cast<std::size_t>(i)];
        if (c < 0 || c >= clustering.k) throw std::out_of_range("kmeans_objective: bad assignment");
        j += kernels::squared_distance(point_at(points, dim, i).data(), clustering.centroid(c).data(),
                                       static_cast<std::size_t>(dim));
    }
    return j;
}

TopicCluster topic_cluster(const embedding::EmbeddingModel& model, const std::string& seed_term,
                           int neighborhood_size, int k, std::uint64_t seed) {
    const int seed_id = model.vocab.id(seed_term);
    if (seed_id < 0) throw std::runtime_error("term not in vocabulary: " + seed_term);
    if (neighborhood_size < 1) throw std::invalid_argument("topic_cluster: neighborhood_size must be >= 1");

    const int size = std::min(neighborhood_size, model.vocab_size() - 1);
    TopicCluster topic;
    topic.seed_term = seed_term;
    topic.neighborhood = embedding::nearest_neighbors(model, seed_term, size);

    // seed first, then neighbors; all length-normalized (angular geometry)
    const int dim = model.dim();
    const int n = size + 1;
    std::vector<double> points(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
    const auto put = [&](int row, std::span<const double> vec) {
        double* dst = points.data() + static_cast<std::size_t>(row) * static_cast<std::size_t>(dim);
        std::copy_n(vec.data(), dim, dst);
        const double nrm = kernels::norm(dst, static_cast<std::size_t>(dim));
        if (nrm > 0.0) kernels::scale(dst, 1.0 / nrm, static_cast<std::size_t>(dim));
    };
    put(0, model.input_row(seed_id));
    for (int i = 0; i < size; ++i) {
        put(i + 1, model.input_row(model.vocab.id(topic.neighborhood[static_cast<std::size_t>(i)].first)));
    }

    topic.clustering = kmeans(points, dim, std::min(k, n), seed);
    const int seed_cluster = topic.clustering.assignments.front();
    const auto center = topic.clustering.centroid(seed_cluster);
    topic.centroid_of_topic.assign(center.begin(), center.end());
    return topic;
}

}  // namespace semdrift::cluster
