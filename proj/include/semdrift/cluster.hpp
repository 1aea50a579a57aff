#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semdrift/embedding.hpp"

namespace semdrift::cluster {

struct Clustering {
    std::vector<double> centroids;  // k x dim row-major
    std::vector<int> assignments;   // point -> cluster index
    double objective = 0.0;         // J = sum of squared distances to assigned centroid
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // J after each Lloyd iteration, non-increasing
    int k = 0;
    int dim = 0;

    std::span<const double> centroid(int c) const {
        return {centroids.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
};

// Lloyd iterations with k-means++ seeding, best of `restarts` runs by J
// (ties broken by restart index). Empty clusters are re-seeded to the point
// farthest from its assigned centroid. Throws when k < 1 or k > N.
Clustering kmeans(std::span<const double> points, int dim, int k, std::uint64_t seed,
                  int max_iter = 100, double tol = 1e-6, int restarts = 10);

double kmeans_objective(std::span<const double> points, int dim, const Clustering& clustering);

struct TopicCluster {
    std::string seed_term;
    std::vector<std::pair<std::string, double>> neighborhood;  // (token, cosine), descending
    Clustering clustering;                  // over [seed; neighborhood] unit vectors
    std::vector<double> centroid_of_topic;  // center of the cluster containing the seed
};

// Neighborhood = the seed plus its `neighborhood_size` angle-wise nearest
// neighbors (clamped to V-1), length-normalized before clustering.
TopicCluster topic_cluster(const embedding::EmbeddingModel& model, const std::string& seed_term,
                           int neighborhood_size = 100, int k = 1, std::uint64_t seed = 1);

}  // namespace semdrift::cluster
