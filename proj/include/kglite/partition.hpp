#ifndef KGLITE_PARTITION_HPP
#define KGLITE_PARTITION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kglite/embedding.hpp"

namespace kglite {

/// Assignment of every relation to one of k groups, from k-Means over the
/// relation embedding rows (RotatE clusters the phase values directly).
struct RelationPartition {
    int k = 0;
    std::vector<std::vector<double>> centroids;  // k rows in relation-embedding space
    std::vector<std::int32_t> assignment;        // relation id -> group id
    std::vector<double> objective_history;       // sum of squared distances per iteration

    std::int32_t group_of(std::int32_t r) const {
        if (r < 0 || static_cast<std::size_t>(r) >= assignment.size())
            throw std::out_of_range("group_of: unknown relation id");
        return assignment[r];
    }

    // relation ids per group
    std::vector<std::vector<std::int32_t>> groups() const {
        std::vector<std::vector<std::int32_t>> g(k);
        for (std::size_t r = 0; r < assignment.size(); ++r)
            g[assignment[r]].push_back(static_cast<std::int32_t>(r));
        return g;
    }
};

/// Lloyd's algorithm, seeded with k distinct relations as initial centroids.
/// Runs until the assignment reaches a fixed point or max_iters. Empty
/// clusters are reseeded at the point farthest from its assigned centroid,
/// so no group is empty on return. With normalize=true rows are L2-normalized
/// before clustering.
RelationPartition cluster_relations(const EmbeddingModel& model, int k, std::uint64_t seed,
                                    int max_iters = 100, bool normalize = false);

void save_partition(const RelationPartition& p, const std::string& assignment_path,
                    const std::string& centroid_path);
RelationPartition load_partition(const std::string& assignment_path,
                                 const std::string& centroid_path);

}  // namespace kglite

#endif  // KGLITE_PARTITION_HPP
