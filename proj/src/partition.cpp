#include "kglite/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace kglite {

namespace {

double sq_dist(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = a[i] - b[i];
        s += u * u;
    }
    return s;
}

}  // namespace

RelationPartition cluster_relations(const EmbeddingModel& model, int k, std::uint64_t seed,
                                    int max_iters, bool normalize) {
    const std::int64_t nr = model.num_relations;
    if (k < 1 || k > nr) throw std::invalid_argument("cluster_relations: need 1 <= k <= |R|");
    const std::size_t width = static_cast<std::size_t>(model.relation_stride());

    std::vector<std::vector<double>> points(nr, std::vector<double>(width));
    for (std::int64_t r = 0; r < nr; ++r) {
        const auto row = model.relation_row(r);
        std::copy(row.begin(), row.end(), points[r].begin());
        if (normalize) {
            double n2 = 0.0;
            for (double v : points[r]) n2 += v * v;
            const double n = std::sqrt(n2);
            if (n > 0.0)
                for (double& v : points[r]) v /= n;
        }
    }

    RelationPartition part;
    part.k = k;
    part.assignment.assign(nr, 0);

    // k distinct relations as initial centroids
    Rng rng(seed);
    std::vector<std::int32_t> ids(nr);
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    part.centroids.assign(k, {});
    for (int c = 0; c < k; ++c) part.centroids[c] = points[ids[c]];

    std::vector<std::int32_t> prev(nr, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        // assignment step (ties to the lowest centroid index)
        double objective = 0.0;
        for (std::int64_t r = 0; r < nr; ++r) {
            double best = std::numeric_limits<double>::infinity();
            std::int32_t arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d2 = sq_dist(points[r].data(), part.centroids[c].data(), width);
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            part.assignment[r] = arg;
            objective += best;
        }

        // reseed empty clusters at the point farthest from its own centroid
        std::vector<std::int64_t> counts(k, 0);
        for (std::int64_t r = 0; r < nr; ++r) ++counts[part.assignment[r]];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double far = -1.0;
            std::int64_t pick = -1;
            for (std::int64_t r = 0; r < nr; ++r) {
                if (counts[part.assignment[r]] <= 1) continue;  // keep donor groups non-empty
                const double d2 =
                    sq_dist(points[r].data(), part.centroids[part.assignment[r]].data(), width);
                if (d2 > far) {
                    far = d2;
                    pick = r;
                }
            }
            if (pick < 0) continue;  // k <= |R| guarantees this never triggers
            objective -= far;
            --counts[part.assignment[pick]];
            part.assignment[pick] = c;
            ++counts[c];
            part.centroids[c] = points[pick];
        }
        part.objective_history.push_back(objective);

        if (part.assignment == prev) break;
        prev = part.assignment;

        // update step
        for (int c = 0; c < k; ++c) std::fill(part.centroids[c].begin(), part.centroids[c].end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::int64_t r = 0; r < nr; ++r) {
            const int c = part.assignment[r];
            ++counts[c];
            for (std::size_t j = 0; j < width; ++j) part.centroids[c][j] += points[r][j];
        }
        for (int c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < width; ++j)
                part.centroids[c][j] /= static_cast<double>(counts[c]);
        }
    }
    return part;
}

void save_partition(const RelationPartition& p, const std::string& assignment_path,
                    const std::string& centroid_path) {
    std::ofstream out(assignment_path);
    if (!out) throw data_error("cannot write " + assignment_path);
    for (std::size_t r = 0; r < p.assignment.size(); ++r)
        out << r << '\t' << p.assignment[r] << '\n';

    std::ofstream cent(centroid_path);
    if (!cent) throw data_error("cannot write " + centroid_path);
    char buf[32];
    for (const auto& c : p.centroids) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", c[j]);
            if (j) cent << ' ';
            cent << buf;
        }
        cent << '\n';
    }
}

RelationPartition load_partition(const std::string& assignment_path,
                                 const std::string& centroid_path) {
    RelationPartition p;
    std::ifstream in(assignment_path);
    if (!in) throw data_error("cannot open " + assignment_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::int64_t r;
        std::int32_t g;
        if (!(ss >> r >> g)) throw data_error(assignment_path + ": malformed assignment line");
        if (static_cast<std::size_t>(r) != p.assignment.size())
            throw data_error(assignment_path + ": relation ids must be dense and ordered");
        p.assignment.push_back(g);
    }

    std::ifstream cent(centroid_path);
    if (!cent) throw data_error("cannot open " + centroid_path);
    while (std::getline(cent, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        p.centroids.push_back(std::move(row));
    }
    p.k = static_cast<int>(p.centroids.size());
    for (std::int32_t g : p.assignment) {
        if (g < 0 || g >= p.k) throw data_error(assignment_path + ": group id out of range");
    }
    return p;
}

}  // namespace kglite
