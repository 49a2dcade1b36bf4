#ifndef KGLITE_TEST_ORACLES_HPP
#define KGLITE_TEST_ORACLES_HPP

// Independent brute-force reference implementations used by unit tests and
// the acceptance suite. These intentionally avoid the library's own code
// paths: PCA goes through a Jacobi SVD of the data matrix instead of the
// Gram-matrix eigensolver, entropies are recomputed with naive full passes,
// and ranks come from comparison counting over explicitly materialized
// candidate lists.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "kglite/dataset.hpp"
#include "kglite/eval.hpp"

namespace kglite::oracle {

struct PcaRef {
    std::vector<double> basis;
    double singular_value = 0.0;
};

// top right-singular direction of the centered matrix via full SVD
inline PcaRef pca_1d(const std::vector<double>& rows, std::size_t n_rows, int n_cols) {
    Eigen::MatrixXd m(n_rows, n_cols);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (int j = 0; j < n_cols; ++j) m(i, j) = rows[i * n_cols + j];
    m.rowwise() -= m.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    PcaRef ref;
    ref.singular_value = svd.singularValues()(0);
    Eigen::VectorXd v = svd.matrixV().col(0);
    for (int j = 0; j < n_cols; ++j) {
        if (std::abs(v(j)) > 1e-12) {
            if (v(j) < 0.0) v = -v;
            break;
        }
    }
    ref.basis.resize(n_cols);
    for (int j = 0; j < n_cols; ++j) ref.basis[j] = v(j);
    return ref;
}

inline double entropy_of(std::size_t pos, std::size_t n) {
    if (n == 0 || pos == 0 || pos == n) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

// weighted split entropy at one threshold, naive full pass
inline double split_entropy(const std::vector<double>& e, const std::vector<std::uint8_t>& y,
                            double thr) {
    std::size_t nl = 0, pl = 0, nr = 0, pr = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] <= thr) {
            ++nl;
            pl += y[i];
        } else {
            ++nr;
            pr += y[i];
        }
    }
    const double hl = entropy_of(pl, nl);
    const double hr = entropy_of(pr, nr);
    return (static_cast<double>(nl) * hl + static_cast<double>(nr) * hr) /
           static_cast<double>(nl + nr);
}

// brute-force scan over the same uniform candidate grid
inline std::pair<double, double> dft_entropy(const std::vector<double>& e,
                                             const std::vector<std::uint8_t>& y, int n_bins) {
    double lo = e[0], hi = e[0];
    for (double v : e) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double best = std::numeric_limits<double>::infinity(), best_thr = lo;
    for (int b = 1; b <= n_bins; ++b) {
        const double thr = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(n_bins + 1);
        const double h = split_entropy(e, y, thr);
        if (h < best) {
            best = h;
            best_thr = thr;
        }
    }
    return {best, best_thr};
}

// filtered rank by materializing the surviving candidate list and counting
inline double filtered_rank_ref(double target_score, const std::vector<double>& scores,
                                const std::vector<std::int32_t>& filtered, std::int32_t target) {
    std::vector<double> kept;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const std::int32_t id = static_cast<std::int32_t>(i);
        if (id == target) continue;
        if (std::find(filtered.begin(), filtered.end(), id) != filtered.end()) continue;
        kept.push_back(scores[i]);
    }
    double greater = 0.0, ties = 0.0;
    for (double s : kept) {
        if (s > target_score) greater += 1.0;
        else if (s == target_score) ties += 1.0;
    }
    return 1.0 + greater + ties / 2.0;
}

struct LinkRef {
    double mrr = 0.0;
    double hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
    std::vector<double> ranks;
};

// exhaustive re-evaluation of the filtered protocol, one scorer call per
// candidate, aggregation recomputed from scratch
inline LinkRef link_prediction_ref(const Scorer& scorer, const TripleStore& store,
                                   const FilterIndex& filter) {
    LinkRef ref;
    const std::int64_t ne = scorer.num_entities();
    for (const Triple& q : store.test) {
        for (int dir = 0; dir < 2; ++dir) {
            const bool tail_query = dir == 0;
            std::vector<double> scores(static_cast<std::size_t>(ne));
            for (std::int64_t c = 0; c < ne; ++c) {
                scores[c] = tail_query ? scorer.score(q.h, q.r, static_cast<std::int32_t>(c))
                                       : scorer.score(static_cast<std::int32_t>(c), q.r, q.t);
            }
            const auto& known = tail_query ? filter.tails(q.h, q.r) : filter.heads(q.r, q.t);
            std::vector<std::int32_t> filt;
            for (std::int32_t id : known)
                if (id != (tail_query ? q.t : q.h)) filt.push_back(id);
            const double rank =
                filtered_rank_ref(scores[tail_query ? q.t : q.h], scores, filt,
                                  tail_query ? q.t : q.h);
            ref.ranks.push_back(rank);
        }
    }
    for (double r : ref.ranks) {
        ref.mrr += 1.0 / r;
        ref.hits1 += r <= 1.0 ? 1.0 : 0.0;
        ref.hits3 += r <= 3.0 ? 1.0 : 0.0;
        ref.hits10 += r <= 10.0 ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(ref.ranks.size());
    ref.mrr /= n;
    ref.hits1 /= n;
    ref.hits3 /= n;
    ref.hits10 /= n;
    return ref;
}

// best-accuracy threshold by trying every candidate with a naive pass
inline std::pair<double, double> tune_threshold_ref(const std::vector<std::pair<double, int>>& s) {
    std::vector<double> values;
    for (const auto& [v, y] : s) values.push_back(v);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> candidates;
    candidates.push_back(values.front() - 1.0);
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        candidates.push_back(0.5 * (values[i] + values[i + 1]));
    candidates.push_back(values.back() + 1.0);

    double best_acc = -1.0, best_thr = 0.0;
    for (double thr : candidates) {
        std::size_t correct = 0;
        for (const auto& [v, y] : s) correct += ((v >= thr) == (y == 1));
        const double acc = static_cast<double>(correct) / static_cast<double>(s.size());
        if (acc > best_acc) {
            best_acc = acc;
            best_thr = thr;
        }
    }
    return {best_thr, best_acc};
}

}  // namespace kglite::oracle

#endif
