#include "kglite/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kglite {

void Scorer::score_tails(std::int32_t h, std::int32_t r, std::span<double> out) const {
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = score(h, r, static_cast<std::int32_t>(c));
}

void Scorer::score_heads(std::int32_t r, std::int32_t t, std::span<double> out) const {
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = score(static_cast<std::int32_t>(c), r, t);
}

void DecoderScorer::score_column(std::int32_t fixed, std::int32_t r, bool fixed_is_head,
                                 std::span<double> out) const {
    const std::int32_t g = partition_.group_of(r);
    const GroupClassifier& clf = ensemble_.classifiers.at(g);
    std::vector<double> features(selector_.d_out);
    for (std::size_t c = 0; c < out.size(); ++c) {
        const std::int32_t cand = static_cast<std::int32_t>(c);
        if (fixed_is_head)
            selector_.project(g, fixed, r, cand, model_, features.data());
        else
            selector_.project(g, cand, r, fixed, model_, features.data());
        out[c] = clf.predict(features);
    }
}

void DecoderScorer::score_tails(std::int32_t h, std::int32_t r, std::span<double> out) const {
    score_column(h, r, true, out);
}

void DecoderScorer::score_heads(std::int32_t r, std::int32_t t, std::span<double> out) const {
    score_column(t, r, false, out);
}

double filtered_rank(double target_score, std::span<const double> candidate_scores,
                     std::span<const std::int32_t> filtered_ids, std::int32_t target_id) {
    std::size_t greater = 0, ties = 0;
    auto filt = filtered_ids.begin();
    for (std::size_t i = 0; i < candidate_scores.size(); ++i) {
        const std::int32_t id = static_cast<std::int32_t>(i);
        while (filt != filtered_ids.end() && *filt < id) ++filt;
        if (filt != filtered_ids.end() && *filt == id) continue;
        if (id == target_id) continue;
        if (candidate_scores[i] > target_score)
            ++greater;
        else if (candidate_scores[i] == target_score)
            ++ties;
    }
    return 1.0 + static_cast<double>(greater) + static_cast<double>(ties) * 0.5;
}

std::string EvalReport::summary() const {
    std::ostringstream os;
    os << "queries: " << n_queries << "\n";
    os << "MRR:     " << mrr << "  (tail " << mrr_tail << ", head " << mrr_head << ")\n";
    for (const auto& [k, v] : hits) os << "Hits@" << k << ":  " << v << "\n";
    return os.str();
}

EvalReport link_prediction(const Scorer& scorer, const TripleStore& store,
                           const FilterIndex& filter, int threads,
                           std::vector<QueryRank>* dump) {
    if (store.test.empty()) throw data_error("link_prediction: empty test split");
    return link_prediction_over(scorer, store.test, filter, threads, dump);
}

EvalReport link_prediction_over(const Scorer& scorer, std::span<const Triple> queries,
                                const FilterIndex& filter, int threads,
                                std::vector<QueryRank>* dump) {
    if (queries.empty()) throw data_error("link_prediction: no queries");
    const std::size_t n = queries.size();
    const std::int64_t ne = scorer.num_entities();

    std::vector<double> tail_ranks(n), head_ranks(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> scores(static_cast<std::size_t>(ne));
        std::vector<std::int32_t> filt;
        for (std::size_t i = lo; i < hi; ++i) {
            const Triple& q = queries[i];

            scorer.score_tails(q.h, q.r, scores);
            const auto& known_t = filter.tails(q.h, q.r);
            filt.assign(known_t.begin(), known_t.end());
            filt.erase(std::remove(filt.begin(), filt.end(), q.t), filt.end());
            tail_ranks[i] = filtered_rank(scores[q.t], scores, filt, q.t);

            scorer.score_heads(q.r, q.t, scores);
            const auto& known_h = filter.heads(q.r, q.t);
            filt.assign(known_h.begin(), known_h.end());
            filt.erase(std::remove(filt.begin(), filt.end(), q.h), filt.end());
            head_ranks[i] = filtered_rank(scores[q.h], scores, filt, q.h);
        }
    });

    EvalReport report;
    report.n_queries = 2 * n;
    report.hits[1] = report.hits[3] = report.hits[10] = 0.0;
    double rr_tail = 0.0, rr_head = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rr_tail += 1.0 / tail_ranks[i];
        rr_head += 1.0 / head_ranks[i];
        for (auto& [k, v] : report.hits) {
            if (tail_ranks[i] <= k) v += 1.0;
            if (head_ranks[i] <= k) v += 1.0;
        }
    }
    report.mrr_tail = rr_tail / static_cast<double>(n);
    report.mrr_head = rr_head / static_cast<double>(n);
    report.mrr = (rr_tail + rr_head) / static_cast<double>(2 * n);
    for (auto& [k, v] : report.hits) v /= static_cast<double>(2 * n);

    if (dump != nullptr) {
        dump->clear();
        dump->reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            dump->push_back({queries[i], true, tail_ranks[i]});
            dump->push_back({queries[i], false, head_ranks[i]});
        }
    }
    return report;
}

ThresholdTable tune_thresholds(
    const std::map<std::int32_t, std::vector<std::pair<double, int>>>& val_scores) {
    ThresholdTable table;
    for (const auto& [rel, samples] : val_scores) {
        if (samples.empty()) continue;
        std::vector<std::pair<double, int>> sorted(samples.begin(), samples.end());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        std::size_t total_pos = 0;
        for (const auto& [s, y] : sorted) total_pos += y;

        std::vector<double> candidates;
        candidates.push_back(sorted.front().first - 1.0);  // accept everything
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (sorted[i].first < sorted[i + 1].first)
                candidates.push_back(0.5 * (sorted[i].first + sorted[i + 1].first));
        }
        candidates.push_back(sorted.back().first + 1.0);  // reject everything

        // positives among scores strictly below each sorted position
        std::vector<std::size_t> pos_prefix(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) pos_prefix[i + 1] = pos_prefix[i] + sorted[i].second;

        double best_acc = -1.0, best_thr = 0.0;
        for (const double thr : candidates) {
            std::size_t below = 0;
            {
                std::size_t lo = 0, hi = n;
                while (lo < hi) {
                    const std::size_t mid = (lo + hi) / 2;
                    if (sorted[mid].first < thr)
                        lo = mid + 1;
                    else
                        hi = mid;
                }
                below = lo;
            }
            const std::size_t pos_below = pos_prefix[below];
            const std::size_t neg_below = below - pos_below;
            const std::size_t correct = (total_pos - pos_below) + neg_below;
            const double acc = static_cast<double>(correct) / static_cast<double>(n);
            if (acc > best_acc) {  // ties keep the lowest candidate
                best_acc = acc;
                best_thr = thr;
            }
        }
        table.per_relation[rel] = best_thr;
    }
    return table;
}

TcReport triple_classification(const Scorer& scorer, const TripleStore& store,
                               const ThresholdTable& thresholds) {
    if (store.test_neg.empty())
        throw data_error("triple_classification: dataset has no labeled test negatives");
    TcReport rep;
    auto judge = [&](const Triple& t, bool truth) {
        const bool predicted = scorer.score(t.h, t.r, t.t) >= thresholds.get(t.r);
        if (truth && predicted) ++rep.tp;
        else if (truth && !predicted) ++rep.fn;
        else if (!truth && predicted) ++rep.fp;
        else ++rep.tn;
    };
    for (const Triple& t : store.test) judge(t, true);
    for (const Triple& t : store.test_neg) judge(t, false);
    const std::int64_t total = rep.tp + rep.fp + rep.tn + rep.fn;
    rep.accuracy = total > 0 ? static_cast<double>(rep.tp + rep.tn) / static_cast<double>(total) : 0.0;
    const std::int64_t f1_den = 2 * rep.tp + rep.fp + rep.fn;
    rep.f1 = f1_den > 0 ? 2.0 * static_cast<double>(rep.tp) / static_cast<double>(f1_den) : 0.0;
    return rep;
}

std::int64_t embedding_param_count(Family family, int d, std::int64_t num_entities,
                                   std::int64_t num_relations) {
    return num_entities * entity_width(family, d) + num_relations * relation_width(family, d);
}

ParamCounts count_parameters(const EmbeddingModel& model, const FeatureSelector* selector,
                             const DecoderEnsemble* ensemble) {
    ParamCounts counts;
    counts.embedding =
        embedding_param_count(model.family, model.d, model.num_entities, model.num_relations);
    if (selector != nullptr) {
        // basis (n_v) + the mean's scalar contribution + threshold, per kept dim
        counts.selector = static_cast<std::int64_t>(selector->groups.size()) * selector->d_out *
                          (selector->nv + 2);
    }
    if (ensemble != nullptr) {
        for (const auto& clf : ensemble->classifiers) counts.decoder += clf.parameter_count();
    }
    return counts;
}

}  // namespace kglite
