#ifndef KGLITE_EVAL_HPP
#define KGLITE_EVAL_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kglite/dataset.hpp"
#include "kglite/embedding.hpp"
#include "kglite/gbm.hpp"

namespace kglite {

/// Anything that can score a triple and, for ranking, a whole candidate
/// column at once. Batch paths must agree with score() bit for bit.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(std::int32_t h, std::int32_t r, std::int32_t t) const = 0;
    // scores for (h, r, c) over every candidate tail c in [0,|E|)
    virtual void score_tails(std::int32_t h, std::int32_t r, std::span<double> out) const;
    // scores for (c, r, t) over every candidate head c
    virtual void score_heads(std::int32_t r, std::int32_t t, std::span<double> out) const;
    virtual std::int64_t num_entities() const = 0;
};

/// Raw KGE score function f_r.
class KgeScorer : public Scorer {
public:
    explicit KgeScorer(const EmbeddingModel& model) : model_(model) {}
    double score(std::int32_t h, std::int32_t r, std::int32_t t) const override {
        return model_.score(h, r, t);
    }
    std::int64_t num_entities() const override { return model_.num_entities; }

private:
    const EmbeddingModel& model_;
};

/// Full decoder path: group routing, pruned-feature projection, classifier
/// probability. The batch paths reuse the head/relation part of every
/// feature across candidates.
class DecoderScorer : public Scorer {
public:
    DecoderScorer(const DecoderEnsemble& ensemble, const FeatureSelector& selector,
                  const RelationPartition& partition, const EmbeddingModel& model)
        : ensemble_(ensemble), selector_(selector), partition_(partition), model_(model) {}

    double score(std::int32_t h, std::int32_t r, std::int32_t t) const override {
        return ensemble_.predict({h, r, t}, selector_, partition_, model_);
    }
    void score_tails(std::int32_t h, std::int32_t r, std::span<double> out) const override;
    void score_heads(std::int32_t r, std::int32_t t, std::span<double> out) const override;
    std::int64_t num_entities() const override { return model_.num_entities; }

private:
    void score_column(std::int32_t fixed, std::int32_t r, bool fixed_is_head,
                      std::span<double> out) const;
    const DecoderEnsemble& ensemble_;
    const FeatureSelector& selector_;
    const RelationPartition& partition_;
    const EmbeddingModel& model_;
};

/// Filtered rank with mean-tie handling:
///   rank = 1 + #strictly-greater + #ties / 2
/// over the candidates not in filtered_ids; the target's own slot is skipped
/// (its score enters as target_score). filtered_ids must be sorted and must
/// not contain the target.
double filtered_rank(double target_score, std::span<const double> candidate_scores,
                     std::span<const std::int32_t> filtered_ids, std::int32_t target_id);

struct EvalReport {
    double mrr = 0.0;
    std::map<int, double> hits;  // k in {1,3,10}
    std::size_t n_queries = 0;
    double mrr_head = 0.0, mrr_tail = 0.0;  // per-direction breakdown

    std::string summary() const;
};

struct QueryRank {
    Triple triple;
    bool tail_query = false;  // true: (h,r,?), false: (?,r,t)
    double rank = 0.0;
};

/// Filtered link prediction over the test split: both (h,r,?) and (?,r,t)
/// per triple, candidates are all |E| entities minus the other known-true
/// answers. Optionally dumps every per-query rank.
EvalReport link_prediction(const Scorer& scorer, const TripleStore& store,
                           const FilterIndex& filter, int threads = 1,
                           std::vector<QueryRank>* dump = nullptr);

// same protocol over an arbitrary query set (e.g. the validation split)
EvalReport link_prediction_over(const Scorer& scorer, std::span<const Triple> queries,
                                const FilterIndex& filter, int threads = 1,
                                std::vector<QueryRank>* dump = nullptr);

struct ThresholdTable {
    std::map<std::int32_t, double> per_relation;
    double fallback = 0.5;

    double get(std::int32_t r) const {
        auto it = per_relation.find(r);
        return it == per_relation.end() ? fallback : it->second;
    }
};

/// Per relation, the threshold maximizing validation accuracy, scanned over
/// the midpoints of sorted distinct scores plus one accept-all and one
/// reject-all candidate; ties break to the lowest candidate.
ThresholdTable tune_thresholds(
    const std::map<std::int32_t, std::vector<std::pair<double, int>>>& val_scores);

struct TcReport {
    double accuracy = 0.0;
    double f1 = 0.0;
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Accuracy/F1 over the labeled test split (positives + curated negatives);
/// predicts 1 iff score >= threshold(relation).
TcReport triple_classification(const Scorer& scorer, const TripleStore& store,
                               const ThresholdTable& thresholds);

struct ParamCounts {
    std::int64_t embedding = 0;
    std::int64_t selector = 0;
    std::int64_t decoder = 0;
    std::int64_t total() const { return embedding + selector + decoder; }
};

std::int64_t embedding_param_count(Family family, int d, std::int64_t num_entities,
                                   std::int64_t num_relations);

ParamCounts count_parameters(const EmbeddingModel& model, const FeatureSelector* selector = nullptr,
                             const DecoderEnsemble* ensemble = nullptr);

}  // namespace kglite

#endif  // KGLITE_EVAL_HPP
