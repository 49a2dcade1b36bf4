#include "kglite/sampling.hpp"

#include <algorithm>

namespace kglite {

NegScheme neg_scheme_from_string(const std::string& s) {
    if (s == "random") return NegScheme::random;
    if (s == "ontology") return NegScheme::ontology;
    if (s == "embedding") return NegScheme::embedding;
    throw data_error("unknown negative-sampling scheme: " + s);
}

std::string neg_scheme_to_string(NegScheme s) {
    switch (s) {
        case NegScheme::random: return "random";
        case NegScheme::ontology: return "ontology";
        case NegScheme::embedding: return "embedding";
    }
    return "?";
}

std::vector<Triple> ontology_negatives(const Triple& triple, const TypePools& pools, int n_neg,
                                       std::int64_t num_entities, Rng& rng) {
    if (n_neg < 1) throw std::invalid_argument("n_neg must be >= 1");
    std::vector<Triple> negs;
    negs.reserve(static_cast<std::size_t>(n_neg));
    for (int i = 0; i < n_neg; ++i) {
        const bool corrupt_head = rng.coin();
        const auto& pool = corrupt_head ? pools.heads(triple.r) : pools.tails(triple.r);
        const std::int32_t truth = corrupt_head ? triple.h : triple.t;

        const bool pool_usable =
            pool.size() > 1 || (pool.size() == 1 && pool[0] != truth);
        Triple neg = triple;
        std::int32_t candidate;
        if (pool_usable) {
            do {
                candidate = pool[rng.uniform_int(static_cast<std::int64_t>(pool.size()))];
            } while (candidate == truth);
        } else {
            // degenerate pool: uniform over all entities
            if (num_entities < 2) throw data_error("cannot corrupt triples with a single entity");
            do {
                candidate = static_cast<std::int32_t>(rng.uniform_int(num_entities));
            } while (candidate == truth);
        }
        (corrupt_head ? neg.h : neg.t) = candidate;
        negs.push_back(neg);
    }
    return negs;
}

std::vector<Triple> embedding_negatives(const Triple& triple, const EmbeddingModel& model, int m,
                                        int n_neg, Rng& rng, const FilterIndex* exclude) {
    if (n_neg < 1) throw std::invalid_argument("n_neg must be >= 1");
    if (m < n_neg) throw std::invalid_argument("pool size m must be >= n_neg");
    if (model.num_entities < 2) throw data_error("cannot corrupt triples with a single entity");

    std::vector<Triple> pool;
    pool.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        Triple neg = triple;
        const bool corrupt_head = rng.coin();
        const std::int32_t truth = corrupt_head ? triple.h : triple.t;
        std::int32_t candidate = truth;
        // bounded rejection of the true entity and (optionally) known triples
        for (int attempt = 0; attempt < 128; ++attempt) {
            candidate = static_cast<std::int32_t>(rng.uniform_int(model.num_entities));
            if (candidate == truth) continue;
            (corrupt_head ? neg.h : neg.t) = candidate;
            if (exclude != nullptr && exclude->contains(neg)) continue;
            break;
        }
        if (candidate == truth) {
            do {
                candidate = static_cast<std::int32_t>(rng.uniform_int(model.num_entities));
            } while (candidate == truth);
            (corrupt_head ? neg.h : neg.t) = candidate;
        }
        pool.push_back(neg);
    }

    struct Scored {
        double score;
        std::int32_t corrupted;
        std::size_t idx;
    };
    std::vector<Scored> scored(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Triple& n = pool[i];
        const std::int32_t corrupted = n.h != triple.h ? n.h : n.t;
        scored[i] = {model.loss_score(n.h, n.r, n.t), corrupted, i};
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.corrupted != b.corrupted) return a.corrupted < b.corrupted;
        return a.idx < b.idx;
    });

    std::vector<Triple> negs;
    negs.reserve(static_cast<std::size_t>(n_neg));
    for (int i = 0; i < n_neg; ++i) negs.push_back(pool[scored[i].idx]);
    return negs;
}

std::vector<Triple> draw_negatives(const NegSpec& spec, const Triple& triple,
                                   const TypePools& pools, const EmbeddingModel& model,
                                   const FilterIndex* filter, Rng& rng) {
    switch (spec.scheme) {
        case NegScheme::random:
            return sample_negatives_uniform(triple, spec.n_neg, model.num_entities, rng);
        case NegScheme::ontology:
            return ontology_negatives(triple, pools, spec.n_neg, model.num_entities, rng);
        case NegScheme::embedding:
            return embedding_negatives(triple, model, spec.pool_size, spec.n_neg, rng,
                                       spec.exclude_known ? filter : nullptr);
    }
    return {};
}

}  // namespace kglite
