#ifndef KGLITE_SAMPLING_HPP
#define KGLITE_SAMPLING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kglite/dataset.hpp"
#include "kglite/embedding.hpp"

namespace kglite {

enum class NegScheme { random, ontology, embedding };

NegScheme neg_scheme_from_string(const std::string& s);
std::string neg_scheme_to_string(NegScheme s);

struct NegSpec {
    NegScheme scheme = NegScheme::random;
    int n_neg = 2;       // negatives per positive
    int pool_size = 32;  // m, candidate pool for the embedding scheme
    std::uint64_t seed = 1;
    bool exclude_known = true;  // drop filter-index true triples from the embedding pool

    void validate() const {
        if (n_neg < 1) throw std::invalid_argument("n_neg must be >= 1");
        if (pool_size < n_neg) throw std::invalid_argument("pool_size must be >= n_neg");
    }
};

/// Type-constrained corruption: replaces the head with a member of
/// head_pool(r) \ {h} or the tail with a member of tail_pool(r) \ {t},
/// side uniform. Falls back to uniform corruption over all entities when the
/// pool minus the true entity is empty.
std::vector<Triple> ontology_negatives(const Triple& triple, const TypePools& pools, int n_neg,
                                       std::int64_t num_entities, Rng& rng);

/// Hard-negative mining: draws m uniform corruptions, scores them with
/// gamma + f_r, and keeps the n_neg highest. Ties break toward the lower
/// corrupted-entity id. When exclude is given, known true triples are
/// rejected from the pool (bounded retries, then accepted as drawn).
std::vector<Triple> embedding_negatives(const Triple& triple, const EmbeddingModel& model, int m,
                                        int n_neg, Rng& rng, const FilterIndex* exclude = nullptr);

/// Dispatch on spec.scheme; `random` is plain uniform corruption.
std::vector<Triple> draw_negatives(const NegSpec& spec, const Triple& triple,
                                   const TypePools& pools, const EmbeddingModel& model,
                                   const FilterIndex* filter, Rng& rng);

}  // namespace kglite

#endif  // KGLITE_SAMPLING_HPP
