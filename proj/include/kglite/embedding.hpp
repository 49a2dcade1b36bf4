#ifndef KGLITE_EMBEDDING_HPP
#define KGLITE_EMBEDDING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglite/common.hpp"
#include "kglite/dataset.hpp"

namespace kglite {

enum class Family { TransE, DistMult, RotatE, ComplEx };

Family family_from_string(const std::string& s);
std::string family_to_string(Family f);

/// Scalar triple variables per embedding dimension: 3 for TransE/DistMult,
/// 5 for RotatE (complex entities, phase relations), 6 for ComplEx.
inline int nv_of(Family f) {
    switch (f) {
        case Family::TransE:
        case Family::DistMult: return 3;
        case Family::RotatE: return 5;
        case Family::ComplEx: return 6;
    }
    return 0;
}

// parameters per entity row: d real values, or 2d for complex-valued entities
inline int entity_width(Family f, int d) {
    return (f == Family::RotatE || f == Family::ComplEx) ? 2 * d : d;
}

// parameters per relation row: RotatE stores one phase per dimension
inline int relation_width(Family f, int d) {
    return f == Family::ComplEx ? 2 * d : d;
}

// number of variables the head / relation / tail entity contributes per dimension
inline int head_var_count(Family f) { return (f == Family::RotatE || f == Family::ComplEx) ? 2 : 1; }
inline int relation_var_count(Family f) { return f == Family::ComplEx ? 2 : 1; }
inline int tail_var_count(Family f) { return head_var_count(f); }

/// Entity/relation embedding tables for one model family. Complex-valued
/// rows are stored interleaved: [re0, im0, re1, im1, ...]. RotatE relation
/// rows store the rotation phase per dimension, so every dimension encodes
/// a unit-modulus rotation.
struct EmbeddingModel {
    Family family = Family::TransE;
    int d = 0;
    double gamma = 0.0;  // additive margin applied to distance-family scores in losses
    std::int64_t num_entities = 0;
    std::int64_t num_relations = 0;
    std::vector<double> entity_table;    // num_entities x entity_width
    std::vector<double> relation_table;  // num_relations x relation_width

    int entity_stride() const { return entity_width(family, d); }
    int relation_stride() const { return relation_width(family, d); }

    std::span<const double> entity_row(std::int64_t id) const {
        check_entity(id);
        return {entity_table.data() + id * entity_stride(), static_cast<std::size_t>(entity_stride())};
    }
    std::span<const double> relation_row(std::int64_t id) const {
        check_relation(id);
        return {relation_table.data() + id * relation_stride(), static_cast<std::size_t>(relation_stride())};
    }
    std::span<double> entity_row(std::int64_t id) {
        check_entity(id);
        return {entity_table.data() + id * entity_stride(), static_cast<std::size_t>(entity_stride())};
    }
    std::span<double> relation_row(std::int64_t id) {
        check_relation(id);
        return {relation_table.data() + id * relation_stride(), static_cast<std::size_t>(relation_stride())};
    }

    /// f_r(h,t) exactly per the family's formula:
    ///   TransE   -||h + r - t||_2
    ///   DistMult <h, r, t>
    ///   RotatE   -||h o r - t||^2
    ///   ComplEx  Re(<h, r, conj(t)>)
    double score(std::int32_t h, std::int32_t r, std::int32_t t) const;

    /// Score used inside training losses and hard-negative ranking: gamma + f.
    double loss_score(std::int32_t h, std::int32_t r, std::int32_t t) const {
        return gamma + score(h, r, t);
    }

    /// The dim-th per-dimension triple variables [v_h, v_r, v_t], n_v values.
    void dim_variables(std::int32_t h, std::int32_t r, std::int32_t t, int dim, double* out) const;

    std::int64_t parameter_count() const {
        return num_entities * entity_stride() + num_relations * relation_stride();
    }

private:
    void check_entity(std::int64_t id) const {
        if (id < 0 || id >= num_entities) throw std::out_of_range("entity id out of range");
    }
    void check_relation(std::int64_t id) const {
        if (id < 0 || id >= num_relations) throw std::out_of_range("relation id out of range");
    }
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    int batch_size = 512;
    int n_neg = 8;          // negatives per positive
    double alpha = 1.0;     // self-adversarial temperature
    double gamma = 12.0;    // margin for distance families (TransE/RotatE)
    std::uint64_t seed = 1;
    bool clip_gradients = false;  // clip per-batch gradient at norm 1.0
    int log_every = 0;            // epochs between progress lines, 0 = quiet

    void validate() const;
};

// margin actually applied: distance families keep gamma, semantic families use 0
double effective_gamma(Family f, double gamma);

/// Fresh model with uniform init in [-6/sqrt(d), 6/sqrt(d)]; RotatE phases
/// uniform in [-pi, pi]. Deterministic in the seed.
EmbeddingModel init_model(Family family, int d, std::int64_t num_entities,
                          std::int64_t num_relations, double gamma, std::uint64_t seed);

/// Corrupt one side (head or tail, side uniform) with an entity uniform over
/// [0,|E|); redraws corruptions equal to the true entity.
std::vector<Triple> sample_negatives_uniform(const Triple& triple, int n_neg,
                                             std::int64_t num_entities, Rng& rng);

/// Sparse per-row gradient accumulator used by training and gradient checks.
struct GradientBuffer {
    std::unordered_map<std::int32_t, std::vector<double>> entity, relation;

    std::vector<double>& entity_slot(std::int32_t id, int width) {
        auto& v = entity[id];
        if (v.empty()) v.assign(width, 0.0);
        return v;
    }
    std::vector<double>& relation_slot(std::int32_t id, int width) {
        auto& v = relation[id];
        if (v.empty()) v.assign(width, 0.0);
        return v;
    }
    void clear() {
        entity.clear();
        relation.clear();
    }
};

/// Self-adversarial negative-sampling loss for one positive and its negatives:
///   L = -log s(g + f(pos)) - sum_i p_i log s(-(g + f(neg_i)))
/// with p = softmax(alpha * (g + f(neg))) treated as constants (stop-gradient);
/// alpha = 0 gives uniform weights 1/n.
double self_adversarial_loss(const EmbeddingModel& model, const Triple& positive,
                             std::span<const Triple> negatives, double alpha);

/// Same loss, accumulating dL/dtheta for every touched embedding row into grad.
double self_adversarial_loss_grad(const EmbeddingModel& model, const Triple& positive,
                                  std::span<const Triple> negatives, double alpha,
                                  GradientBuffer& grad);

struct TrainResult {
    EmbeddingModel model;
    std::vector<double> epoch_loss;  // mean loss per epoch
};

/// Mini-batch SGD on the self-adversarial loss. Single-threaded and
/// deterministic in config.seed. Throws numeric_error on divergence.
TrainResult train(const TripleStore& store, Family family, int d, const TrainConfig& config);

/// Manifest IO: a JSON header (family, d, |E|, |R|, seed, gamma) referencing
/// two text tables, one row per id, space-separated values (themselves stored
/// with enough digits for an exact double round trip).
void save_model(const EmbeddingModel& model, const std::string& manifest_path,
                std::uint64_t seed);
EmbeddingModel load_model(const std::string& manifest_path,
                          std::int64_t expected_entities = -1,
                          std::int64_t expected_relations = -1);

}  // namespace kglite

#endif  // KGLITE_EMBEDDING_HPP
