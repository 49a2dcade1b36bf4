#ifndef KGLITE_DATASET_HPP
#define KGLITE_DATASET_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglite/common.hpp"

namespace kglite {

struct Triple {
    std::int32_t h = 0;
    std::int32_t r = 0;
    std::int32_t t = 0;

    friend bool operator==(const Triple& a, const Triple& b) {
        return a.h == b.h && a.r == b.r && a.t == b.t;
    }
    friend bool operator<(const Triple& a, const Triple& b) {
        if (a.h != b.h) return a.h < b.h;
        if (a.r != b.r) return a.r < b.r;
        return a.t < b.t;
    }
};

struct TripleHash {
    std::size_t operator()(const Triple& x) const {
        std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x.h)) << 40) ^
                          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x.r)) << 20) ^
                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(x.t));
        return static_cast<std::size_t>(splitmix64(k));
    }
};

/// Dense integer vocabularies for entity and relation names. Ids are assigned
/// in first-occurrence order: train split first, then valid, then test, so a
/// reload of the same files reproduces the same ids.
class Vocab {
public:
    std::int32_t add_entity(const std::string& name, bool from_train);
    std::int32_t add_relation(const std::string& name, bool from_train);

    std::int32_t entity_id(const std::string& name) const;
    std::int32_t relation_id(const std::string& name) const;

    std::int32_t num_entities() const { return static_cast<std::int32_t>(entity_names_.size()); }
    std::int32_t num_relations() const { return static_cast<std::int32_t>(relation_names_.size()); }

    const std::string& entity_name(std::int32_t id) const { return entity_names_.at(id); }
    const std::string& relation_name(std::int32_t id) const { return relation_names_.at(id); }

    // entities/relations observed only outside the train split
    bool entity_in_train(std::int32_t id) const { return entity_in_train_.at(id) != 0; }
    bool relation_in_train(std::int32_t id) const { return relation_in_train_.at(id) != 0; }
    std::int32_t num_unseen_entities() const;

private:
    std::vector<std::string> entity_names_, relation_names_;
    std::unordered_map<std::string, std::int32_t> entity_ids_, relation_ids_;
    std::vector<char> entity_in_train_, relation_in_train_;
};

struct TripleStore {
    Vocab vocab;
    std::vector<Triple> train, valid, test;
    // curated labeled negatives (triple-classification datasets)
    std::vector<Triple> valid_neg, test_neg;

    bool has_negatives() const { return !valid_neg.empty() || !test_neg.empty(); }
    std::int32_t num_entities() const { return vocab.num_entities(); }
    std::int32_t num_relations() const { return vocab.num_relations(); }
};

/// Per-relation sets of entities observed as head/tail in the train split.
struct TypePools {
    // sorted unique entity ids, indexed by relation id
    std::vector<std::vector<std::int32_t>> head_pool, tail_pool;

    const std::vector<std::int32_t>& heads(std::int32_t r) const { return head_pool.at(r); }
    const std::vector<std::int32_t>& tails(std::int32_t r) const { return tail_pool.at(r); }
};

/// Lookup of every known-true completion over train + valid + test, used for
/// the filtered ranking protocol.
class FilterIndex {
public:
    void insert(const Triple& t);

    // known true tails for (h,r); empty when the pair was never seen
    const std::vector<std::int32_t>& tails(std::int32_t h, std::int32_t r) const;
    // known true heads for (r,t)
    const std::vector<std::int32_t>& heads(std::int32_t r, std::int32_t t) const;
    bool contains(const Triple& t) const;
    void finalize();  // sorts the id lists

private:
    static std::uint64_t key(std::int32_t a, std::int32_t b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
    }
    std::unordered_map<std::uint64_t, std::vector<std::int32_t>> tails_, heads_;
};

/// Load tab-separated triple files into an integer-encoded store.
/// Each line is head<TAB>relation<TAB>tail; malformed lines raise data_error
/// with the file and line number. Duplicate triples within one split are
/// dropped with a warning on stderr.
TripleStore load_dataset(const std::string& train_path,
                         const std::string& valid_path,
                         const std::string& test_path,
                         const std::string& valid_neg_path = "",
                         const std::string& test_neg_path = "");

TypePools build_type_pools(const TripleStore& store);
FilterIndex build_filter_index(const TripleStore& store);

void save_vocab(const std::string& entity_path, const std::string& relation_path, const Vocab& v);

}  // namespace kglite

#endif  // KGLITE_DATASET_HPP
