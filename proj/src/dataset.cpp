#include "kglite/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <unordered_set>

namespace kglite {

std::int32_t Vocab::add_entity(const std::string& name, bool from_train) {
    auto it = entity_ids_.find(name);
    if (it != entity_ids_.end()) {
        if (from_train) entity_in_train_[it->second] = 1;
        return it->second;
    }
    const std::int32_t id = static_cast<std::int32_t>(entity_names_.size());
    entity_names_.push_back(name);
    entity_ids_.emplace(name, id);
    entity_in_train_.push_back(from_train ? 1 : 0);
    return id;
}

std::int32_t Vocab::add_relation(const std::string& name, bool from_train) {
    auto it = relation_ids_.find(name);
    if (it != relation_ids_.end()) {
        if (from_train) relation_in_train_[it->second] = 1;
        return it->second;
    }
    const std::int32_t id = static_cast<std::int32_t>(relation_names_.size());
    relation_names_.push_back(name);
    relation_ids_.emplace(name, id);
    relation_in_train_.push_back(from_train ? 1 : 0);
    return id;
}

std::int32_t Vocab::entity_id(const std::string& name) const {
    auto it = entity_ids_.find(name);
    if (it == entity_ids_.end()) throw std::out_of_range("unknown entity: " + name);
    return it->second;
}

std::int32_t Vocab::relation_id(const std::string& name) const {
    auto it = relation_ids_.find(name);
    if (it == relation_ids_.end()) throw std::out_of_range("unknown relation: " + name);
    return it->second;
}

std::int32_t Vocab::num_unseen_entities() const {
    std::int32_t n = 0;
    for (char c : entity_in_train_)
        if (!c) ++n;
    return n;
}

void FilterIndex::insert(const Triple& t) {
    tails_[key(t.h, t.r)].push_back(t.t);
    heads_[key(t.r, t.t)].push_back(t.h);
}

namespace {
const std::vector<std::int32_t> kEmptyIds;
}

const std::vector<std::int32_t>& FilterIndex::tails(std::int32_t h, std::int32_t r) const {
    auto it = tails_.find(key(h, r));
    return it == tails_.end() ? kEmptyIds : it->second;
}

const std::vector<std::int32_t>& FilterIndex::heads(std::int32_t r, std::int32_t t) const {
    auto it = heads_.find(key(r, t));
    return it == heads_.end() ? kEmptyIds : it->second;
}

bool FilterIndex::contains(const Triple& t) const {
    const auto& ts = tails(t.h, t.r);
    return std::binary_search(ts.begin(), ts.end(), t.t);
}

void FilterIndex::finalize() {
    for (auto& [k, v] : tails_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& [k, v] : heads_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

namespace {

// Parses one split file. Lines must have exactly two TAB separators.
std::vector<Triple> read_split(const std::string& path, const std::string& split_name,
                               Vocab& vocab, bool is_train) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + split_name + " file: " + path);

    std::vector<Triple> triples;
    std::unordered_set<Triple, TripleHash> seen;
    std::string line;
    std::size_t lineno = 0;
    std::size_t duplicates = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const std::size_t tab1 = line.find('\t');
        const std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        const std::size_t tab3 = tab2 == std::string::npos ? std::string::npos : line.find('\t', tab2 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos || tab3 != std::string::npos) {
            throw data_error(path + ":" + std::to_string(lineno) +
                             ": malformed line, expected head<TAB>relation<TAB>tail");
        }
        Triple t;
        t.h = vocab.add_entity(line.substr(0, tab1), is_train);
        t.r = vocab.add_relation(line.substr(tab1 + 1, tab2 - tab1 - 1), is_train);
        t.t = vocab.add_entity(line.substr(tab2 + 1), is_train);
        if (!seen.insert(t).second) {
            ++duplicates;
            continue;
        }
        triples.push_back(t);
    }
    if (duplicates > 0) {
        std::cerr << "warning: " << path << ": dropped " << duplicates
                  << " duplicate triple(s) in the " << split_name << " split\n";
    }
    return triples;
}

}  // namespace

TripleStore load_dataset(const std::string& train_path, const std::string& valid_path,
                         const std::string& test_path, const std::string& valid_neg_path,
                         const std::string& test_neg_path) {
    TripleStore store;
    store.train = read_split(train_path, "train", store.vocab, true);
    if (store.train.empty()) throw data_error("invalid dataset: empty train split in " + train_path);
    store.valid = read_split(valid_path, "valid", store.vocab, false);
    store.test = read_split(test_path, "test", store.vocab, false);
    if (!valid_neg_path.empty())
        store.valid_neg = read_split(valid_neg_path, "valid-neg", store.vocab, false);
    if (!test_neg_path.empty())
        store.test_neg = read_split(test_neg_path, "test-neg", store.vocab, false);
    return store;
}

TypePools build_type_pools(const TripleStore& store) {
    if (store.train.empty()) throw data_error("build_type_pools: empty train split");
    TypePools pools;
    const std::size_t nr = static_cast<std::size_t>(store.num_relations());
    pools.head_pool.resize(nr);
    pools.tail_pool.resize(nr);
    for (const Triple& t : store.train) {
        pools.head_pool[t.r].push_back(t.h);
        pools.tail_pool[t.r].push_back(t.t);
    }
    for (auto& p : pools.head_pool) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
    for (auto& p : pools.tail_pool) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
    return pools;
}

FilterIndex build_filter_index(const TripleStore& store) {
    FilterIndex index;
    for (const Triple& t : store.train) index.insert(t);
    for (const Triple& t : store.valid) index.insert(t);
    for (const Triple& t : store.test) index.insert(t);
    index.finalize();
    return index;
}

void save_vocab(const std::string& entity_path, const std::string& relation_path, const Vocab& v) {
    std::ofstream ents(entity_path);
    if (!ents) throw data_error("cannot write " + entity_path);
    for (std::int32_t i = 0; i < v.num_entities(); ++i)
        ents << v.entity_name(i) << '\t' << i << '\n';
    std::ofstream rels(relation_path);
    if (!rels) throw data_error("cannot write " + relation_path);
    for (std::int32_t i = 0; i < v.num_relations(); ++i)
        rels << v.relation_name(i) << '\t' << i << '\n';
}

}  // namespace kglite
