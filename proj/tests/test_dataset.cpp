#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "kglite/dataset.hpp"

using namespace kglite;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("kglite_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

const std::string kToyDir = std::string(KGLITE_DATA_DIR) + "/toy";

TripleStore load_toy() {
    return load_dataset(kToyDir + "/train.txt", kToyDir + "/valid.txt", kToyDir + "/test.txt",
                        kToyDir + "/valid_neg.txt", kToyDir + "/test_neg.txt");
}

}  // namespace

TEST_CASE("single-line file as all three splits") {
    TempDir tmp;
    const std::string p = tmp.file("t.txt", "a\tr\tb\n");
    const TripleStore store = load_dataset(p, p, p);
    CHECK(store.num_entities() == 2);
    CHECK(store.num_relations() == 1);
    CHECK(store.train.size() == 1);
    CHECK(store.valid.size() == 1);
    CHECK(store.test.size() == 1);
}

TEST_CASE("malformed line reports the line number") {
    TempDir tmp;
    const std::string good = tmp.file("good.txt", "a\tr\tb\n");
    const std::string bad = tmp.file("bad.txt", "a\tr\tb\nc d e\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad, good, good), doctest::Contains(":2"), data_error);

    const std::string extra = tmp.file("extra.txt", "a\tr\tb\tc\n");
    CHECK_THROWS_AS(load_dataset(extra, good, good), data_error);
}

TEST_CASE("empty train split is an invalid dataset") {
    TempDir tmp;
    const std::string empty = tmp.file("empty.txt", "");
    const std::string good = tmp.file("good.txt", "a\tr\tb\n");
    CHECK_THROWS_AS(load_dataset(empty, good, good), data_error);
}

TEST_CASE("duplicates within a split are dropped") {
    TempDir tmp;
    const std::string dup = tmp.file("dup.txt", "a\tr\tb\na\tr\tb\nc\tr\td\n");
    const std::string good = tmp.file("good.txt", "a\tr\tb\n");
    const TripleStore store = load_dataset(dup, good, good);
    CHECK(store.train.size() == 2);
}

TEST_CASE("id assignment order and unseen flags") {
    TempDir tmp;
    const std::string train = tmp.file("train.txt", "a\tr\tb\nb\tr\tc\n");
    const std::string valid = tmp.file("valid.txt", "a\tr\tnew_v\n");
    const std::string test = tmp.file("test.txt", "new_t\tr2\tb\n");
    const TripleStore store = load_dataset(train, valid, test);

    CHECK(store.vocab.entity_id("a") == 0);
    CHECK(store.vocab.entity_id("b") == 1);
    CHECK(store.vocab.entity_id("c") == 2);
    CHECK(store.vocab.entity_id("new_v") == 3);
    CHECK(store.vocab.entity_id("new_t") == 4);
    CHECK(store.vocab.entity_in_train(store.vocab.entity_id("a")));
    CHECK_FALSE(store.vocab.entity_in_train(store.vocab.entity_id("new_v")));
    CHECK_FALSE(store.vocab.relation_in_train(store.vocab.relation_id("r2")));
    CHECK(store.vocab.num_unseen_entities() == 2);
    CHECK_THROWS_AS(store.vocab.entity_id("nope"), std::out_of_range);
}

TEST_CASE("toy dataset loads with expected shape") {
    const TripleStore store = load_toy();
    CHECK(store.num_entities() == 30);
    CHECK(store.num_relations() == 4);
    CHECK(store.train.size() == 42);
    CHECK(store.valid.size() == 8);
    CHECK(store.test.size() == 10);
    CHECK(store.valid_neg.size() == 8);
    CHECK(store.test_neg.size() == 10);
    CHECK(store.has_negatives());
}

TEST_CASE("reloading yields identical ids and splits") {
    const TripleStore a = load_toy();
    const TripleStore b = load_toy();
    CHECK(a.train == b.train);
    CHECK(a.valid == b.valid);
    CHECK(a.test == b.test);
    for (std::int32_t i = 0; i < a.num_entities(); ++i)
        CHECK(a.vocab.entity_name(i) == b.vocab.entity_name(i));
}

TEST_CASE("type pools from hand-enumerated graphs") {
    TempDir tmp;
    const std::string good = tmp.file("good.txt", "a\tr\tb\n");

    SUBCASE("single triple") {
        const TripleStore store = load_dataset(good, good, good);
        const TypePools pools = build_type_pools(store);
        const auto a = store.vocab.entity_id("a");
        const auto b = store.vocab.entity_id("b");
        const auto r = store.vocab.relation_id("r");
        CHECK(pools.heads(r) == std::vector<std::int32_t>{a});
        CHECK(pools.tails(r) == std::vector<std::int32_t>{b});
    }

    SUBCASE("two heads share a tail") {
        const std::string train = tmp.file("t2.txt", "a\tr\tb\nc\tr\tb\n");
        const TripleStore store = load_dataset(train, good, good);
        const TypePools pools = build_type_pools(store);
        const auto r = store.vocab.relation_id("r");
        CHECK(pools.heads(r).size() == 2);
        CHECK(pools.tails(r) == std::vector<std::int32_t>{store.vocab.entity_id("b")});
    }

    SUBCASE("two relations stay independent") {
        const std::string train = tmp.file("t3.txt", "a\tr1\tb\nc\tr2\td\n");
        const TripleStore store = load_dataset(train, good, good);
        const TypePools pools = build_type_pools(store);
        const auto r1 = store.vocab.relation_id("r1");
        const auto r2 = store.vocab.relation_id("r2");
        CHECK(pools.heads(r1) == std::vector<std::int32_t>{store.vocab.entity_id("a")});
        CHECK(pools.heads(r2) == std::vector<std::int32_t>{store.vocab.entity_id("c")});
        CHECK(pools.tails(r1) == std::vector<std::int32_t>{store.vocab.entity_id("b")});
        CHECK(pools.tails(r2) == std::vector<std::int32_t>{store.vocab.entity_id("d")});
    }
}

TEST_CASE("type pools cover every train triple") {
    const TripleStore store = load_toy();
    const TypePools pools = build_type_pools(store);
    for (const Triple& t : store.train) {
        const auto& hp = pools.heads(t.r);
        const auto& tp = pools.tails(t.r);
        CHECK(std::binary_search(hp.begin(), hp.end(), t.h));
        CHECK(std::binary_search(tp.begin(), tp.end(), t.t));
    }
}

TEST_CASE("filter index lookups") {
    TempDir tmp;
    SUBCASE("single triple, both directions") {
        const std::string p = tmp.file("t.txt", "a\tr\tb\n");
        const TripleStore store = load_dataset(p, p, p);
        const FilterIndex index = build_filter_index(store);
        const auto a = store.vocab.entity_id("a");
        const auto b = store.vocab.entity_id("b");
        const auto r = store.vocab.relation_id("r");
        CHECK(index.tails(a, r) == std::vector<std::int32_t>{b});
        CHECK(index.heads(r, b) == std::vector<std::int32_t>{a});
        CHECK(index.contains({a, r, b}));
    }

    SUBCASE("train and test merge; absent key is empty") {
        const std::string train = tmp.file("train.txt", "a\tr\tb\n");
        const std::string test = tmp.file("test.txt", "a\tr\tc\n");
        const TripleStore store = load_dataset(train, train, test);
        const FilterIndex index = build_filter_index(store);
        const auto a = store.vocab.entity_id("a");
        const auto r = store.vocab.relation_id("r");
        CHECK(index.tails(a, r).size() == 2);
        CHECK(index.tails(store.vocab.entity_id("c"), r).empty());
    }
}

TEST_CASE("every test triple is present in the filter index") {
    const TripleStore store = load_toy();
    const FilterIndex index = build_filter_index(store);
    for (const Triple& t : store.test) {
        const auto& tails = index.tails(t.h, t.r);
        CHECK(std::binary_search(tails.begin(), tails.end(), t.t));
        const auto& heads = index.heads(t.r, t.t);
        CHECK(std::binary_search(heads.begin(), heads.end(), t.h));
    }
}

TEST_CASE("vocab persists as name<TAB>id lines") {
    TempDir tmp;
    const TripleStore store = load_toy();
    const std::string ents = (tmp.path / "e.vocab").string();
    const std::string rels = (tmp.path / "r.vocab").string();
    save_vocab(ents, rels, store.vocab);

    std::ifstream in(ents);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), '\t') == 1);
        ++rows;
    }
    CHECK(rows == store.num_entities());
}
