#include <doctest.h>

#include <algorithm>
#include <set>

#include "kglite/sampling.hpp"
#include "test_util.hpp"

using namespace kglite;

namespace {

TypePools pools_of(const TripleStore& store) { return build_type_pools(store); }

}  // namespace

TEST_CASE("ontology negatives stay inside the type pools") {
    const TripleStore store = kglite::testutil::load_toy();
    const TypePools pools = pools_of(store);
    Rng rng(5);

    // 10^4 draws over all train triples: every corruption must be a pool
    // member on the corrupted side (toy pools are all non-degenerate)
    std::size_t draws = 0;
    while (draws < 10000) {
        for (const Triple& pos : store.train) {
            const auto negs = ontology_negatives(pos, pools, 2, store.num_entities(), rng);
            for (const Triple& neg : negs) {
                ++draws;
                CHECK(neg.r == pos.r);
                CHECK_FALSE(neg == pos);
                if (neg.h != pos.h) {
                    const auto& pool = pools.heads(pos.r);
                    CHECK(std::binary_search(pool.begin(), pool.end(), neg.h));
                    CHECK(neg.t == pos.t);
                } else {
                    const auto& pool = pools.tails(pos.r);
                    CHECK(std::binary_search(pool.begin(), pool.end(), neg.t));
                }
            }
        }
    }
}

TEST_CASE("ontology corruption with a two-member pool is forced") {
    kglite::testutil::TempDir tmp;
    const std::string train = tmp.file("train.txt", "x\tr\tA\ny\tr\tB\n");
    const TripleStore store = load_dataset(train, train, train);
    const TypePools pools = pools_of(store);
    const auto A = store.vocab.entity_id("A");
    const auto B = store.vocab.entity_id("B");
    const auto x = store.vocab.entity_id("x");
    const auto r = store.vocab.relation_id("r");

    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto negs = ontology_negatives({x, r, A}, pools, 1, store.num_entities(), rng);
        if (negs[0].t != A) CHECK(negs[0].t == B);  // tail pool is exactly {A, B}
    }
}

TEST_CASE("degenerate pool falls back to uniform corruption") {
    kglite::testutil::TempDir tmp;
    // tail pool of r is {b} only; corrupting the tail of (a, r, b) must fall
    // back to the full entity set
    const std::string train = tmp.file("train.txt", "a\tr\tb\nc\tr2\td\ne\tr2\tf\n");
    const TripleStore store = load_dataset(train, train, train);
    const TypePools pools = pools_of(store);
    const auto a = store.vocab.entity_id("a");
    const auto b = store.vocab.entity_id("b");
    const auto r = store.vocab.relation_id("r");

    Rng rng(3);
    std::set<std::int32_t> seen_tails;
    for (int i = 0; i < 400; ++i) {
        const auto negs = ontology_negatives({a, r, b}, pools, 1, store.num_entities(), rng);
        CHECK_FALSE(negs[0] == Triple{a, r, b});
        if (negs[0].t != b) seen_tails.insert(negs[0].t);
    }
    // fallback reaches entities far outside the one-element pool
    CHECK(seen_tails.size() > 2);
}

TEST_CASE("fixed seed reproduces ontology negatives") {
    const TripleStore store = kglite::testutil::load_toy();
    const TypePools pools = pools_of(store);
    Rng a(11), b(11);
    for (const Triple& pos : store.train) {
        CHECK(ontology_negatives(pos, pools, 3, store.num_entities(), a) ==
              ontology_negatives(pos, pools, 3, store.num_entities(), b));
    }
}

TEST_CASE("embedding negatives select the top scorers") {
    const TripleStore store = kglite::testutil::load_toy();
    const auto model = init_model(Family::TransE, 8, store.num_entities(), store.num_relations(),
                                  4.0, 2);

    auto redraw_pool = [&](const Triple& pos, int m, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<Triple> pool;
        for (int i = 0; i < m; ++i) {
            Triple neg = pos;
            const bool head = rng.coin();
            const std::int32_t truth = head ? pos.h : pos.t;
            std::int32_t cand;
            do {
                cand = static_cast<std::int32_t>(rng.uniform_int(store.num_entities()));
            } while (cand == truth);
            (head ? neg.h : neg.t) = cand;
            pool.push_back(neg);
        }
        return pool;
    };

    SUBCASE("m = n_neg returns the drawn pool itself") {
        const Triple pos = store.train[0];
        Rng draw(7);
        const auto negs = embedding_negatives(pos, model, 4, 4, draw);
        auto pool = redraw_pool(pos, 4, 7);
        REQUIRE(negs.size() == 4);
        std::vector<Triple> got = negs;
        std::sort(got.begin(), got.end());
        std::sort(pool.begin(), pool.end());
        CHECK(got == pool);
    }

    SUBCASE("top-2 of the pool matches an exhaustive sort") {
        const Triple pos = store.train[3];
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            Rng draw(seed);
            const auto negs = embedding_negatives(pos, model, 16, 2, draw);
            REQUIRE(negs.size() == 2);
            std::vector<double> scores;
            for (const auto& n : redraw_pool(pos, 16, seed))
                scores.push_back(model.loss_score(n.h, n.r, n.t));
            std::sort(scores.begin(), scores.end(), std::greater<>());
            CHECK(model.loss_score(negs[0].h, negs[0].r, negs[0].t) == scores[0]);
            CHECK(model.loss_score(negs[1].h, negs[1].r, negs[1].t) == scores[1]);
        }
    }

    SUBCASE("the worst selected score is at least the pool median") {
        const Triple pos = store.train[5];
        for (std::uint64_t seed = 50; seed < 80; ++seed) {
            Rng draw(seed);
            const auto negs = embedding_negatives(pos, model, 32, 8, draw);
            double min_selected = 1e300;
            for (const auto& n : negs)
                min_selected = std::min(min_selected, model.loss_score(n.h, n.r, n.t));
            std::vector<double> pool_scores;
            for (const auto& n : redraw_pool(pos, 32, seed))
                pool_scores.push_back(model.loss_score(n.h, n.r, n.t));
            std::nth_element(pool_scores.begin(), pool_scores.begin() + 16, pool_scores.end());
            CHECK(min_selected >= pool_scores[16]);
        }
    }

    SUBCASE("pool size below n_neg is rejected") {
        Rng rng(1);
        CHECK_THROWS_AS(embedding_negatives(store.train[0], model, 2, 4, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("embedding negatives beat uniform ones on average") {
    const TripleStore store = kglite::testutil::load_toy();
    // train briefly so scores carry signal
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 16;
    cfg.seed = 3;
    const auto model = train(store, Family::TransE, 8, cfg).model;

    Rng rng(17);
    double hard = 0.0, uniform = 0.0;
    int n = 0;
    for (int rep = 0; rep < 3; ++rep) {
        for (const Triple& pos : store.train) {
            const auto negs = embedding_negatives(pos, model, 32, 2, rng);
            const auto unif = sample_negatives_uniform(pos, 2, store.num_entities(), rng);
            for (int i = 0; i < 2; ++i) {
                hard += model.loss_score(negs[i].h, negs[i].r, negs[i].t);
                uniform += model.loss_score(unif[i].h, unif[i].r, unif[i].t);
                ++n;
            }
        }
    }
    CHECK(hard / n > uniform / n);
}

TEST_CASE("known true triples can be excluded from the pool") {
    const TripleStore store = kglite::testutil::load_toy();
    const FilterIndex filter = build_filter_index(store);
    const auto model = init_model(Family::DistMult, 4, store.num_entities(),
                                  store.num_relations(), 0.0, 4);
    Rng rng(21);
    for (const Triple& pos : store.train) {
        const auto negs = embedding_negatives(pos, model, 16, 4, rng, &filter);
        for (const Triple& n : negs) CHECK_FALSE(filter.contains(n));
    }
}

TEST_CASE("draw_negatives dispatches on the scheme") {
    const TripleStore store = kglite::testutil::load_toy();
    const TypePools pools = pools_of(store);
    const FilterIndex filter = build_filter_index(store);
    const auto model = init_model(Family::TransE, 4, store.num_entities(), store.num_relations(),
                                  4.0, 5);
    NegSpec spec;
    spec.n_neg = 3;
    for (const char* scheme : {"random", "ontology", "embedding"}) {
        spec.scheme = neg_scheme_from_string(scheme);
        Rng rng(2);
        const auto negs = draw_negatives(spec, store.train[0], pools, model, &filter, rng);
        CHECK(negs.size() == 3);
        for (const Triple& n : negs) CHECK_FALSE(n == store.train[0]);
    }
    CHECK_THROWS_AS(neg_scheme_from_string("bogus"), data_error);
}
