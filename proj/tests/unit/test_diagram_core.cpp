#include "fdc/algebra.hpp"
#include "fdc/diagram.hpp"
#include "fdc/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace fdc;

TEST_CASE("automorphism counts of small shapes") {
    CHECK(canonicalize(shapes::edge())->aut() == 1);
    CHECK(canonicalize(shapes::one_two_tree())->aut() == 2);
    CHECK(canonicalize(shapes::extended_star(3))->aut() == 6);
    CHECK(canonicalize(shapes::cycle(4))->aut() == 2);
    CHECK(canonicalize(shapes::star(3))->aut() == 6);
}

TEST_CASE("isolated set") {
    CHECK(isolated_set(shapes::double_edge()) == std::vector<int>{1});
    CHECK(isolated_set(shapes::path(4)).empty());
    CHECK(isolated_set(shapes::two_labeled_edge()).empty());
}

TEST_CASE("malformed diagrams are rejected") {
    Diagram d;
    d.vertex_count = 3;
    d.root = 0;
    d.add_edge(0, 1);
    CHECK_THROWS_AS(canonicalize(d), StructuralError);
}

TEST_CASE("classification examples") {
    CHECK(classify(1, *canonicalize(shapes::cycle(4))) == Order::Negligible);
    for (int t = 0; t <= 5; ++t) CHECK(classify(1, *canonicalize(shapes::path(t))) == Order::Order1);
    // residual from removing a hanging double edge
    CHECK(classify(Coefficient::power(2, 1), *canonicalize(shapes::singleton())) == Order::Negligible);
    CHECK(classify(1, *canonicalize(shapes::two_labeled_edge())) == Order::Negligible);
    CHECK(classify(1, *canonicalize(shapes::double_edge())) == Order::Order1);
    CHECK(classify(Coefficient::power(-1), *canonicalize(shapes::edge())) == Order::SuperOrder1);
}

TEST_CASE("tree structure") {
    auto s = canonicalize(shapes::singleton());
    REQUIRE(s->tree());
    CHECK(s->tree()->branches.empty());
    CHECK(s->tree()->depth == 0);

    auto t = canonicalize(shapes::one_two_tree());
    REQUIRE(t->tree());
    REQUIRE(t->tree()->branches.size() == 1);
    CHECK(t->tree()->branches[0].second == 1);
    CHECK(t->tree()->branches[0].first->key() == t->key());
    CHECK(t->tree()->depth == 2);

    auto st = canonicalize(shapes::star(2));
    REQUIRE(st->tree());
    REQUIRE(st->tree()->branches.size() == 1);
    CHECK(st->tree()->branches[0].first->key() == canonicalize(shapes::edge())->key());
    CHECK(st->tree()->branches[0].second == 2);
    CHECK(st->tree()->depth == 1);

    CHECK_FALSE(canonicalize(shapes::double_edge())->tree());
    CHECK_FALSE(canonicalize(shapes::cycle(3))->tree());
}

TEST_CASE("canonical keys are invariant under relabelling") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 600; ++trial) {
        int v = 1 + int(rng() % 6);
        bool scalar = trial % 3 == 0 && v > 1;
        Diagram d = testing::random_diagram(rng, v, int(rng() % 5), scalar);
        Diagram p = testing::permuted(d, rng);
        CHECK(canonicalize(d)->key() == canonicalize(p)->key());
    }
}

TEST_CASE("canonical keys separate non-isomorphic diagrams") {
    std::mt19937_64 rng(11);
    std::vector<Diagram> pool;
    for (int trial = 0; trial < 200; ++trial) {
        int v = 2 + int(rng() % 4);
        pool.push_back(testing::random_diagram(rng, v, int(rng() % 4), trial % 4 == 0));
    }
    for (size_t i = 0; i < pool.size(); ++i)
        for (size_t j = i + 1; j < pool.size(); j += 7) {
            bool same_key = canonicalize(pool[i])->key() == canonicalize(pool[j])->key();
            CHECK(same_key == brute_force_isomorphic(pool[i], pool[j]));
        }
}

TEST_CASE("canonical aut matches brute force up to seven vertices") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 400; ++trial) {
        int v = 1 + int(rng() % 7);
        bool scalar = trial % 3 == 0 && v > 1;
        Diagram d = testing::random_diagram(rng, v, int(rng() % 6), scalar, trial % 2 == 0);
        CHECK(canonicalize(d)->aut() == brute_force_aut(d));
    }
    // symmetric shapes where the search tree branches a lot
    CHECK(canonicalize(shapes::cycle(6))->aut() == brute_force_aut(shapes::cycle(6)));
    Diagram k4;
    k4.vertex_count = 4;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) k4.add_edge(a, b);
    CHECK(canonicalize(k4)->aut() == 24);
    Diagram two_triangles;
    two_triangles.vertex_count = 7;
    two_triangles.root = 0;
    two_triangles.add_edge(0, 1).add_edge(1, 2).add_edge(2, 3).add_edge(3, 1);
    two_triangles.add_edge(0, 4).add_edge(4, 5).add_edge(5, 6).add_edge(6, 4);
    CHECK(canonicalize(two_triangles)->aut() == brute_force_aut(two_triangles));
}

TEST_CASE("tree aut factorizes over branches") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        int v = 1 + int(rng() % 8);
        Diagram d = testing::random_diagram(rng, v, 0, false, true);
        auto c = canonicalize(d);
        REQUIRE(c->tree());
        std::uint64_t prod = 1;
        for (const auto& [sigma, k] : c->tree()->branches) {
            for (int i = 1; i <= k; ++i) prod *= i;
            for (int i = 0; i < k; ++i) prod *= sigma->aut();
        }
        CHECK(prod == c->aut());
        CHECK(canonicalize(join_branches(c->tree()->branches))->key() == c->key());
    }
}

TEST_CASE("arithmetic and structural classification agree") {
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        int v = 1 + int(rng() % 6);
        Diagram d = testing::random_diagram(rng, v, int(rng() % 4));
        // also sprinkle double edges onto tree edges
        if (trial % 2 == 0)
            for (auto& e : d.edges)
                if (rng() % 3 == 0) e.multiplicity = 2;
        auto c = canonicalize(d);
        bool arithmetic = classify(1, *c) == Order::Order1;
        CHECK(classify(1, *c) != Order::SuperOrder1);
        CHECK(arithmetic == structurally_nonnegligible(*c));
        ++checked;
    }
    CHECK(checked == 1500);
}
