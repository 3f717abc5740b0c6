#include <doctest.h>

#include <cmath>
#include <numeric>

#include "splitree/empirical.hpp"
#include "splitree/reference.hpp"
#include "splitree/tree.hpp"

using namespace splitree;

TEST_CASE("split_cardinalities contract") {
    const auto bst = preset("bst");
    RngStream rng(1);

    // all multinomial mass on the first coordinate
    const auto c = split_cardinalities(3, {1.0, 0.0}, bst.params, rng);
    CHECK(c == std::vector<std::int64_t>({2, 0}));

    // conservation and the s1 floor, across models and sizes
    for (const auto* text : {"bst", "mary:3", "lattice_example", "quadtree:2"}) {
        const auto m = parse_model(text);
        std::vector<double> v;
        for (int rep = 0; rep < 2000; ++rep) {
            const std::int64_t n = m.params.s + 1 + static_cast<std::int64_t>(rng.uniform_index(5000));
            m.draw(rng, v);
            const auto counts = split_cardinalities(n, v, m.params, rng);
            CHECK(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) ==
                  n - m.params.s0);
            for (const auto k : counts) CHECK(k >= m.params.s1);
        }
    }

    CHECK_THROWS_AS(split_cardinalities(1, {0.5, 0.5}, bst.params, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_cardinalities(5, {0.5, 0.25, 0.25}, bst.params, rng), ConfigError);
}

TEST_CASE("grow_size_tree basics") {
    const auto bst = preset("bst");
    CHECK(grow_size_tree(0, bst, 1).empty());

    const auto single = grow_size_tree(1, bst, 1);
    CHECK(single.nodes.size() == 1);
    CHECK(single.nodes[0].count == 1);
    CHECK(single.nodes[0].num_children == 0);

    // with s0 = s = 1 every materialized node holds exactly one item, so the
    // node count equals n; induction oracle on small sizes first
    RngStream seeds(7);
    for (int rep = 0; rep < 200; ++rep) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(seeds.uniform_index(200));
        CHECK(static_cast<std::int64_t>(grow_size_tree(n, bst, seeds.next_u64()).nodes.size()) ==
              n);
    }
    CHECK(grow_size_tree(1000000, bst, 3).nodes.size() == 1000000);
}

TEST_CASE("grow_size_tree is deterministic in the seed") {
    const auto m = preset("lattice_example");
    const auto a = grow_size_tree(20000, m, 99, true);
    const auto b = grow_size_tree(20000, m, 99, true);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].count == b.nodes[i].count);
        CHECK(a.lengths[i] == b.lengths[i]);
    }
    const auto c = grow_size_tree(20000, m, 100);
    bool same = a.nodes.size() == c.nodes.size();
    if (same)
        for (std::size_t i = 0; i < a.nodes.size(); ++i)
            if (a.nodes[i].count != c.nodes[i].count) same = false;
    CHECK(!same);  // different seed, different tree
}

TEST_CASE("length annotation multiplies down the tree") {
    const auto bst = preset("bst");
    const auto t = grow_size_tree(50000, bst, 11, true);
    REQUIRE(t.annotated());
    CHECK(t.lengths[0] == 1.0);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& nd = t.nodes[i];
        if (nd.num_children != bst.params.b) continue;
        double sum = 0.0;
        for (std::int32_t c = 0; c < nd.num_children; ++c) sum += t.lengths[nd.first_child + c];
        // children lengths partition the parent length when all are present
        CHECK(sum == doctest::Approx(t.lengths[i]).epsilon(1e-9));
        for (std::int32_t c = 0; c < nd.num_children; ++c)
            CHECK(t.lengths[nd.first_child + c] <= t.lengths[i] + 1e-15);
    }
}

TEST_CASE("path_length_items") {
    SizeTree t;
    CHECK(path_length_items(t) == 0);
    // root(3) -> child(2) -> grandchild(1): Psi = 2 + 1
    t.nodes = {{3, 1, 1}, {2, 2, 1}, {1, -1, 0}};
    CHECK(path_length_items(t) == 3);

    t.nodes = {{1, -1, 0}};
    CHECK(path_length_items(t) == 0);
}

TEST_CASE("path_length_nodes equals sum of node depths") {
    SizeTree t;
    t.nodes = {{3, 1, 2}, {1, -1, 0}, {1, -1, 0}};  // root with two leaf children
    CHECK(path_length_nodes(t) == 2);

    // bst trees: every node holds one item, so Upsilon = Psi exactly
    const auto bst = preset("bst");
    RngStream seeds(21);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto tree = grow_size_tree(1 + seeds.uniform_index(400), bst, seeds.next_u64());
        CHECK(path_length_nodes(tree) == path_length_items(tree));
    }
}

TEST_CASE("bst mean path length matches the DP oracle at n=3") {
    const auto bst = preset("bst");
    const double want = reference::bst_mean_psi_exact(3);  // 8/3
    CHECK(want == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    RngStream seeds(2);
    const int reps = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double psi =
            static_cast<double>(path_length_items(grow_size_tree(3, bst, seeds.next_u64())));
        sum += psi;
        sumsq += psi * psi;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    CHECK(std::fabs(mean - want) < 4.0 * se);
}

TEST_CASE("build_incremental small cases") {
    const auto bst = preset("bst");
    const auto one = build_incremental(1, bst, 5);
    CHECK(one.size() == 1);
    CHECK(one.depth_of_item(0) == 0);
    CHECK(one.sum_item_depths() == 0);

    // n=2: root full, exactly one item ends at depth 1
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto t = build_incremental(2, bst, seed);
        CHECK(t.sum_item_depths() == 1);
    }

    // symmetric binary trie with n=2: E[Psi] = 4 (two items cohabit per level
    // with probability 1/2, so Psi = 2 T with T geometric(1/2))
    const auto trie = preset("trie", {0.5, 0.5});
    RngStream seeds(8);
    const int reps = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double psi = static_cast<double>(build_incremental(2, trie, seeds.next_u64())
                                                   .sum_item_depths());
        sum += psi;
        sumsq += psi * psi;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    CHECK(std::fabs(mean - 4.0) < 4.0 * se);
}

TEST_CASE("item tree structural invariants") {
    for (const auto* text : {"bst", "trie:0.5,0.5", "lattice_example", "mary:3"}) {
        const auto m = parse_model(text);
        const auto t = build_incremental(700, m, 31);
        std::int64_t total = 0;
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            const auto& nd = t.nodes[i];
            total += static_cast<std::int64_t>(nd.items.size());
            bool leaf = true;
            for (auto c : nd.children)
                if (c >= 0) leaf = false;
            if (leaf) {
                CHECK(nd.items.size() >= 1);
                CHECK(static_cast<int>(nd.items.size()) <= m.params.s);
            } else {
                CHECK(static_cast<int>(nd.items.size()) == m.params.s0);
            }
        }
        CHECK(total == 700);
        // Psi identity: item depths vs subtree cardinalities, computed
        // independently
        CHECK(t.sum_item_depths() == t.path_length_items());
    }
}

TEST_CASE("non-terminating redistribution is reported") {
    ModelSpec degenerate;
    degenerate.name = "degenerate";
    degenerate.params = {2, 0, 0, 1};
    degenerate.sampler = [](RngStream&, std::vector<double>& out) { out.assign({1.0, 0.0}); };
    CHECK_THROWS_AS(build_incremental(2, degenerate, 1, 2000), NonTerminatingRedistribution);
    CHECK_THROWS_AS(sample_last_depth(2, degenerate, 1, 2000), NonTerminatingRedistribution);
}

TEST_CASE("sample_last_depth agrees with build_incremental in law") {
    RngStream seeds(17);
    for (const auto* text : {"bst", "trie:0.5,0.5", "lattice_example", "mary:3"}) {
        const auto m = parse_model(text);
        const std::int64_t n = 150;
        const int reps = 4000;
        std::vector<double> a(reps), b(reps);
        for (int i = 0; i < reps; ++i) {
            a[i] = static_cast<double>(sample_last_depth(n, m, seeds.next_u64()));
            const auto t = build_incremental(n, m, seeds.next_u64());
            b[i] = static_cast<double>(t.depth_of_item(n - 1));
        }
        const double ks = ks_two_sample(a, b);
        CHECK(ks < ks_two_sample_critical(0.005, reps, reps));
    }
}

TEST_CASE("quantile coupling makes Psi monotone in n") {
    RngStream seeds(13);
    for (const auto* text : {"bst", "lattice_example"}) {
        const auto m = parse_model(text);
        for (int rep = 0; rep < 150; ++rep) {
            const std::uint64_t seed = seeds.next_u64();
            const std::int64_t n = 50 + static_cast<std::int64_t>(seeds.uniform_index(2000));
            const std::int64_t k = 1 + static_cast<std::int64_t>(seeds.uniform_index(100));
            const auto small = path_length_items(grow_size_tree(n, m, seed));
            const auto big = path_length_items(grow_size_tree(n + k, m, seed));
            CHECK(big >= small);
        }
    }
}

TEST_CASE("construction equivalence at trivial sizes") {
    const auto bst = preset("bst");
    const auto s1 = construction_equivalence_sample(1, bst, 50, 3);
    for (double x : s1.recursive) CHECK(x == 0.0);
    for (double x : s1.incremental) CHECK(x == 0.0);
    const auto s2 = construction_equivalence_sample(2, bst, 50, 3);
    for (double x : s2.recursive) CHECK(x == 1.0);
    for (double x : s2.incremental) CHECK(x == 1.0);
}

TEST_CASE("deep trees build without recursion limits") {
    // 10^7 items in one bst tree; explicit stack, so this is purely a memory
    // and runtime exercise
    const auto t = grow_size_tree(10000000, preset("bst"), 12345);
    CHECK(t.nodes.size() == 10000000);
}
