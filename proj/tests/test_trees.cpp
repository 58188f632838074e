#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "hypising/treestates.hpp"
#include "support.hpp"

using namespace hypising;
using namespace hypising::tree;
using lat::LatticeGraph;

TEST_CASE("left_greedy_covering") {
    auto g = lat::build_cayley_tree(2, 6);
    auto cov = left_greedy_covering(g, 3);

    SECTION("the first chain is the leftmost descent from the root") {
        REQUIRE(!cov.chains.empty());
        const auto& c = cov.chains[0].vertices;
        REQUIRE(c.size() == 4);
        CHECK(c[0] == 0);
        CHECK(c[1] == g.children[0][0]);
        CHECK(c[2] == g.children[c[1]][0]);
        CHECK(c[3] == g.children[c[2]][0]);
    }
    SECTION("chains partition the vertex set") {
        std::vector<int> seen(g.vertex_count(), 0);
        std::size_t total = 0;
        for (const Chain& c : cov.chains) {
            total += c.vertices.size();
            for (int v : c.vertices) ++seen[v];
        }
        CHECK(total == static_cast<std::size_t>(g.vertex_count()));
        for (int v = 0; v < g.vertex_count(); ++v) CHECK(seen[v] == 1);
    }
    SECTION("chain starts appear in breadth-first order") {
        int prev = -1;
        for (const Chain& c : cov.chains) {
            CHECK(c.vertices[0] > prev);
            prev = c.vertices[0];
        }
    }
    SECTION("consecutive chain vertices are adjacent") {
        for (const Chain& c : cov.chains)
            for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i)
                CHECK(g.parent[c.vertices[i + 1]] == c.vertices[i]);
    }
    SECTION("deterministic") {
        auto cov2 = left_greedy_covering(g, 3);
        REQUIRE(cov.chains.size() == cov2.chains.size());
        for (std::size_t i = 0; i < cov.chains.size(); ++i)
            CHECK(cov.chains[i].vertices == cov2.chains[i].vertices);
    }
    SECTION("too-shallow trees are rejected") {
        auto tiny = lat::build_cayley_tree(2, 2);
        CHECK_THROWS_AS(left_greedy_covering(tiny, 3), DepthTooSmall);
    }
}

TEST_CASE("middle_dimers") {
    auto g = lat::build_cayley_tree(2, 7);
    SECTION("k = 3 takes the bond between x1 and x2") {
        auto cov = left_greedy_covering(g, 3);
        auto d = middle_dimers(cov);
        REQUIRE(!d.dimers.empty());
        const auto& c = cov.chains[0].vertices;
        std::pair<int, int> expect{std::min(c[1], c[2]), std::max(c[1], c[2])};
        CHECK(d.dimers[0] == expect);
    }
    SECTION("even k is rejected") {
        auto cov = left_greedy_covering(g, 2);
        CHECK_THROWS_AS(middle_dimers(cov), KEven);
    }
    SECTION("dimers are pairwise vertex-disjoint") {
        auto cov = left_greedy_covering(g, 5);
        auto d = middle_dimers(cov);
        std::set<int> touched;
        for (auto [u, v] : d.dimers) {
            CHECK(touched.insert(u).second);
            CHECK(touched.insert(v).second);
        }
    }
}

TEST_CASE("offset_dimers") {
    auto g = lat::build_cayley_tree(2, 9);
    auto cov = left_greedy_covering(g, 5);
    SECTION("l = n = m + 1 reproduces the middle dimers") {
        auto mid = middle_dimers(cov);
        auto off = offset_dimers(cov, 3, 3);
        CHECK(off.dimers == mid.dimers);
    }
    SECTION("l <= n is rejected") {
        CHECK_THROWS_AS(offset_dimers(cov, 2, 4), BadOffsets);
        CHECK_THROWS_AS(offset_dimers(cov, 5, 0), BadOffsets);
        CHECK_THROWS_AS(offset_dimers(cov, 4, 3), BadOffsets);  // l + n - 1 != k
    }
    SECTION("offsets are consistent from both chain ends") {
        auto off = offset_dimers(cov, 4, 2);
        auto mid = middle_dimers(cov);
        auto sigma = sigma_from_dimers(g, mid, +1);
        std::set<std::pair<int, int>> dset(off.dimers.begin(), off.dimers.end());
        for (const Chain& c : cov.chains) {
            if (!c.complete) continue;
            const auto& vs = c.vertices;
            int front = vs.front(), back = vs.back();
            CHECK(sigma[front] == -sigma[back]);
            // walk l bonds from the (+)-end: that bond must be the dimer
            std::vector<int> path = vs;
            if (sigma[front] < 0) std::reverse(path.begin(), path.end());
            std::pair<int, int> expect{std::min(path[3], path[4]), std::max(path[3], path[4])};
            CHECK(dset.count(expect) == 1);
        }
    }
}

TEST_CASE("sigma_from_dimers") {
    auto g = lat::build_cayley_tree(2, 7);
    SECTION("empty dimer set gives a constant configuration") {
        DimerSet d;
        d.tree = &g;
        auto s = sigma_from_dimers(g, d, -1);
        for (auto v : s) CHECK(v == -1);
    }
    SECTION("the edge rule holds on every bond") {
        auto cov = left_greedy_covering(g, 5);
        auto d = middle_dimers(cov);
        auto s = sigma_from_dimers(g, d, +1);
        std::set<std::pair<int, int>> dset(d.dimers.begin(), d.dimers.end());
        for (auto [u, v] : g.edges) {
            bool in_d = dset.count({std::min(u, v), std::max(u, v)}) == 1;
            CHECK(s[u] * s[v] == (in_d ? -1 : 1));
        }
    }
    SECTION("the two solutions differ by a global flip") {
        auto cov = left_greedy_covering(g, 5);
        auto d = middle_dimers(cov);
        auto sp = sigma_from_dimers(g, d, +1);
        auto sm = sigma_from_dimers(g, d, -1);
        for (int v = 0; v < g.vertex_count(); ++v) CHECK(sp[v] == -sm[v]);
    }
}

TEST_CASE("peierls_ratio exhaustive values") {
    auto g = lat::build_cayley_tree(2, 12);
    SECTION("k = 5 middle dimers stay at or below 1/3") {
        auto cov = left_greedy_covering(g, 5);
        auto d = middle_dimers(cov);
        auto rep = peierls_ratio(g, d, 14);
        CHECK(rep.sup_ratio == Catch::Approx(2.0 / 7.0).epsilon(1e-12));  // frozen exhaustive value
        CHECK(rep.sup_ratio <= 1.0 / 3.0 + 1e-12);
        // enclosures of at most m = 2 vertices cross no dimer
        CHECK(rep.table[0].max_ratio == 0.0);
        CHECK(rep.table[1].max_ratio == 0.0);
    }
    SECTION("k = 7 middle dimers stay at or below 1/4") {
        auto cov = left_greedy_covering(g, 7);
        auto d = middle_dimers(cov);
        auto rep = peierls_ratio(g, d, 14);
        CHECK(rep.sup_ratio == Catch::Approx(3.0 / 14.0).epsilon(1e-12));  // frozen
        CHECK(rep.sup_ratio <= 0.25 + 1e-12);
        for (int s = 0; s < 3; ++s) CHECK(rep.table[s].max_ratio == 0.0);
    }
    SECTION("1-chains admit an enclosure at ratio 1/2 or above") {
        auto cov = left_greedy_covering(g, 1);
        auto d = middle_dimers(cov);
        auto rep = peierls_ratio(g, d, 10);
        CHECK(rep.sup_ratio >= 0.5);
        CHECK(rep.sup_ratio == Catch::Approx(5.0 / 6.0).epsilon(1e-12));  // frozen
    }
    SECTION("offset dimers: the 1/(n+1) bound holds only for small enclosures") {
        auto cov = left_greedy_covering(g, 5);
        auto d = offset_dimers(cov, 4, 2);
        auto rep11 = peierls_ratio(g, d, 11);
        CHECK(rep11.sup_ratio == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
        auto rep14 = peierls_ratio(g, d, 14);
        // frozen exhaustive value: the near-start dimers of oppositely
        // oriented chains push the ratio past 1/3 at size 12 and beyond
        CHECK(rep14.sup_ratio == Catch::Approx(3.0 / 8.0).epsilon(1e-12));
    }
    SECTION("the T3 tree obeys the k = 5 bound comfortably") {
        auto g3 = lat::build_cayley_tree(3, 9);
        auto cov = left_greedy_covering(g3, 5);
        auto d = middle_dimers(cov);
        auto rep = peierls_ratio(g3, d, 10);
        CHECK(rep.sup_ratio <= 1.0 / 3.0 + 1e-12);
        CHECK(rep.sup_ratio == Catch::Approx(0.15).epsilon(1e-12));  // frozen
    }
    SECTION("boundary size formula matches a direct recount") {
        auto cov = left_greedy_covering(g, 5);
        auto d = middle_dimers(cov);
        testsupport::Rng rng(55);
        for (int trial = 0; trial < 50; ++trial) {
            // random connected interior set grown from the root
            std::set<int> S{0};
            std::vector<int> frontier{0};
            int target = 1 + static_cast<int>(rng.uniform(0, 12));
            while (static_cast<int>(S.size()) < target && !frontier.empty()) {
                int idx = static_cast<int>(rng.uniform(0, frontier.size() - 1e-9));
                int v = frontier[idx];
                bool grew = false;
                for (int w : g.adjacency[v])
                    if (!S.count(w) && g.degree(w) == 3) {
                        S.insert(w);
                        frontier.push_back(w);
                        grew = true;
                        break;
                    }
                if (!grew) frontier.erase(frontier.begin() + idx);
            }
            long boundary = 0;
            for (int v : S)
                for (int w : g.adjacency[v])
                    if (!S.count(w)) ++boundary;
            CHECK(boundary == static_cast<long>(S.size()) + 2);
        }
    }
}

TEST_CASE("path_ratio_witness") {
    auto g = lat::build_cayley_tree(2, 9);
    auto cov = left_greedy_covering(g, 5);
    auto d = middle_dimers(cov);
    SECTION("finds two or more consecutive dimers") {
        auto w = path_ratio_witness(g, d, 2);
        REQUIRE(w.has_value());
        CHECK(w->bonds.size() == 2);
        CHECK(w->bonds[0] != w->bonds[1]);
    }
    SECTION("length one is any dimer") {
        auto w = path_ratio_witness(g, d, 1);
        REQUIRE(w.has_value());
        CHECK(w->bonds.size() == 1);
    }
    SECTION("an empty dimer set has no witness") {
        DimerSet empty;
        empty.tree = &g;
        CHECK_FALSE(path_ratio_witness(g, empty, 1).has_value());
    }
}

TEST_CASE("tree_magnetization") {
    SECTION("all plus averages to one") {
        auto g = lat::build_cayley_tree(2, 5);
        std::vector<std::int8_t> s(g.vertex_count(), 1);
        CHECK(tree_magnetization(s, g, 4) == 1.0);
    }
    SECTION("frozen baselines: middle dimers decay, offset dimers stay biased") {
        auto g = lat::build_cayley_tree(2, 17);
        auto cov = left_greedy_covering(g, 5);
        auto mid = sigma_from_dimers(g, middle_dimers(cov), +1);
        auto off = sigma_from_dimers(g, offset_dimers(cov, 4, 2), +1);
        double prev = 1.0;
        for (int depth = 8; depth <= 12; ++depth) {
            double m_mid = tree_magnetization(mid, g, depth);
            double m_off = tree_magnetization(off, g, depth);
            INFO("depth " << depth);
            CHECK(std::abs(m_mid) < prev);  // shrinks with depth
            prev = std::abs(m_mid);
            CHECK(std::abs(m_off) > std::abs(m_mid) + 0.25);  // clear contrast
            CHECK(std::abs(m_off) > 0.4);
        }
        // deterministic regression values at the deepest measured ball
        CHECK(tree_magnetization(mid, g, 12) == Catch::Approx(0.0897).margin(5e-4));
        CHECK(tree_magnetization(off, g, 12) == Catch::Approx(0.4553).margin(5e-4));
    }
}

TEST_CASE("tree stability smoke run") {
    auto g = lat::build_cayley_tree(2, 6);
    auto cov = left_greedy_covering(g, 5);
    auto d = middle_dimers(cov);
    mc::SamplerConfig cfg;
    cfg.sweeps = 200;
    cfg.burn_in = 100;
    cfg.replicas = 2;
    cfg.seed = 17;
    cfg.measure_every = 10;
    auto rows = tree_stability_experiment(g, d, cfg, 3, {0.2, 3.0});
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].mean_spin_ur > rows[0].mean_spin_ur);
    CHECK(rows[1].mean_spin_ur > 0.8);
}
