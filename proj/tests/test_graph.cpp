#include <doctest.h>

#include "causalqa/datagen.hpp"
#include "causalqa/graph.hpp"

using namespace causalqa;

namespace {

int adjacent(const GraphResult& g, std::size_t i, std::size_t j) { return g.adjacency[i][j] || g.adjacency[j][i]; }

bool directed(const GraphResult& g, std::size_t from, std::size_t to) {
    return g.adjacency[from][to] && !g.adjacency[to][from];
}

SemParams sem(int nodes, std::initializer_list<std::tuple<int, int, double>> edges) {
    SemParams p;
    p.weights = Eigen::MatrixXd::Zero(nodes, nodes);
    for (auto [i, j, w] : edges) p.weights(i, j) = w;
    p.noise_sd.assign(static_cast<std::size_t>(nodes), 1.0);
    return p;
}

}  // namespace

TEST_SUITE("graph") {
    TEST_CASE("Fisher z on an analytic chain") {
        // x1 -> x2 -> x3: x1 and x3 are independent given x2.
        Eigen::MatrixXd corr(3, 3);
        const double r = 0.6;
        corr << 1, r, r * r, r, 1, r, r * r, r, 1;
        CHECK(fisher_z_test(corr, 1000, 0, 2, {1}).p_value > 0.5);
        CHECK(fisher_z_test(corr, 1000, 0, 2, {}).p_value < 1e-6);
    }

    TEST_CASE("independent columns give an empty graph") {
        Rng rng(1);
        const TabularDataset d = simulate_sem(sem(4, {}), 3000, rng);
        CHECK(learn_graph(d, {"all_variables"}).pair_count() == 0);
    }

    TEST_CASE("collider is oriented into the middle node") {
        Rng rng(2);
        const TabularDataset d = simulate_sem(sem(3, {{0, 2, 1.5}, {1, 2, 1.5}}), 5000, rng);
        const GraphResult g = learn_graph(d, {"all_variables"});
        CHECK(directed(g, 0, 2));
        CHECK(directed(g, 1, 2));
        CHECK_FALSE(adjacent(g, 0, 1));
    }

    TEST_CASE("chain skeleton") {
        Rng rng(3);
        const TabularDataset d = simulate_sem(sem(3, {{0, 1, 1.5}, {1, 2, 1.5}}), 5000, rng);
        const GraphResult g = learn_graph(d, {"all_variables"});
        CHECK(adjacent(g, 0, 1));
        CHECK(adjacent(g, 1, 2));
        CHECK_FALSE(adjacent(g, 0, 2));
    }

    TEST_CASE("edges are ranked by strength") {
        Rng rng(4);
        const TabularDataset d = simulate_sem(sem(4, {{0, 1, 2.0}, {1, 2, 0.6}, {2, 3, 1.2}}), 5000, rng);
        const auto edges = learn_graph(d, {"all_variables"}).edges();
        for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i - 1].strength >= edges[i].strength);
    }

    TEST_CASE("node subsets and preconditions") {
        Rng rng(5);
        const TabularDataset d = simulate_sem(sem(4, {{0, 1, 1.5}}), 500, rng);
        CHECK(learn_graph(d, {"x1", "x2"}).nodes == std::vector<std::string>{"x1", "x2"});
        CHECK_THROWS_AS(learn_graph(d, {"x1"}), Error);
        TabularDataset tiny;
        tiny.add_numeric("p", {1, 2, 3, 4});
        tiny.add_numeric("q", {2, 1, 4, 3});
        tiny.add_numeric("r", {1, 1, 2, 2});
        CHECK_THROWS_AS(learn_graph(tiny, {"all_variables"}), Error);
    }
}
