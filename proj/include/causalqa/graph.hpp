#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "causalqa/dataset.hpp"
#include "causalqa/intent.hpp"

namespace causalqa {

inline constexpr double kDefaultAlpha = 0.01;

struct CiTest {
    double partial_correlation = 0.0;
    double z = 0.0;        // sqrt(n - |S| - 3) * atanh(r)
    double p_value = 1.0;  // two-sided
};

// Fisher-z test of X_i independent of X_j given X_S, from a correlation matrix
// estimated on n samples.
CiTest fisher_z_test(const Eigen::MatrixXd& corr, int n, int i, int j, const std::vector<int>& conditioning);

// PC algorithm over a correlation matrix: order-independent skeleton search
// with conditioning sets up to size p - 2, v-structure orientation, then Meek
// rules 1-3. Orientations that would close a directed cycle are skipped, so
// the directed part is always acyclic. Edge strength is the smallest |z|
// observed while testing a retained edge.
GraphResult pc_from_correlation(const Eigen::MatrixXd& corr, int n, const std::vector<std::string>& names,
                                double alpha = kDefaultAlpha);

// Runs PC on the named numeric columns (or every numeric column when
// `nodes` is {all_variables}). Throws Error(InsufficientSamples) unless
// rows > nodes + 3, and Error(BadDims) for fewer than two nodes.
GraphResult learn_graph(const TabularDataset& data, const std::vector<std::string>& nodes,
                        double alpha = kDefaultAlpha);

}  // namespace causalqa
