#include "causalqa/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "causalqa/error.hpp"

namespace causalqa {

CiTest fisher_z_test(const Eigen::MatrixXd& corr, int n, int i, int j, const std::vector<int>& conditioning) {
    std::vector<int> idx = {i, j};
    idx.insert(idx.end(), conditioning.begin(), conditioning.end());
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = corr(idx[a], idx[b]);

    double r;
    if (conditioning.empty()) {
        r = sub(0, 1);
    } else {
        const Eigen::MatrixXd prec = sub.completeOrthogonalDecomposition().pseudoInverse();
        r = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
    }
    r = std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);

    CiTest t;
    t.partial_correlation = r;
    const double dof = static_cast<double>(n) - static_cast<double>(conditioning.size()) - 3.0;
    t.z = std::sqrt(std::max(dof, 0.0)) * std::atanh(r);
    t.p_value = std::erfc(std::abs(t.z) / std::sqrt(2.0));
    return t;
}

namespace {

// Calls fn(subset) for every size-k subset of `pool`; stops when fn returns true.
template <class Fn>
bool for_each_subset(const std::vector<int>& pool, std::size_t k, Fn&& fn) {
    if (k > pool.size()) return false;
    std::vector<int> pick(k);
    std::vector<std::size_t> pos(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = i;
    while (true) {
        for (std::size_t i = 0; i < k; ++i) pick[i] = pool[pos[i]];
        if (fn(pick)) return true;
        std::size_t i = k;
        while (i > 0 && pos[i - 1] == pool.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++pos[i - 1];
        for (std::size_t m = i; m < k; ++m) pos[m] = pos[m - 1] + 1;
    }
}

class Pdag {
public:
    explicit Pdag(int p) : p_(p), adj_(p, std::vector<int>(p, 0)) {}

    bool adjacent(int a, int b) const { return adj_[a][b] || adj_[b][a]; }
    bool undirected(int a, int b) const { return adj_[a][b] && adj_[b][a]; }
    bool directed(int a, int b) const { return adj_[a][b] && !adj_[b][a]; }
    void connect(int a, int b) { adj_[a][b] = adj_[b][a] = 1; }
    void disconnect(int a, int b) { adj_[a][b] = adj_[b][a] = 0; }

    // Orients a - b as a -> b unless that closes a directed cycle.
    bool orient(int a, int b) {
        if (!undirected(a, b)) return false;
        if (reaches_directed(b, a)) return false;
        adj_[b][a] = 0;
        return true;
    }

    std::vector<int> neighbours(int a) const {
        std::vector<int> out;
        for (int b = 0; b < p_; ++b)
            if (b != a && adjacent(a, b)) out.push_back(b);
        return out;
    }

    const std::vector<std::vector<int>>& matrix() const { return adj_; }
    int size() const { return p_; }

private:
    bool reaches_directed(int from, int to) const {
        std::vector<int> stack = {from};
        std::vector<char> seen(p_, 0);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (u == to) return true;
            if (seen[u]) continue;
            seen[u] = 1;
            for (int v = 0; v < p_; ++v)
                if (directed(u, v)) stack.push_back(v);
        }
        return false;
    }

    int p_;
    std::vector<std::vector<int>> adj_;
};

bool apply_meek(Pdag& g) {
    const int p = g.size();
    bool changed = false;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            if (a == b || !g.undirected(a, b)) continue;
            bool orient = false;
            for (int c = 0; c < p && !orient; ++c) {
                if (c == a || c == b) continue;
                // R1: c -> a - b, c and b non-adjacent
                if (g.directed(c, a) && !g.adjacent(c, b)) orient = true;
                // R2: a -> c -> b
                if (g.directed(a, c) && g.directed(c, b)) orient = true;
            }
            // R3: a - c -> b, a - d -> b, c and d non-adjacent
            for (int c = 0; c < p && !orient; ++c) {
                if (c == a || c == b || !g.undirected(a, c) || !g.directed(c, b)) continue;
                for (int d = c + 1; d < p && !orient; ++d) {
                    if (d == a || d == b || !g.undirected(a, d) || !g.directed(d, b)) continue;
                    if (!g.adjacent(c, d)) orient = true;
                }
            }
            if (orient && g.orient(a, b)) changed = true;
        }
    return changed;
}

}  // namespace

GraphResult pc_from_correlation(const Eigen::MatrixXd& corr, int n, const std::vector<std::string>& names,
                                double alpha) {
    const int p = static_cast<int>(corr.rows());
    Pdag g(p);
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) g.connect(a, b);

    std::vector<std::vector<std::set<int>>> sepset(p, std::vector<std::set<int>>(p));
    std::vector<std::vector<double>> min_z(p, std::vector<double>(p, std::numeric_limits<double>::infinity()));

    for (int level = 0; level <= std::max(0, p - 2); ++level) {
        // Neighbourhoods are frozen per level so edge removal order is irrelevant.
        std::vector<std::vector<int>> frozen(p);
        bool any = false;
        for (int a = 0; a < p; ++a) {
            frozen[a] = g.neighbours(a);
            if (static_cast<int>(frozen[a].size()) - 1 >= level) any = true;
        }
        if (!any) break;

        std::vector<std::pair<int, int>> removals;
        for (int a = 0; a < p; ++a)
            for (int b : frozen[a]) {
                if (!g.adjacent(a, b)) continue;
                std::vector<int> pool;
                for (int c : frozen[a])
                    if (c != b) pool.push_back(c);
                const int lo = std::min(a, b), hi = std::max(a, b);
                for_each_subset(pool, static_cast<std::size_t>(level), [&](const std::vector<int>& s) {
                    const CiTest t = fisher_z_test(corr, n, a, b, s);
                    if (t.p_value > alpha) {
                        removals.emplace_back(lo, hi);
                        if (sepset[lo][hi].empty() && min_z[lo][hi] != -1.0) {
                            sepset[lo][hi] = std::set<int>(s.begin(), s.end());
                            min_z[lo][hi] = -1.0;  // marks "separated"
                        }
                        return true;
                    }
                    min_z[lo][hi] = std::min(min_z[lo][hi], std::abs(t.z));
                    return false;
                });
            }
        for (auto [a, b] : removals) g.disconnect(a, b);
    }

    // v-structures a -> c <- b for non-adjacent a, b with c outside sepset(a, b)
    for (int c = 0; c < p; ++c)
        for (int a = 0; a < p; ++a)
            for (int b = a + 1; b < p; ++b) {
                if (a == c || b == c || g.adjacent(a, b)) continue;
                if (!g.adjacent(a, c) || !g.adjacent(b, c)) continue;
                if (sepset[a][b].count(c)) continue;
                // Keep an already-oriented c -> a or c -> b rather than making it bidirected.
                if (g.directed(c, a) || g.directed(c, b)) continue;
                g.orient(a, c);
                g.orient(b, c);
            }

    while (apply_meek(g)) {
    }

    GraphResult out;
    out.nodes = names;
    out.adjacency = g.matrix();
    out.strength.assign(p, std::vector<double>(p, 0.0));
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            if (g.adjacent(a, b)) {
                const double z = std::isfinite(min_z[a][b]) ? min_z[a][b] : 0.0;
                out.strength[a][b] = out.strength[b][a] = z;
            }
    return out;
}

GraphResult learn_graph(const TabularDataset& data, const std::vector<std::string>& nodes, double alpha) {
    std::vector<std::string> cols;
    if (nodes.size() == 1 && nodes.front() == kAllVariables) {
        for (std::size_t c = 0; c < data.cols(); ++c)
            if (!data.column(c).categorical) cols.push_back(data.column(c).name);
    } else {
        for (const auto& name : nodes) cols.push_back(resolve_column(data, name));
    }
    const int p = static_cast<int>(cols.size());
    const int n = static_cast<int>(data.rows());
    if (p < 2) throw Error(ErrorCode::BadDims, "causal graph learning needs at least two nodes");
    if (n <= p + 3)
        throw Error(ErrorCode::InsufficientSamples,
                    std::to_string(n) + " rows is too few for " + std::to_string(p) + " nodes (need > nodes + 3)");

    Eigen::MatrixXd X(n, p);
    for (int j = 0; j < p; ++j) {
        const auto& v = data.numeric(cols[static_cast<std::size_t>(j)]);
        X.col(j) = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    }
    Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
    Eigen::MatrixXd cov = (C.transpose() * C) / static_cast<double>(n - 1);
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    for (int j = 0; j < p; ++j)
        if (!(sd(j) > 0.0))
            throw Error(ErrorCode::EstimationFailed, "column '" + cols[static_cast<std::size_t>(j)] + "' is constant");
    Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
    return pc_from_correlation(corr, n, cols, alpha);
}

}  // namespace causalqa
