#ifndef CDT_LAYOUT_HPP
#define CDT_LAYOUT_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

#include "cdt/errors.hpp"

namespace cdt {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// The set of connected assets (graph nodes). Node indices are 0-based.
struct GraphSpec {
    int node_count = 0;
    std::vector<std::string> node_labels;

    static GraphSpec with_default_labels(int g) {
        GraphSpec spec;
        spec.node_count = g;
        for (int i = 0; i < g; ++i)
            spec.node_labels.push_back("node" + std::to_string(i + 1));
        return spec;
    }
};

enum class FactorKind { instantaneous, lagged };

/// Identifies one causal factor: effect of `source` on `target`,
/// either contemporaneous or at lag 1. target != source always.
struct FactorId {
    int target = 0;
    int source = 0;
    FactorKind kind = FactorKind::instantaneous;

    friend bool operator==(const FactorId&, const FactorId&) = default;
};

/// Pair of G x G coefficient matrices: a0 holds instantaneous effects,
/// a1 the lag-1 effects. Entry (k, j) is the effect of node j on node k.
/// Diagonals are identically zero (no self-causality).
template <typename Scalar = double>
struct CausalFactors {
    MatrixX<Scalar> a0;
    MatrixX<Scalar> a1;

    static CausalFactors zero(int g) {
        return {MatrixX<Scalar>::Zero(g, g), MatrixX<Scalar>::Zero(g, g)};
    }

    int nodes() const { return static_cast<int>(a0.rows()); }
};

/// Canonical mapping between causal factors and flat state-vector indices.
///
/// The state vector concatenates one block per target node k (ascending).
/// Each block has length 2(G-1): first the instantaneous factors, then the
/// lagged ones, sources ascending with j == k skipped. dim = 2 G (G-1).
class StateLayout {
public:
    explicit StateLayout(GraphSpec graph) : graph_(std::move(graph)) {
        if (graph_.node_count < 2)
            throw validation_error("degenerate graph: need at least 2 nodes, got " +
                                   std::to_string(graph_.node_count));
    }

    const GraphSpec& graph() const { return graph_; }
    int nodes() const { return graph_.node_count; }
    int block_size() const { return 2 * (graph_.node_count - 1); }
    int dim() const { return graph_.node_count * block_size(); }

    /// First state index of target k's block.
    int block_start(int target) const {
        check_node(target);
        return target * block_size();
    }

    int index_of(const FactorId& id) const {
        check_node(id.target);
        check_node(id.source);
        if (id.source == id.target)
            throw validation_error("self effects are excluded from the state");
        const int g = graph_.node_count;
        const int pos = id.source < id.target ? id.source : id.source - 1;
        const int off = id.kind == FactorKind::instantaneous ? pos : (g - 1) + pos;
        return id.target * block_size() + off;
    }

    FactorId factor_of(int index) const {
        if (index < 0 || index >= dim())
            throw validation_error("state index out of range");
        const int g = graph_.node_count;
        const int block = block_size();
        FactorId id;
        id.target = index / block;
        const int off = index % block;
        id.kind = off < g - 1 ? FactorKind::instantaneous : FactorKind::lagged;
        const int pos = off % (g - 1);
        id.source = pos < id.target ? pos : pos + 1;
        return id;
    }

    /// Column name for CSV output: `<target>_from_<source>_<inst|lag>`.
    std::string column_name(int index) const {
        const FactorId id = factor_of(index);
        return graph_.node_labels[id.target] + "_from_" + graph_.node_labels[id.source] +
               (id.kind == FactorKind::instantaneous ? "_inst" : "_lag");
    }

private:
    void check_node(int k) const {
        if (k < 0 || k >= graph_.node_count)
            throw validation_error("node index out of range: " + std::to_string(k));
    }

    GraphSpec graph_;
};

inline StateLayout layout_for(GraphSpec graph) { return StateLayout(std::move(graph)); }

namespace detail {

template <typename Scalar>
void require_zero_diagonal(const MatrixX<Scalar>& m, const char* name) {
    for (int i = 0; i < m.rows(); ++i)
        if (m(i, i) != Scalar(0))
            throw validation_error(std::string(name) + " has a nonzero diagonal entry at " +
                                   std::to_string(i));
}

} // namespace detail

/// Flatten coefficient matrices into the state vector in layout order.
template <typename Scalar>
VectorX<Scalar> pack(const CausalFactors<Scalar>& factors, const StateLayout& layout) {
    const int g = layout.nodes();
    if (factors.a0.rows() != g || factors.a0.cols() != g || factors.a1.rows() != g ||
        factors.a1.cols() != g)
        throw validation_error("factor matrices do not match layout node count");
    detail::require_zero_diagonal(factors.a0, "a0");
    detail::require_zero_diagonal(factors.a1, "a1");
    VectorX<Scalar> x(layout.dim());
    for (int k = 0; k < g; ++k)
        for (int j = 0; j < g; ++j) {
            if (j == k) continue;
            x[layout.index_of({k, j, FactorKind::instantaneous})] = factors.a0(k, j);
            x[layout.index_of({k, j, FactorKind::lagged})] = factors.a1(k, j);
        }
    return x;
}

/// Inverse of pack. Diagonals of the result are exactly zero.
template <typename Scalar>
CausalFactors<Scalar> unpack(const VectorX<Scalar>& x, const StateLayout& layout) {
    if (x.size() != layout.dim())
        throw validation_error("state vector length " + std::to_string(x.size()) +
                               " does not match layout dim " + std::to_string(layout.dim()));
    auto factors = CausalFactors<Scalar>::zero(layout.nodes());
    for (int i = 0; i < layout.dim(); ++i) {
        const FactorId id = layout.factor_of(i);
        (id.kind == FactorKind::instantaneous ? factors.a0 : factors.a1)(id.target, id.source) =
            x[i];
    }
    return factors;
}

/// Regressor row for target k: current values of the other nodes followed by
/// their previous values, sources ascending. Matches the layout block order,
/// so row . x_block reproduces the model prediction for node k.
template <typename Scalar>
RowVectorX<Scalar> build_row(int k, const VectorX<Scalar>& y_now, const VectorX<Scalar>& y_prev) {
    const int g = static_cast<int>(y_now.size());
    if (y_prev.size() != g)
        throw validation_error("y_now and y_prev have different lengths");
    if (k < 0 || k >= g)
        throw validation_error("target index out of range");
    RowVectorX<Scalar> row(2 * (g - 1));
    int c = 0;
    for (int j = 0; j < g; ++j)
        if (j != k) row[c++] = y_now[j];
    for (int j = 0; j < g; ++j)
        if (j != k) row[c++] = y_prev[j];
    return row;
}

/// Time-varying observation matrix H[n]: block diagonal, row k carries
/// build_row(k, ...) in target k's column block and zeros elsewhere.
template <typename Scalar>
MatrixX<Scalar> build_observation_matrix(const VectorX<Scalar>& y_now,
                                         const VectorX<Scalar>& y_prev,
                                         const StateLayout& layout) {
    const int g = layout.nodes();
    if (y_now.size() != g || y_prev.size() != g)
        throw validation_error("measurement vectors do not match layout node count");
    MatrixX<Scalar> h = MatrixX<Scalar>::Zero(g, layout.dim());
    for (int k = 0; k < g; ++k)
        h.block(k, layout.block_start(k), 1, layout.block_size()) = build_row(k, y_now, y_prev);
    return h;
}

} // namespace cdt

#endif
