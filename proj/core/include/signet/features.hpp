#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "signet/graph.hpp"
#include "signet/spectral.hpp"

namespace signet {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureMode {
  spectral_vector,  ///< x_u = [alpha_u, beta^{1+}, beta^{1-}, ..., beta^{s+}, beta^{s-}]
  spectral_matrix,  ///< the same blocks stacked as (2s+1) rows of length k
  adjacency_row,    ///< row u of A
  alpha_only,       ///< alpha_u alone (neighbor-exclusion ablation)
};

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

/// One classifier input. `values` holds the row-major flattening; `rows` x `cols`
/// gives the matrix view (a vector input is 1 x length).
struct FeatureInput {
  FeatureMode mode = FeatureMode::spectral_vector;
  std::size_t s = 0;
  std::size_t k = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Eigen::VectorXd values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  RowMatrix matrix() const;
};

enum class NeighborSign { positive, negative };

/// Entry d holds the nodes at exactly d hops from u on the unsigned skeleton (entry 0
/// is empty), split by sign class.
/// A node's class is the sign product along a shortest path; it is positive if any
/// shortest path has positive product. Both lists are sorted by id.
struct SignedShell {
  std::vector<NodeId> positive;
  std::vector<NodeId> negative;
};
std::vector<SignedShell> signed_shells(const SignedGraph& graph, NodeId u, std::size_t max_step);

/// beta_u^{step,sign}: mean spectral coordinate over the signed shell, zero if empty.
Eigen::VectorXd neighbor_mean(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                              std::size_t step, NeighborSign sign);

/// The (2s+1) x k block matrix [alpha_u; beta^{1+}; beta^{1-}; ...; beta^{s+}; beta^{s-}].
RowMatrix spectral_blocks(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                          std::size_t s);

/// Requires a normalized embedding; s >= 1.
FeatureInput build_vector_input(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                                std::size_t s);
FeatureInput build_matrix_input(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                                std::size_t s);
FeatureInput build_alpha_input(const SpectralEmbedding& emb, NodeId u);
/// Length-n row of A with entries in {-1, 0, +1}.
FeatureInput build_adjacency_input(const SignedGraph& graph, NodeId u);

/// Flattened features of every node, one row per node, for the spectral modes.
/// `rows_per_node` / `cols_per_node` describe the matrix view of each row.
struct FeatureTable {
  FeatureMode mode = FeatureMode::spectral_vector;
  std::size_t rows_per_node = 1;
  std::size_t cols_per_node = 0;
  RowMatrix data;  // n x (rows_per_node * cols_per_node)
};
FeatureTable build_feature_table(const SignedGraph& graph, const SpectralEmbedding& emb,
                                 std::size_t s, FeatureMode mode);

}  // namespace signet
