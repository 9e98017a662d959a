#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "signet/graph.hpp"

namespace signet {

enum class EigenOrder {
  algebraic,  ///< lambda_1 >= lambda_2 >= ... (largest algebraic first)
  magnitude,  ///< |lambda_1| >= |lambda_2| >= ...
};

struct EigenOptions {
  std::size_t k = 30;
  double tol = 1e-8;
  /// Total Lanczos steps allowed; 0 means 10 * n.
  std::size_t max_iter = 0;
  EigenOrder order = EigenOrder::algebraic;
};

/// Top-k eigenpairs of the signed adjacency matrix.
///
/// Row u of `coordinates` is the spectral coordinate of node u, i.e. the u-th
/// entries of the k leading eigenvectors. Before normalization every column has
/// unit L2 norm and is sign-canonical: its largest-magnitude entry is positive,
/// with ties going to the lowest node id.
struct SpectralEmbedding {
  std::size_t k = 0;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd coordinates;  // n x k
  bool normalized = false;
  /// ||A v_i - lambda_i v_i||_2 for each returned pair (computed before normalization).
  std::vector<double> residuals;
  std::size_t lanczos_steps = 0;

  std::size_t node_count() const noexcept { return static_cast<std::size_t>(coordinates.rows()); }
  Eigen::VectorXd row(std::size_t u) const { return coordinates.row(static_cast<Eigen::Index>(u)).transpose(); }
};

/// y = A x for the signed adjacency matrix, summed in a fixed neighbor order.
void adjacency_multiply(const SignedGraph& graph, const Eigen::VectorXd& x, Eigen::VectorXd& y);

/// Lanczos iteration with full reorthogonalization on the sparse adjacency matrix.
/// Converged pairs are locked and a fresh Krylov run in their orthogonal complement
/// checks that no eigenvalue was missed (repeated eigenvalues, disconnected parts);
/// runs repeat until the complement offers nothing better than the current k-th pair.
/// Throws PreconditionError unless 1 <= k <= n and tol > 0; ConvergenceError
/// (with achieved residuals) once the step budget is exhausted.
SpectralEmbedding eigen_top_k(const SignedGraph& graph, const EigenOptions& options);

/// Scales each nonzero row to unit L2 norm; zero rows stay zero.
SpectralEmbedding normalize_coordinates(SpectralEmbedding embedding);

/// ||A - sum_i lambda_i v_i v_i^T||_F / ||A||_F for an unnormalized embedding.
double reconstruction_residual(const SignedGraph& graph, const SpectralEmbedding& embedding);

/// Flips v so that its largest-magnitude entry is positive (lowest index on ties).
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v);

/// `node<TAB>c1<TAB>...<TAB>ck` per node, round-trip precision.
void save_embedding(const SpectralEmbedding& embedding, const std::filesystem::path& path);

}  // namespace signet
