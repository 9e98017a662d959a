#include "signet/features.hpp"

#include <algorithm>

#include "signet/error.hpp"

namespace signet {

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::spectral_vector: return "spectral-vector";
    case FeatureMode::spectral_matrix: return "spectral-matrix";
    case FeatureMode::adjacency_row: return "adjacency-row";
    case FeatureMode::alpha_only: return "alpha-only";
  }
  return "unknown";
}

FeatureMode parse_feature_mode(std::string_view text) {
  for (const auto m : {FeatureMode::spectral_vector, FeatureMode::spectral_matrix,
                       FeatureMode::adjacency_row, FeatureMode::alpha_only}) {
    if (text == to_string(m)) return m;
  }
  throw PreconditionError("unknown input mode '" + std::string(text) + "'");
}

RowMatrix FeatureInput::matrix() const {
  return Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
}

std::vector<SignedShell> signed_shells(const SignedGraph& graph, NodeId u, std::size_t max_step) {
  if (u >= graph.node_count()) throw PreconditionError("node id out of range");
  std::vector<SignedShell> shells(max_step + 1);
  if (max_step == 0) return shells;

  // Plain BFS in layers; for each node record whether some shortest path reaching it
  // has positive / negative sign product.
  struct Reach {
    bool pos = false;
    bool neg = false;
  };
  std::vector<std::size_t> dist(graph.node_count(), SIZE_MAX);
  std::vector<Reach> reach(graph.node_count());
  dist[u] = 0;
  reach[u].pos = true;
  std::vector<NodeId> frontier{u};
  for (std::size_t step = 1; step <= max_step && !frontier.empty(); ++step) {
    std::vector<NodeId> next;
    for (const NodeId x : frontier) {
      auto relax = [&](NodeId y, bool flips) {
        if (dist[y] == SIZE_MAX) {
          dist[y] = step;
          next.push_back(y);
        }
        if (dist[y] != step) return;
        if (flips) {
          reach[y].pos = reach[y].pos || reach[x].neg;
          reach[y].neg = reach[y].neg || reach[x].pos;
        } else {
          reach[y].pos = reach[y].pos || reach[x].pos;
          reach[y].neg = reach[y].neg || reach[x].neg;
        }
      };
      for (const NodeId y : graph.positive_neighbors(x)) relax(y, false);
      for (const NodeId y : graph.negative_neighbors(x)) relax(y, true);
    }
    std::sort(next.begin(), next.end());
    for (const NodeId y : next) {
      (reach[y].pos ? shells[step].positive : shells[step].negative).push_back(y);
    }
    frontier = std::move(next);
  }
  return shells;
}

namespace {

Eigen::VectorXd mean_rows(const SpectralEmbedding& emb, const std::vector<NodeId>& nodes) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.k));
  if (nodes.empty()) return acc;
  for (const NodeId w : nodes) acc += emb.coordinates.row(w).transpose();
  return acc / static_cast<double>(nodes.size());
}

void check_embedding(const SignedGraph& graph, const SpectralEmbedding& emb) {
  if (emb.node_count() != graph.node_count()) {
    throw ShapeError("embedding rows do not match graph node count");
  }
}

FeatureInput make_input(FeatureMode mode, std::size_t s, std::size_t k, std::size_t rows,
                        std::size_t cols, Eigen::VectorXd values) {
  FeatureInput in;
  in.mode = mode;
  in.s = s;
  in.k = k;
  in.rows = rows;
  in.cols = cols;
  in.values = std::move(values);
  return in;
}

}  // namespace

Eigen::VectorXd neighbor_mean(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                              std::size_t step, NeighborSign sign) {
  if (step < 1) throw PreconditionError("neighbor_mean requires step >= 1");
  check_embedding(graph, emb);
  if (step == 1) {
    const auto nbrs = sign == NeighborSign::positive ? graph.positive_neighbors(u)
                                                     : graph.negative_neighbors(u);
    return mean_rows(emb, std::vector<NodeId>(nbrs.begin(), nbrs.end()));
  }
  const auto shells = signed_shells(graph, u, step);
  return mean_rows(emb, sign == NeighborSign::positive ? shells[step].positive
                                                       : shells[step].negative);
}

RowMatrix spectral_blocks(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                          std::size_t s) {
  check_embedding(graph, emb);
  if (u >= graph.node_count()) throw PreconditionError("node id out of range");
  const auto k = static_cast<Eigen::Index>(emb.k);
  RowMatrix out(static_cast<Eigen::Index>(2 * s + 1), k);
  out.row(0) = emb.coordinates.row(u);
  if (s == 0) return out;
  std::vector<SignedShell> shells;
  if (s == 1) {
    shells.resize(2);
    const auto pos = graph.positive_neighbors(u);
    const auto neg = graph.negative_neighbors(u);
    shells[1].positive.assign(pos.begin(), pos.end());
    shells[1].negative.assign(neg.begin(), neg.end());
  } else {
    shells = signed_shells(graph, u, s);
  }
  for (std::size_t step = 1; step <= s; ++step) {
    const auto r = static_cast<Eigen::Index>(2 * step - 1);
    out.row(r) = mean_rows(emb, shells[step].positive).transpose();
    out.row(r + 1) = mean_rows(emb, shells[step].negative).transpose();
  }
  return out;
}

FeatureInput build_vector_input(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                                std::size_t s) {
  if (!emb.normalized) throw PreconditionError("features require a normalized embedding");
  if (s < 1) throw PreconditionError("neighbor radius s must be >= 1");
  const RowMatrix blocks = spectral_blocks(graph, emb, u, s);
  Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(blocks.data(), blocks.size());
  return make_input(FeatureMode::spectral_vector, s, emb.k, 1, flat.size(), std::move(flat));
}

FeatureInput build_matrix_input(const SignedGraph& graph, const SpectralEmbedding& emb, NodeId u,
                                std::size_t s) {
  FeatureInput in = build_vector_input(graph, emb, u, s);
  in.mode = FeatureMode::spectral_matrix;
  in.rows = 2 * s + 1;
  in.cols = emb.k;
  return in;
}

FeatureInput build_alpha_input(const SpectralEmbedding& emb, NodeId u) {
  if (!emb.normalized) throw PreconditionError("features require a normalized embedding");
  if (u >= emb.node_count()) throw PreconditionError("node id out of range");
  return make_input(FeatureMode::alpha_only, 0, emb.k, 1, emb.k, emb.row(u));
}

FeatureInput build_adjacency_input(const SignedGraph& graph, NodeId u) {
  const auto n = graph.node_count();
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const NodeId w : graph.positive_neighbors(u)) row[w] = 1.0;
  for (const NodeId w : graph.negative_neighbors(u)) row[w] = -1.0;
  return make_input(FeatureMode::adjacency_row, 0, 0, 1, n, std::move(row));
}

FeatureTable build_feature_table(const SignedGraph& graph, const SpectralEmbedding& emb,
                                 std::size_t s, FeatureMode mode) {
  const auto n = graph.node_count();
  FeatureTable table;
  table.mode = mode;
  switch (mode) {
    case FeatureMode::spectral_vector:
    case FeatureMode::spectral_matrix: {
      table.rows_per_node = mode == FeatureMode::spectral_matrix ? 2 * s + 1 : 1;
      table.cols_per_node = mode == FeatureMode::spectral_matrix ? emb.k : (2 * s + 1) * emb.k;
      table.data.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>((2 * s + 1) * emb.k));
      for (NodeId u = 0; u < n; ++u) {
        table.data.row(u) = build_vector_input(graph, emb, u, s).values.transpose();
      }
      break;
    }
    case FeatureMode::alpha_only: {
      if (!emb.normalized) throw PreconditionError("features require a normalized embedding");
      check_embedding(graph, emb);
      table.rows_per_node = 1;
      table.cols_per_node = emb.k;
      table.data = emb.coordinates;
      break;
    }
    case FeatureMode::adjacency_row: {
      table.rows_per_node = 1;
      table.cols_per_node = n;
      table.data = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (const auto& e : graph.edges()) {
        table.data(e.u, e.v) = table.data(e.v, e.u) = to_int(e.sign);
      }
      break;
    }
  }
  return table;
}

}  // namespace signet
