#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signet {

using NodeId = std::uint32_t;

enum class Sign : std::int8_t { negative = -1, positive = 1 };

enum class NodeLabel : std::uint8_t { benign = 0, fraud = 1 };

constexpr int to_int(Sign s) noexcept { return static_cast<int>(s); }
constexpr int to_class(NodeLabel l) noexcept { return static_cast<int>(l); }

struct SignedEdge {
  NodeId u;
  NodeId v;
  Sign sign;

  friend bool operator==(const SignedEdge&, const SignedEdge&) = default;
};

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t positive_edges = 0;
  std::size_t negative_edges = 0;
  std::size_t benign_nodes = 0;
  std::size_t fraud_nodes = 0;
  std::size_t isolated_nodes = 0;
};

/// Symmetric signed adjacency structure over dense node ids [0, n).
///
/// Neighbors are stored in compressed rows partitioned by sign and sorted by id,
/// so signed-neighbor iteration is O(deg) and deterministic. Immutable once built.
class SignedGraph {
 public:
  SignedGraph() = default;

  /// Validates and symmetrizes an edge set. Each unordered pair may appear more than
  /// once (in either orientation) only with the same sign.
  /// Throws GraphError on self-loops, out-of-range ids, or conflicting signs.
  static SignedGraph from_edges(std::size_t n, std::span<const SignedEdge> edges);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t positive_edge_count() const noexcept { return positive_count_; }
  std::size_t negative_edge_count() const noexcept { return edge_count_ - positive_count_; }

  std::span<const NodeId> positive_neighbors(NodeId u) const;
  std::span<const NodeId> negative_neighbors(NodeId u) const;
  std::size_t degree(NodeId u) const;
  /// (#positive - #negative), the row sum of A.
  long signed_degree(NodeId u) const;
  /// Sign of edge (u, v), or nullopt if absent. O(log deg).
  std::optional<Sign> edge_sign(NodeId u, NodeId v) const;

  /// Undirected edges with u < v, ordered by (u, v).
  std::vector<SignedEdge> edges() const;

  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<NodeLabel>& labels() const noexcept { return labels_; }
  NodeLabel label(NodeId u) const { return labels_.at(u); }
  /// Copy of this graph with labels attached; size must equal node_count().
  SignedGraph with_labels(std::vector<NodeLabel> labels) const;

  /// Optional external names (e.g. user ids from an edit log).
  const std::vector<std::string>& names() const noexcept { return names_; }
  SignedGraph with_names(std::vector<std::string> names) const;

  /// Returns a graph where node u of this graph becomes node perm[u].
  SignedGraph permuted(std::span<const NodeId> perm) const;

  /// Full symmetry / uniqueness audit over the stored rows.
  bool is_symmetric() const;

  GraphStats stats() const;

 private:
  std::size_t n_ = 0;
  std::size_t edge_count_ = 0;
  std::size_t positive_count_ = 0;
  std::vector<std::size_t> pos_offsets_{0};
  std::vector<NodeId> pos_targets_;
  std::vector<std::size_t> neg_offsets_{0};
  std::vector<NodeId> neg_targets_;
  std::vector<NodeLabel> labels_;
  std::vector<std::string> names_;
};

/// Reads `u <TAB> v <TAB> {+1|-1}` lines; `#` comments and blank lines are skipped.
/// Any whitespace separates fields. n is one past the largest id seen.
SignedGraph load_edge_list(const std::filesystem::path& path);

/// Writes the canonical edge list (u < v, one line per undirected edge).
void save_edge_list(const SignedGraph& graph, const std::filesystem::path& path);

/// Reads `node <TAB> {0|1}` lines. Node keys are integer ids, or names when the graph
/// carries names. Every node must receive a label.
std::vector<NodeLabel> load_labels(const SignedGraph& graph, const std::filesystem::path& path);

void save_labels(const SignedGraph& graph, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Co-edit graph construction from an edit log.

struct EditRecord {
  std::string user;
  std::string page_title;
  bool reverted = false;
};

/// True when the title lies in one of the meta namespaces excluded from co-edit
/// relations ("User:", "Talk:", "User talk:", "Wikipedia:"), by prefix.
bool is_meta_page(const std::string& title);

/// Builds the signed co-edit graph. A user's category on a page is "revert" if any of
/// their edits there was reverted. Two users sharing pages get a positive edge when
/// same-category pages outnumber different-category ones, a negative edge when the
/// opposite holds, and no edge on a tie. Users left without edges are dropped; node
/// ids follow the first appearance of retained users in `records`, and names are set.
/// Throws GraphError if every user ends up isolated.
SignedGraph build_coedit_graph(std::span<const EditRecord> records);

/// Reads `user <TAB> page_title <TAB> {0|1}` lines. Titles may contain spaces, so the
/// line is split on tabs only.
std::vector<EditRecord> load_edit_log(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic planted-fraud generator.

struct PlantedGraphParams {
  /// Positive edge probability for benign pairs inside the same block.
  double within_block_positive = 0.02;
  /// Negative edge probability for benign pairs in different blocks.
  double cross_block_negative = 0.002;
  /// Number of distinct benign targets each fraud node links to.
  std::size_t fraud_out_degree = 20;
  /// Probability that a fraud link is negative.
  double fraud_negative_fraction = 0.8;
  std::size_t benign_blocks = 2;
};

/// Expected positive / negative edge counts of the generator (analytic).
struct ExpectedEdgeCounts {
  double positive = 0.0;
  double negative = 0.0;
};
ExpectedEdgeCounts expected_edge_counts(std::size_t n_benign, std::size_t n_fraud,
                                        const PlantedGraphParams& params);

/// Benign nodes form a signed stochastic block model; each fraud node links to
/// `fraud_out_degree` distinct benign victims chosen uniformly, each link negative
/// with probability `fraud_negative_fraction`. Node ids are shuffled so labels carry
/// no positional signal. Deterministic per seed.
SignedGraph generate_planted_graph(std::size_t n_benign, std::size_t n_fraud,
                                   const PlantedGraphParams& params, std::uint64_t seed);

}  // namespace signet
