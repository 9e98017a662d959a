#include "signet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "signet/error.hpp"
#include "signet/random.hpp"

namespace signet {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

bool skip_line(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

SignedGraph SignedGraph::from_edges(std::size_t n, std::span<const SignedEdge> edges) {
  if (n > std::numeric_limits<NodeId>::max()) throw GraphError("node count exceeds id range");
  std::unordered_map<std::uint64_t, Sign> seen;
  seen.reserve(edges.size());
  std::vector<SignedEdge> unique;
  unique.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw GraphError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (e.u == e.v) throw GraphError("self-loop on node " + std::to_string(e.u));
    if (e.sign != Sign::positive && e.sign != Sign::negative) throw GraphError("invalid edge sign");
    const auto [it, inserted] = seen.emplace(pair_key(e.u, e.v), e.sign);
    if (!inserted) {
      if (it->second != e.sign) {
        throw GraphError("conflicting signs for pair (" + std::to_string(e.u) + ", " +
                         std::to_string(e.v) + ")");
      }
      continue;
    }
    unique.push_back(e);
  }

  SignedGraph g;
  g.n_ = n;
  g.edge_count_ = unique.size();
  std::vector<std::size_t> pos_deg(n, 0), neg_deg(n, 0);
  for (const auto& e : unique) {
    auto& deg = e.sign == Sign::positive ? pos_deg : neg_deg;
    ++deg[e.u];
    ++deg[e.v];
    if (e.sign == Sign::positive) ++g.positive_count_;
  }
  g.pos_offsets_.assign(n + 1, 0);
  g.neg_offsets_.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    g.pos_offsets_[u + 1] = g.pos_offsets_[u] + pos_deg[u];
    g.neg_offsets_[u + 1] = g.neg_offsets_[u] + neg_deg[u];
  }
  g.pos_targets_.resize(g.pos_offsets_[n]);
  g.neg_targets_.resize(g.neg_offsets_[n]);
  std::vector<std::size_t> pos_fill(g.pos_offsets_.begin(), g.pos_offsets_.end() - 1);
  std::vector<std::size_t> neg_fill(g.neg_offsets_.begin(), g.neg_offsets_.end() - 1);
  for (const auto& e : unique) {
    if (e.sign == Sign::positive) {
      g.pos_targets_[pos_fill[e.u]++] = e.v;
      g.pos_targets_[pos_fill[e.v]++] = e.u;
    } else {
      g.neg_targets_[neg_fill[e.u]++] = e.v;
      g.neg_targets_[neg_fill[e.v]++] = e.u;
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    std::sort(g.pos_targets_.begin() + static_cast<std::ptrdiff_t>(g.pos_offsets_[u]),
              g.pos_targets_.begin() + static_cast<std::ptrdiff_t>(g.pos_offsets_[u + 1]));
    std::sort(g.neg_targets_.begin() + static_cast<std::ptrdiff_t>(g.neg_offsets_[u]),
              g.neg_targets_.begin() + static_cast<std::ptrdiff_t>(g.neg_offsets_[u + 1]));
  }
  return g;
}

std::span<const NodeId> SignedGraph::positive_neighbors(NodeId u) const {
  if (u >= n_) throw PreconditionError("node id out of range");
  return {pos_targets_.data() + pos_offsets_[u], pos_offsets_[u + 1] - pos_offsets_[u]};
}

std::span<const NodeId> SignedGraph::negative_neighbors(NodeId u) const {
  if (u >= n_) throw PreconditionError("node id out of range");
  return {neg_targets_.data() + neg_offsets_[u], neg_offsets_[u + 1] - neg_offsets_[u]};
}

std::size_t SignedGraph::degree(NodeId u) const {
  return positive_neighbors(u).size() + negative_neighbors(u).size();
}

long SignedGraph::signed_degree(NodeId u) const {
  return static_cast<long>(positive_neighbors(u).size()) -
         static_cast<long>(negative_neighbors(u).size());
}

std::optional<Sign> SignedGraph::edge_sign(NodeId u, NodeId v) const {
  const auto pos = positive_neighbors(u);
  if (std::binary_search(pos.begin(), pos.end(), v)) return Sign::positive;
  const auto neg = negative_neighbors(u);
  if (std::binary_search(neg.begin(), neg.end(), v)) return Sign::negative;
  return std::nullopt;
}

std::vector<SignedEdge> SignedGraph::edges() const {
  std::vector<SignedEdge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < n_; ++u) {
    // Merge the two sorted rows so output is ordered by (u, v).
    const auto pos = positive_neighbors(u);
    const auto neg = negative_neighbors(u);
    std::size_t i = 0, j = 0;
    while (i < pos.size() || j < neg.size()) {
      const bool take_pos = j == neg.size() || (i < pos.size() && pos[i] < neg[j]);
      const NodeId v = take_pos ? pos[i++] : neg[j++];
      if (u < v) out.push_back({u, v, take_pos ? Sign::positive : Sign::negative});
    }
  }
  return out;
}

SignedGraph SignedGraph::with_labels(std::vector<NodeLabel> labels) const {
  if (labels.size() != n_) {
    throw PreconditionError("label count " + std::to_string(labels.size()) +
                            " does not match node count " + std::to_string(n_));
  }
  SignedGraph g = *this;
  g.labels_ = std::move(labels);
  return g;
}

SignedGraph SignedGraph::with_names(std::vector<std::string> names) const {
  if (names.size() != n_) throw PreconditionError("name count does not match node count");
  SignedGraph g = *this;
  g.names_ = std::move(names);
  return g;
}

SignedGraph SignedGraph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != n_) throw PreconditionError("permutation size mismatch");
  std::vector<SignedEdge> es = edges();
  for (auto& e : es) {
    e.u = perm[e.u];
    e.v = perm[e.v];
  }
  SignedGraph g = from_edges(n_, es);
  if (has_labels()) {
    std::vector<NodeLabel> labels(n_);
    for (std::size_t u = 0; u < n_; ++u) labels[perm[u]] = labels_[u];
    g.labels_ = std::move(labels);
  }
  if (!names_.empty()) {
    std::vector<std::string> names(n_);
    for (std::size_t u = 0; u < n_; ++u) names[perm[u]] = names_[u];
    g.names_ = std::move(names);
  }
  return g;
}

bool SignedGraph::is_symmetric() const {
  std::size_t directed = 0;
  for (NodeId u = 0; u < n_; ++u) {
    const auto pos = positive_neighbors(u);
    const auto neg = negative_neighbors(u);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (pos[i] == u || pos[i] >= n_) return false;
      if (i > 0 && pos[i] <= pos[i - 1]) return false;
      if (edge_sign(pos[i], u) != Sign::positive) return false;
    }
    for (std::size_t i = 0; i < neg.size(); ++i) {
      if (neg[i] == u || neg[i] >= n_) return false;
      if (i > 0 && neg[i] <= neg[i - 1]) return false;
      if (edge_sign(neg[i], u) != Sign::negative) return false;
      if (std::binary_search(pos.begin(), pos.end(), neg[i])) return false;
    }
    directed += pos.size() + neg.size();
  }
  return directed == 2 * edge_count_;
}

GraphStats SignedGraph::stats() const {
  GraphStats s;
  s.nodes = n_;
  s.edges = edge_count_;
  s.positive_edges = positive_edge_count();
  s.negative_edges = negative_edge_count();
  for (NodeId u = 0; u < n_; ++u) {
    if (degree(u) == 0) ++s.isolated_nodes;
  }
  for (const auto l : labels_) {
    (l == NodeLabel::fraud ? s.fraud_nodes : s.benign_nodes)++;
  }
  return s;
}

// ---------------------------------------------------------------------------

SignedGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::vector<SignedEdge> edges;
  std::unordered_map<std::uint64_t, std::pair<Sign, std::size_t>> first_seen;
  std::size_t n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto fields = split_fields(trim(line));
    if (fields.size() != 3) throw ParseError(source, lineno, "expected 3 fields `u v sign`");
    const auto u = parse_uint(fields[0]);
    const auto v = parse_uint(fields[1]);
    if (!u || !v || *u > std::numeric_limits<NodeId>::max() ||
        *v > std::numeric_limits<NodeId>::max()) {
      throw ParseError(source, lineno, "node ids must be non-negative integers");
    }
    Sign sign;
    if (fields[2] == "+1" || fields[2] == "1" || fields[2] == "+") {
      sign = Sign::positive;
    } else if (fields[2] == "-1" || fields[2] == "-") {
      sign = Sign::negative;
    } else {
      throw ParseError(source, lineno, "sign must be +1 or -1");
    }
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    if (*u == *v) throw GraphError(where + "self-loop on node " + std::to_string(*u));
    const auto key = pair_key(static_cast<NodeId>(*u), static_cast<NodeId>(*v));
    const auto [it, inserted] = first_seen.emplace(key, std::make_pair(sign, lineno));
    if (!inserted) {
      if (it->second.first != sign) {
        throw GraphError(where + "conflicting sign for pair (" + std::to_string(*u) + ", " +
                         std::to_string(*v) + "), first given on line " +
                         std::to_string(it->second.second));
      }
      continue;
    }
    n = std::max<std::size_t>(n, std::max(*u, *v) + 1);
    edges.push_back({static_cast<NodeId>(*u), static_cast<NodeId>(*v), sign});
  }
  return SignedGraph::from_edges(n, edges);
}

void save_edge_list(const SignedGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# nodes " << graph.node_count() << " edges " << graph.edge_count() << " positive "
      << graph.positive_edge_count() << " negative " << graph.negative_edge_count() << '\n';
  for (const auto& e : graph.edges()) {
    out << e.u << '\t' << e.v << '\t' << (e.sign == Sign::positive ? "+1" : "-1") << '\n';
  }
}

std::vector<NodeLabel> load_labels(const SignedGraph& graph, const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::unordered_map<std::string, NodeId> by_name;
  for (std::size_t u = 0; u < graph.names().size(); ++u) {
    by_name.emplace(graph.names()[u], static_cast<NodeId>(u));
  }
  std::vector<int> raw(graph.node_count(), -1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto t = trim(line);
    const auto tab = t.find_last_of("\t ");
    if (tab == std::string_view::npos) throw ParseError(source, lineno, "expected `node label`");
    const auto key = trim(t.substr(0, tab));
    const auto value = t.substr(tab + 1);
    if (value != "0" && value != "1") throw ParseError(source, lineno, "label must be 0 or 1");
    std::optional<NodeId> node;
    if (!by_name.empty()) {
      const auto it = by_name.find(std::string(key));
      if (it == by_name.end()) continue;  // labeled user filtered out of the graph
      node = it->second;
    } else {
      const auto id = parse_uint(key);
      if (!id) throw ParseError(source, lineno, "node id must be an integer");
      if (*id >= graph.node_count()) throw ParseError(source, lineno, "node id out of range");
      node = static_cast<NodeId>(*id);
    }
    raw[*node] = value == "1" ? 1 : 0;
  }
  std::vector<NodeLabel> labels(raw.size());
  for (std::size_t u = 0; u < raw.size(); ++u) {
    if (raw[u] < 0) throw Error(source + ": node " + std::to_string(u) + " has no label");
    labels[u] = raw[u] == 1 ? NodeLabel::fraud : NodeLabel::benign;
  }
  return labels;
}

void save_labels(const SignedGraph& graph, const std::filesystem::path& path) {
  if (!graph.has_labels()) throw PreconditionError("graph has no labels");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t u = 0; u < graph.node_count(); ++u) {
    out << u << '\t' << to_class(graph.labels()[u]) << '\n';
  }
}

// ---------------------------------------------------------------------------

bool is_meta_page(const std::string& title) {
  static constexpr std::string_view prefixes[] = {"User:", "Talk:", "User talk:", "Wikipedia:"};
  return std::any_of(std::begin(prefixes), std::end(prefixes),
                     [&](std::string_view p) { return title.starts_with(p); });
}

SignedGraph build_coedit_graph(std::span<const EditRecord> records) {
  if (records.empty()) throw PreconditionError("edit log is empty");

  std::unordered_map<std::string, std::size_t> user_index;
  std::vector<std::string> users;
  std::unordered_map<std::string, std::size_t> page_index;
  // Per page: user -> reverted-any flag. std::map keeps user order deterministic.
  std::vector<std::map<std::size_t, bool>> page_editors;

  for (const auto& r : records) {
    if (r.page_title.empty()) throw PreconditionError("edit record with empty page title");
    if (is_meta_page(r.page_title)) continue;
    auto [uit, unew] = user_index.emplace(r.user, users.size());
    if (unew) users.push_back(r.user);
    auto [pit, pnew] = page_index.emplace(r.page_title, page_editors.size());
    if (pnew) page_editors.emplace_back();
    auto [eit, enew] = page_editors[pit->second].emplace(uit->second, r.reverted);
    if (!enew) eit->second = eit->second || r.reverted;
  }

  struct Tally {
    std::size_t same = 0;
    std::size_t different = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Tally> tallies;
  for (const auto& editors : page_editors) {
    for (auto a = editors.begin(); a != editors.end(); ++a) {
      for (auto b = std::next(a); b != editors.end(); ++b) {
        auto& t = tallies[{a->first, b->first}];
        (a->second == b->second ? t.same : t.different)++;
      }
    }
  }

  std::vector<std::pair<std::pair<std::size_t, std::size_t>, Sign>> raw_edges;
  std::vector<bool> connected(users.size(), false);
  for (const auto& [pair, t] : tallies) {
    if (t.same == t.different) continue;
    raw_edges.push_back({pair, t.same > t.different ? Sign::positive : Sign::negative});
    connected[pair.first] = connected[pair.second] = true;
  }

  std::vector<NodeId> remap(users.size(), 0);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (!connected[i]) continue;
    remap[i] = static_cast<NodeId>(names.size());
    names.push_back(users[i]);
  }
  if (names.empty()) throw GraphError("co-edit graph is empty: every user is isolated");

  std::vector<SignedEdge> edges;
  edges.reserve(raw_edges.size());
  for (const auto& [pair, sign] : raw_edges) {
    edges.push_back({remap[pair.first], remap[pair.second], sign});
  }
  return SignedGraph::from_edges(names.size(), edges).with_names(std::move(names));
}

std::vector<EditRecord> load_edit_log(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::vector<EditRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    std::string_view t = line;
    while (!t.empty() && (t.back() == '\r' || t.back() == '\n')) t.remove_suffix(1);
    const auto first = t.find('\t');
    const auto last = t.rfind('\t');
    if (first == std::string_view::npos || first == last) {
      throw ParseError(source, lineno, "expected `user<TAB>page_title<TAB>{0|1}`");
    }
    const auto flag = t.substr(last + 1);
    if (flag != "0" && flag != "1") throw ParseError(source, lineno, "revert flag must be 0 or 1");
    EditRecord r;
    r.user = std::string(t.substr(0, first));
    r.page_title = std::string(t.substr(first + 1, last - first - 1));
    r.reverted = flag == "1";
    if (r.user.empty()) throw ParseError(source, lineno, "empty user id");
    if (r.page_title.empty()) throw ParseError(source, lineno, "empty page title");
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------

ExpectedEdgeCounts expected_edge_counts(std::size_t n_benign, std::size_t n_fraud,
                                        const PlantedGraphParams& params) {
  ExpectedEdgeCounts out;
  const std::size_t blocks = std::max<std::size_t>(params.benign_blocks, 1);
  double within_pairs = 0.0;
  double total_pairs = 0.5 * static_cast<double>(n_benign) * static_cast<double>(n_benign - 1);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * n_benign / blocks;
    const std::size_t hi = (b + 1) * n_benign / blocks;
    const double size = static_cast<double>(hi - lo);
    within_pairs += 0.5 * size * (size - 1.0);
  }
  const double cross_pairs = total_pairs - within_pairs;
  const double fraud_links = static_cast<double>(n_fraud * params.fraud_out_degree);
  out.positive = params.within_block_positive * within_pairs +
                 (1.0 - params.fraud_negative_fraction) * fraud_links;
  out.negative = params.cross_block_negative * cross_pairs +
                 params.fraud_negative_fraction * fraud_links;
  return out;
}

SignedGraph generate_planted_graph(std::size_t n_benign, std::size_t n_fraud,
                                   const PlantedGraphParams& params, std::uint64_t seed) {
  if (n_benign < 1 || n_fraud < 1) throw PreconditionError("n_benign and n_fraud must be >= 1");
  for (const double p : {params.within_block_positive, params.cross_block_negative,
                         params.fraud_negative_fraction}) {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("probabilities must lie in [0, 1]");
  }
  if (params.benign_blocks < 1 || params.benign_blocks > n_benign) {
    throw PreconditionError("benign_blocks must lie in [1, n_benign]");
  }
  if (params.fraud_out_degree > n_benign) {
    throw PreconditionError("fraud_out_degree exceeds the number of benign targets");
  }
  const auto expected = expected_edge_counts(n_benign, n_fraud, params);
  const double mean_degree =
      2.0 * (expected.positive + expected.negative) / static_cast<double>(n_benign + n_fraud);
  if (mean_degree < 1.0) {
    throw PreconditionError("degenerate generator config: expected degree " +
                            std::to_string(mean_degree) + " < 1");
  }

  Rng rng(seed);
  const std::size_t n = n_benign + n_fraud;
  const std::size_t blocks = params.benign_blocks;
  std::vector<std::size_t> block_of(n_benign);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t u = b * n_benign / blocks; u < (b + 1) * n_benign / blocks; ++u) block_of[u] = b;
  }

  std::vector<SignedEdge> edges;
  edges.reserve(static_cast<std::size_t>(expected.positive + expected.negative) + 16);
  for (std::size_t u = 0; u < n_benign; ++u) {
    for (std::size_t v = u + 1; v < n_benign; ++v) {
      const bool same = block_of[u] == block_of[v];
      const double p = same ? params.within_block_positive : params.cross_block_negative;
      if (rng.bernoulli(p)) {
        edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v),
                         same ? Sign::positive : Sign::negative});
      }
    }
  }
  std::vector<NodeId> victims;
  for (std::size_t f = 0; f < n_fraud; ++f) {
    const auto fraud = static_cast<NodeId>(n_benign + f);
    // Floyd's algorithm: distinct sample of size d from n_benign without a full shuffle.
    victims.clear();
    std::unordered_set<NodeId> chosen;
    chosen.reserve(params.fraud_out_degree * 2);
    for (std::size_t j = n_benign - params.fraud_out_degree; j < n_benign; ++j) {
      auto t = static_cast<NodeId>(rng.below(j + 1));
      if (!chosen.insert(t).second) {
        t = static_cast<NodeId>(j);
        chosen.insert(t);
      }
      victims.push_back(t);
    }
    for (const NodeId v : victims) {
      const Sign s = rng.bernoulli(params.fraud_negative_fraction) ? Sign::negative : Sign::positive;
      edges.push_back({fraud, v, s});
    }
  }

  std::vector<NodeLabel> labels(n, NodeLabel::benign);
  for (std::size_t f = 0; f < n_fraud; ++f) labels[n_benign + f] = NodeLabel::fraud;

  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(perm));
  return SignedGraph::from_edges(n, edges).with_labels(std::move(labels)).permuted(perm);
}

}  // namespace signet
