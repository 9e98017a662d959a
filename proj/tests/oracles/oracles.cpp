#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace oracle {

DenseEigen jacobi_eigen(Eigen::MatrixXd a, double tol, int max_sweeps) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) < tol) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  DenseEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

Eigen::MatrixXd dense_adjacency(const signet::SignedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(e.u, e.v) = a(e.v, e.u) = signet::to_int(e.sign);
  }
  return a;
}

signet::SignedGraph random_signed_graph(std::size_t n, double density, double positive_fraction,
                                        std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<signet::SignedEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (u01(gen) < density) {
        const auto sign = u01(gen) < positive_fraction ? signet::Sign::positive : signet::Sign::negative;
        edges.push_back({static_cast<signet::NodeId>(i), static_cast<signet::NodeId>(j), sign});
      }
    }
  }
  return signet::SignedGraph::from_edges(n, edges);
}

namespace {

void walk(const Eigen::MatrixXd& a, Eigen::Index at, int sign, std::size_t len, std::size_t s,
          std::vector<bool>& on_path, std::map<signet::NodeId, std::pair<std::size_t, std::set<int>>>& best) {
  for (Eigen::Index w = 0; w < a.rows(); ++w) {
    if (a(at, w) == 0.0 || on_path[static_cast<std::size_t>(w)]) continue;
    const int next_sign = sign * static_cast<int>(a(at, w));
    const auto id = static_cast<signet::NodeId>(w);
    auto it = best.find(id);
    if (it == best.end() || len + 1 < it->second.first) {
      best[id] = {len + 1, {next_sign}};
    } else if (it->second.first == len + 1) {
      it->second.second.insert(next_sign);
    }
    if (len + 1 < s) {
      on_path[static_cast<std::size_t>(w)] = true;
      walk(a, w, next_sign, len + 1, s, on_path, best);
      on_path[static_cast<std::size_t>(w)] = false;
    }
  }
}

}  // namespace

std::vector<Shell> enumerate_shells(const signet::SignedGraph& g, signet::NodeId u, std::size_t s) {
  const Eigen::MatrixXd a = dense_adjacency(g);
  std::vector<bool> on_path(g.node_count(), false);
  on_path[u] = true;
  std::map<signet::NodeId, std::pair<std::size_t, std::set<int>>> best;
  walk(a, u, 1, 0, s, on_path, best);
  std::vector<Shell> out(s);
  for (const auto& [v, info] : best) {
    if (v == u) continue;
    auto& shell = out[info.first - 1];
    if (info.second.count(1)) shell.positive.insert(v);
    else shell.negative.insert(v);
  }
  return out;
}

int knn_scan(const std::vector<Eigen::VectorXd>& points, const std::vector<int>& labels, std::size_t k,
             const Eigen::VectorXd& x) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += (points[i][j] - x[j]) * (points[i][j] - x[j]);
    d.emplace_back(std::sqrt(acc), i);
  }
  std::stable_sort(d.begin(), d.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
  std::map<int, std::pair<int, double>> votes;
  for (std::size_t r = 0; r < k; ++r) {
    auto& v = votes[labels[d[r].second]];
    v.first += 1;
    v.second += d[r].first;
  }
  int best_label = votes.begin()->first;
  for (const auto& [label, v] : votes) {
    const auto& b = votes[best_label];
    if (v.first > b.first || (v.first == b.first && v.second / v.first < b.second / b.first)) best_label = label;
  }
  return best_label;
}

double svm_decision(const std::vector<Eigen::VectorXd>& points, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& alpha, double bias, double gamma, const Eigen::VectorXd& x) {
  double f = bias;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d2 = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) d2 += (points[i][j] - x[j]) * (points[i][j] - x[j]);
    f += alpha[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)] * std::exp(-gamma * d2);
  }
  return f;
}

int signed_degree(const Eigen::MatrixXd& a, Eigen::Index u) {
  int d = 0;
  for (Eigen::Index v = 0; v < a.cols(); ++v) d += static_cast<int>(a(u, v));
  return d;
}

}  // namespace oracle
