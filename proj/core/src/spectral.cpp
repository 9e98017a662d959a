#include "signet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "signet/error.hpp"
#include "signet/random.hpp"

namespace signet {

void adjacency_multiply(const SignedGraph& graph, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const auto n = graph.node_count();
  y.resize(static_cast<Eigen::Index>(n));
  for (NodeId u = 0; u < n; ++u) {
    double acc = 0.0;
    for (const NodeId w : graph.positive_neighbors(u)) acc += x[w];
    for (const NodeId w : graph.negative_neighbors(u)) acc -= x[w];
    y[u] = acc;
  }
}

void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  const double slack = 1e-12 * std::max(peak, 1e-300);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= peak - slack) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

namespace {

double order_key(double lambda, EigenOrder order) {
  return order == EigenOrder::algebraic ? lambda : std::abs(lambda);
}

// True when a ranks strictly ahead of b.
bool ranks_before(double a, double b, EigenOrder order) {
  const double ka = order_key(a, order);
  const double kb = order_key(b, order);
  if (ka != kb) return ka > kb;
  return a > b;
}

struct RitzSet {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // n x count
  std::vector<double> estimates;
  bool converged = false;
};

class LanczosSolver {
 public:
  LanczosSolver(const SignedGraph& graph, EigenOrder order, std::size_t budget)
      : graph_(graph), order_(order), budget_(budget), n_(graph.node_count()) {}

  std::size_t steps() const { return steps_; }

  // Top `want` eigenpairs of A restricted to the orthogonal complement of `locked`.
  RitzSet run(std::size_t want, const Eigen::MatrixXd& locked, double tol) {
    const std::size_t space = n_ - static_cast<std::size_t>(locked.cols());
    want = std::min(want, space);
    RitzSet result;
    if (want == 0) {
      result.converged = true;
      result.vectors.resize(static_cast<Eigen::Index>(n_), 0);
      return result;
    }

    const auto ni = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd basis(ni, static_cast<Eigen::Index>(std::min<std::size_t>(space, std::max<std::size_t>(2 * want + 16, 64))));
    std::vector<double> alpha;
    std::vector<double> beta;
    Eigen::VectorXd q = fresh_start(basis, 0, locked);
    Eigen::VectorXd w(ni);
    double scale = 1.0;
    std::size_t next_check = std::min(space, want + 8);

    for (std::size_t j = 0;; ++j) {
      if (static_cast<Eigen::Index>(j) == basis.cols()) {
        basis.conservativeResize(Eigen::NoChange,
                                 static_cast<Eigen::Index>(std::min(space, 2 * j)));
      }
      basis.col(static_cast<Eigen::Index>(j)) = q;
      adjacency_multiply(graph_, q, w);
      ++steps_;
      project_out(w, locked);
      const double a = q.dot(w);
      alpha.push_back(a);
      w -= a * q;
      if (j > 0) w -= beta[j - 1] * basis.col(static_cast<Eigen::Index>(j - 1));
      const auto dim = j + 1;
      for (int pass = 0; pass < 2; ++pass) {
        const auto used = basis.leftCols(static_cast<Eigen::Index>(dim));
        w -= used * (used.transpose() * w);
        project_out(w, locked);
      }
      const double b = w.norm();
      scale = std::max(scale, std::abs(a) + b + (j > 0 ? beta[j - 1] : 0.0));
      const bool full = dim == space;
      const bool breakdown = b <= 1e-10 * scale;
      const bool exhausted = steps_ >= budget_;

      if (full || breakdown || exhausted || dim >= next_check) {
        extract(result, basis, alpha, beta, dim, want, full ? 0.0 : b);
        const bool ok =
            dim >= want && std::all_of(result.estimates.begin(), result.estimates.end(),
                                       [&](double e) { return e <= tol; });
        if (full || ok) {
          result.converged = true;
          return result;
        }
        if (exhausted) return result;
        next_check = std::min(space, dim + std::max<std::size_t>(8, dim / 4));
      }

      if (breakdown) {
        // Invariant subspace reached: continue the recurrence from a new direction.
        beta.push_back(0.0);
        q = fresh_start(basis, dim, locked);
      } else {
        beta.push_back(b);
        q = w / b;
      }
    }
  }

 private:
  void project_out(Eigen::VectorXd& w, const Eigen::MatrixXd& locked) const {
    if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
  }

  Eigen::VectorXd fresh_start(const Eigen::MatrixXd& basis, std::size_t used,
                              const Eigen::MatrixXd& locked) {
    const auto ni = static_cast<Eigen::Index>(n_);
    for (int tries = 0; tries < 64; ++tries) {
      Rng rng(hash_combine(hash_combine(n_, graph_.edge_count()), attempts_++));
      Eigen::VectorXd v(ni);
      for (Eigen::Index i = 0; i < ni; ++i) v[i] = rng.uniform(-1.0, 1.0);
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (used > 0) {
          const auto cols = basis.leftCols(static_cast<Eigen::Index>(used));
          v -= cols * (cols.transpose() * v);
        }
        project_out(v, locked);
      }
      const double after = v.norm();
      if (after > 1e-8 * before) return v / after;
    }
    throw ConvergenceError("Lanczos could not find a new start direction", {});
  }

  void extract(RitzSet& out, const Eigen::MatrixXd& basis, const std::vector<double>& alpha,
               const std::vector<double>& beta, std::size_t dim, std::size_t want, double b) const {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), d);
    Eigen::VectorXd sub(std::max<Eigen::Index>(d - 1, 0));
    for (Eigen::Index i = 0; i + 1 < d; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    if (d == 1) {
      Eigen::MatrixXd t(1, 1);
      t(0, 0) = diag[0];
      tri.compute(t);
    } else {
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    }
    const auto& theta = tri.eigenvalues();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
      return ranks_before(theta[x], theta[y], order_);
    });
    const std::size_t take = std::min(want, dim);
    out.values.assign(take, 0.0);
    out.estimates.assign(take, 0.0);
    Eigen::MatrixXd s(d, static_cast<Eigen::Index>(take));
    for (std::size_t i = 0; i < take; ++i) {
      const auto c = idx[i];
      out.values[i] = theta[c];
      out.estimates[i] = b * std::abs(tri.eigenvectors()(d - 1, c));
      s.col(static_cast<Eigen::Index>(i)) = tri.eigenvectors().col(c);
    }
    out.vectors = basis.leftCols(d) * s;
  }

  const SignedGraph& graph_;
  EigenOrder order_;
  std::size_t budget_;
  std::size_t n_;
  std::size_t steps_ = 0;
  std::uint64_t attempts_ = 0;
};

struct Pair {
  double value;
  Eigen::VectorXd vector;
};

std::vector<Pair> solve(const SignedGraph& graph, const EigenOptions& options, double inner_tol,
                        std::size_t budget, std::size_t& steps, bool& converged) {
  const auto n = graph.node_count();
  LanczosSolver solver(graph, options.order, budget);
  std::vector<Pair> accepted;
  Eigen::MatrixXd locked(static_cast<Eigen::Index>(n), 0);
  converged = true;

  auto absorb = [&](const RitzSet& set) {
    for (std::size_t i = 0; i < set.values.size(); ++i) {
      accepted.push_back({set.values[i], set.vectors.col(static_cast<Eigen::Index>(i))});
    }
    std::stable_sort(accepted.begin(), accepted.end(), [&](const Pair& a, const Pair& b) {
      return ranks_before(a.value, b.value, options.order);
    });
    if (accepted.size() > options.k) accepted.resize(options.k);
  };

  const RitzSet first = solver.run(options.k, locked, inner_tol);
  absorb(first);
  converged = first.converged;

  while (converged && accepted.size() < n) {
    locked.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(accepted.size()));
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      locked.col(static_cast<Eigen::Index>(i)) = accepted[i].vector;
    }
    const RitzSet extra = solver.run(options.k, locked, inner_tol);
    converged = extra.converged;
    if (extra.values.empty()) break;
    const double kth = accepted.back().value;
    const bool improves =
        accepted.size() < options.k ||
        order_key(extra.values.front(), options.order) >
            order_key(kth, options.order) + options.tol;
    if (!improves) break;
    absorb(extra);
  }
  steps = solver.steps();
  return accepted;
}

}  // namespace

SpectralEmbedding eigen_top_k(const SignedGraph& graph, const EigenOptions& options) {
  const auto n = graph.node_count();
  if (options.k < 1 || options.k > n) {
    throw PreconditionError("eigen_top_k requires 1 <= k <= n (k=" + std::to_string(options.k) +
                            ", n=" + std::to_string(n) + ")");
  }
  if (!(options.tol > 0.0)) throw PreconditionError("eigen_top_k requires tol > 0");
  const std::size_t budget = options.max_iter > 0 ? options.max_iter : 10 * n;

  double inner_tol = 0.1 * options.tol;
  std::vector<Pair> pairs;
  std::vector<double> residuals;
  std::size_t total_steps = 0;
  bool converged = false;
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::size_t steps = 0;
    pairs = solve(graph, options, inner_tol, budget - std::min(budget, total_steps), steps, converged);
    total_steps += steps;

    residuals.assign(pairs.size(), 0.0);
    Eigen::VectorXd av;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto& p = pairs[i];
      p.vector.normalize();
      adjacency_multiply(graph, p.vector, av);
      p.value = p.vector.dot(av);
      residuals[i] = (av - p.value * p.vector).norm();
    }
    const bool within = std::all_of(residuals.begin(), residuals.end(),
                                    [&](double r) { return r <= options.tol; });
    if (converged && pairs.size() == options.k && within) break;
    if (!converged || total_steps >= budget) {
      throw ConvergenceError("Lanczos did not converge within " + std::to_string(budget) +
                                 " steps",
                             residuals);
    }
    inner_tol *= 0.01;
    converged = false;
  }
  if (!converged) throw ConvergenceError("Lanczos residuals exceed tolerance", residuals);

  std::stable_sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    return ranks_before(a.value, b.value, options.order);
  });
  SpectralEmbedding emb;
  emb.k = options.k;
  emb.coordinates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(options.k));
  emb.eigenvalues.resize(options.k);
  emb.residuals.resize(options.k);
  Eigen::VectorXd av;
  for (std::size_t i = 0; i < options.k; ++i) {
    Eigen::VectorXd v = pairs[i].vector;
    canonicalize_sign(v);
    emb.coordinates.col(static_cast<Eigen::Index>(i)) = v;
    emb.eigenvalues[i] = pairs[i].value;
    adjacency_multiply(graph, v, av);
    emb.residuals[i] = (av - pairs[i].value * v).norm();
  }
  emb.lanczos_steps = total_steps;
  return emb;
}

SpectralEmbedding normalize_coordinates(SpectralEmbedding embedding) {
  if (embedding.normalized) throw PreconditionError("embedding is already normalized");
  for (Eigen::Index u = 0; u < embedding.coordinates.rows(); ++u) {
    const double norm = embedding.coordinates.row(u).norm();
    if (norm > 0.0) embedding.coordinates.row(u) /= norm;
  }
  embedding.normalized = true;
  return embedding;
}

double reconstruction_residual(const SignedGraph& graph, const SpectralEmbedding& embedding) {
  if (embedding.normalized) {
    throw PreconditionError("reconstruction_residual needs unnormalized eigenvectors");
  }
  if (graph.edge_count() == 0) throw PreconditionError("adjacency matrix is zero");
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  const auto& v = embedding.coordinates;
  const Eigen::VectorXd lambda =
      Eigen::Map<const Eigen::VectorXd>(embedding.eigenvalues.data(),
                                        static_cast<Eigen::Index>(embedding.eigenvalues.size()));
  const double a_norm_sq = 2.0 * static_cast<double>(graph.edge_count());

  if (n <= 4096) {
    Eigen::MatrixXd diff = -(v * lambda.asDiagonal() * v.transpose());
    for (const auto& e : graph.edges()) {
      const double s = to_int(e.sign);
      diff(e.u, e.v) += s;
      diff(e.v, e.u) += s;
    }
    return diff.norm() / std::sqrt(a_norm_sq);
  }

  // ||A - B||^2 = ||A||^2 - 2<A, B> + ||B||^2 with B = V diag(lambda) V^T.
  double cross = 0.0;
  for (const auto& e : graph.edges()) {
    cross += 2.0 * to_int(e.sign) * (v.row(e.u).cwiseProduct(v.row(e.v)) * lambda)(0);
  }
  const Eigen::MatrixXd gram = v.transpose() * v;
  double b_norm_sq = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      b_norm_sq += lambda[i] * lambda[j] * gram(i, j) * gram(i, j);
    }
  }
  const double sq = std::max(0.0, a_norm_sq - 2.0 * cross + b_norm_sq);
  return std::sqrt(sq / a_norm_sq);
}

void save_embedding(const SpectralEmbedding& embedding, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index u = 0; u < embedding.coordinates.rows(); ++u) {
    out << u;
    for (Eigen::Index c = 0; c < embedding.coordinates.cols(); ++c) {
      out << '\t' << embedding.coordinates(u, c);
    }
    out << '\n';
  }
}

}  // namespace signet
