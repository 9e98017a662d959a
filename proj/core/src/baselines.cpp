#include "signet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "signet/error.hpp"

namespace signet {

KnnModel::KnnModel(Eigen::MatrixXd points, std::vector<int> labels, std::size_t k)
    : points_(std::move(points)), labels_(std::move(labels)), k_(k) {
  if (labels_.empty()) throw PreconditionError("k-NN needs at least one training point");
  if (static_cast<std::size_t>(points_.cols()) != labels_.size()) {
    throw ShapeError("k-NN point and label counts differ");
  }
  if (k_ < 1 || k_ > labels_.size()) {
    throw PreconditionError("k-NN k=" + std::to_string(k_) + " must lie in [1, " +
                            std::to_string(labels_.size()) + "]");
  }
}

namespace {

Eigen::MatrixXd stack(std::span<const Eigen::VectorXd> points) {
  if (points.empty()) return {};
  Eigen::MatrixXd m(points.front().size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != m.rows()) throw ShapeError("training points have inconsistent dimensions");
    m.col(static_cast<Eigen::Index>(i)) = points[i];
  }
  return m;
}

}  // namespace

KnnModel::KnnModel(std::span<const Eigen::VectorXd> points, std::span<const int> labels, std::size_t k)
    : KnnModel(stack(points), std::vector<int>(labels.begin(), labels.end()), k) {}

int knn_predict(const KnnModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.dimension()) throw ShapeError("k-NN query dimension mismatch");
  const auto n = model.size();
  std::vector<double> dist(n);
  const auto& pts = model.points();
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = pts.col(static_cast<Eigen::Index>(i)).data();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += (p[j] - x[j]) * (p[j] - x[j]);
    dist[i] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto k = model.k();
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });

  struct Tally {
    std::size_t votes = 0;
    double distance = 0.0;
  };
  std::map<int, Tally> tally;
  for (std::size_t r = 0; r < k; ++r) {
    auto& t = tally[model.labels()[order[r]]];
    ++t.votes;
    t.distance += dist[order[r]];
  }
  int best = 0;
  const Tally* best_t = nullptr;
  for (const auto& [label, t] : tally) {
    // map iteration is in ascending label order, so strict comparisons keep the smaller label
    if (!best_t || t.votes > best_t->votes ||
        (t.votes == best_t->votes &&
         t.distance / static_cast<double>(t.votes) < best_t->distance / static_cast<double>(best_t->votes))) {
      best = label;
      best_t = &t;
    }
  }
  return best;
}

std::vector<int> knn_predict(const KnnModel& model, std::span<const Eigen::VectorXd> queries) {
  std::vector<int> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(knn_predict(model, q));
  return out;
}

// ---------------------------------------------------------------------------

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

std::size_t SvmModel::support_count() const {
  return static_cast<std::size_t>((alpha.array() > 0.0).count());
}

double SvmModel::decision(const Eigen::VectorXd& x) const {
  if (x.size() != points.rows()) throw ShapeError("SVM query dimension mismatch");
  double f = bias;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    f += alpha[i] * y[i] * std::exp(-gamma * (points.col(i) - x).squaredNorm());
  }
  return f;
}

SvmModel svm_train(std::span<const Eigen::VectorXd> points, std::span<const int> labels,
                   const SvmParams& params) {
  if (points.size() != labels.size()) throw ShapeError("SVM point and label counts differ");
  if (!(params.tol > 0.0)) throw PreconditionError("SVM tolerance must be positive");
  if (!(params.C > 0.0)) throw PreconditionError("SVM C must be positive");
  const auto n = static_cast<Eigen::Index>(points.size());
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    if (l == 1) has_pos = true;
    else if (l == 0) has_neg = true;
    else throw PreconditionError("SVM labels must be 0 or 1");
  }
  if (!has_pos || !has_neg) throw PreconditionError("SVM training needs both classes");

  SvmModel m;
  m.points = stack(points);
  m.C = params.C;
  m.tol = params.tol;
  m.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, m.points.rows()));
  m.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) m.y[i] = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  const Eigen::VectorXd sq = m.points.colwise().squaredNorm().transpose();
  Eigen::MatrixXd K = m.points.transpose() * m.points;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      K(i, j) = std::exp(-m.gamma * std::max(0.0, sq[i] + sq[j] - 2.0 * K(i, j)));
    }
  }

  const double C = m.C;
  const double tau = 1e-12;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  const auto& y = m.y;
  auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  const std::size_t budget = params.max_iter ? params.max_iter
                                             : std::max<std::size_t>(100000, 100 * static_cast<std::size_t>(n));
  std::size_t iter = 0;
  for (; iter < budget; ++iter) {
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * G[t] >= gmax) {
        if (-y[t] * G[t] > gmax || i < 0) i = t;
        gmax = -y[t] * G[t];
      }
    }
    Eigen::Index j = -1;
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * G[t]);
      const double diff = gmax + y[t] * G[t];
      if (i >= 0 && diff > 0) {
        double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (a <= 0) a = tau;
        const double obj = -diff * diff / a;
        if (obj < best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < params.tol || j < 0) {
      m.converged = true;
      break;
    }

    const double Qii = K(i, i), Qjj = K(j, j), Qij = y[i] * y[j] * K(i, j);
    const double old_ai = alpha[i], old_aj = alpha[j];
    double ai = old_ai, aj = old_aj;
    if (y[i] != y[j]) {
      double quad = Qii + Qjj + 2.0 * Qij;
      if (quad <= 0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > 0) {
        if (ai > C) { ai = C; aj = C - diff; }
      } else {
        if (aj > C) { aj = C; ai = C + diff; }
      }
    } else {
      double quad = Qii + Qjj - 2.0 * Qij;
      if (quad <= 0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) { ai = C; aj = sum - C; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > C) {
        if (aj > C) { aj = C; ai = sum - C; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double dai = ai - old_ai, daj = aj - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) {
      G[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }
  }
  m.iterations = iter;

  // b is the midpoint of max F over I_up and min F over I_low, F_t = -y_t G_t
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double F = -y[t] * G[t];
    if (in_up(t)) up = std::max(up, F);
    if (in_low(t)) low = std::min(low, F);
  }
  m.bias = (up + low) / 2.0;
  m.alpha = alpha;
  return m;
}

int svm_predict(const SvmModel& model, const Eigen::VectorXd& x) {
  return model.decision(x) > 0.0 ? 1 : 0;
}

std::vector<int> svm_predict(const SvmModel& model, std::span<const Eigen::VectorXd> queries) {
  std::vector<int> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(svm_predict(model, q));
  return out;
}

}  // namespace signet
