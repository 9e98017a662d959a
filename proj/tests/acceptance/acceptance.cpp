// Acceptance suite: one PASS/FAIL line per criterion.
//
//   signet_acceptance                 all criteria
//   signet_acceptance --criterion 6   a single criterion

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "signet/baselines.hpp"
#include "signet/cnn.hpp"
#include "signet/dae.hpp"
#include "signet/features.hpp"
#include "signet/harness.hpp"
#include "signet/spectral.hpp"

using namespace signet;

namespace {

// Pinned tolerances.
constexpr double kEigenValueTol = 1e-8;
constexpr double kEigenVectorTol = 1e-8;
constexpr double kEigenGapFloor = 1e-10;
constexpr double kGradTol = 1e-4;
constexpr double kGradEps = 1e-4;
constexpr double kKinkGuard = 5e-3;
constexpr double kKktTol = 1e-3;
constexpr double kAccuracyFloor = 0.85;
constexpr double kBaselineMargin = 0.01;
constexpr double kAdjacencyMargin = 0.02;
constexpr double kStabilityRange = 0.03;
constexpr double kReferenceCnnCell = 0.8261;
constexpr double kReferenceBand = 0.02;

constexpr double kCriterion1Seconds = 5.0;
constexpr double kCriterion2Seconds = 30.0;
constexpr double kCriterion6Seconds = 600.0;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::size_t failures = 0;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures++ < 32) std::cout << "    violation: " << what << '\n';
  }
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Shared random graph family for criteria 1, 4 and 5: n <= 64, mixed densities.
SignedGraph family_graph(std::size_t i) {
  static const double densities[] = {0.03, 0.06, 0.1, 0.2, 0.4, 0.7};
  const std::size_t n = 8 + (i * 37) % 57;
  return oracle::random_signed_graph(n, densities[i % 6], 0.25 + 0.25 * static_cast<double>(i % 3), 1000 + i);
}

Outcome criterion1() {
  Outcome out;
  const auto start = Clock::now();
  std::size_t compared = 0, aligned = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto g = family_graph(i);
    const std::size_t n = g.node_count();
    EigenOptions o;
    o.k = 1 + i % std::min<std::size_t>(8, n);
    const auto emb = eigen_top_k(g, o);
    const auto ref = oracle::jacobi_eigen(oracle::dense_adjacency(g));
    for (std::size_t j = 0; j < o.k; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double want = ref.values[jj];
      ++compared;
      out.check(std::abs(emb.eigenvalues[j] - want) <= kEigenValueTol,
                "graph " + std::to_string(i) + " lambda_" + std::to_string(j) + " off by " +
                    fmt("%.3g", std::abs(emb.eigenvalues[j] - want)));
      const bool gap_above = j == 0 || ref.values[jj - 1] - want >= kEigenGapFloor;
      const bool gap_below = jj + 1 >= ref.values.size() || want - ref.values[jj + 1] >= kEigenGapFloor;
      if (!gap_above || !gap_below) continue;
      ++aligned;
      const double cos = std::abs(emb.coordinates.col(jj).dot(ref.vectors.col(jj)));
      out.check(cos >= 1.0 - kEigenVectorTol,
                "graph " + std::to_string(i) + " v_" + std::to_string(j) + " |cos| = 1 - " + fmt("%.3g", 1.0 - cos));
    }
  }
  const double secs = since(start);
  out.check(secs < kCriterion1Seconds, "runtime " + fmt("%.2f", secs) + " s");
  out.detail = std::to_string(compared) + " eigenvalues, " + std::to_string(aligned) + " isolated vectors, " +
               fmt("%.2f", secs) + " s";
  return out;
}

Outcome criterion2() {
  Outcome out;
  const auto start = Clock::now();
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  double worst_pre = 0, worst_fine = 0, worst_cnn = 0;
  const std::size_t k = 6, rows = 3;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    dae::DaeConfig dc;
    dc.hidden = {10, 5};
    dae::AutoencoderStack stack(rows * k, dc, seed);
    nn::Vector x(static_cast<Eigen::Index>(rows * k));
    for (auto& v : x) v = normal(gen);
    dae::ReconstructionModel first({&stack.encoders[0]}, {&stack.decoders[1]});
    const nn::Vector h = stack.encoders[0].forward(x);
    dae::ReconstructionModel second({&stack.encoders[1]}, {&stack.decoders[0]});
    dae::ReconstructionModel joint({&stack.encoders[0], &stack.encoders[1]}, {&stack.decoders[0], &stack.decoders[1]});
    worst_pre = std::max({worst_pre, nn::grad_check(first, x, kGradEps), nn::grad_check(second, h, kGradEps),
                          nn::grad_check(joint, x, kGradEps)});
    dae::ClassifierModel clf(stack);
    worst_fine = std::max(worst_fine, nn::grad_check(clf, dae::LabeledVector{x, static_cast<int>(seed % 2)}, kGradEps));

    cnn::CnnConfig cc;
    cc.widths = {1, 2, 3};
    cc.filters = 6;
    for (auto act : {nn::Activation::relu, nn::Activation::tanh}) {
      cc.activation = act;
      cnn::ConvFilterBank bank(rows, k, cc, seed);
      for (auto& g : bank.groups) {
        for (auto& b : g.bias) b = 0.1 * normal(gen);
      }
      cnn::LabeledMatrix s{RowMatrix(rows, k), static_cast<int>(seed % 2)};
      do {
        for (Eigen::Index i = 0; i < s.x.size(); ++i) s.x.data()[i] = normal(gen);
      } while (bank.min_abs_preactivation(s.x) < kKinkGuard);
      cnn::ConvModel model(bank);
      worst_cnn = std::max(worst_cnn, nn::grad_check(model, s, kGradEps));
    }
  }
  const double secs = since(start);
  out.check(worst_pre <= kGradTol, "pretrain max rel err " + fmt("%.3g", worst_pre));
  out.check(worst_fine <= kGradTol, "fine-tune max rel err " + fmt("%.3g", worst_fine));
  out.check(worst_cnn <= kGradTol, "cnn max rel err " + fmt("%.3g", worst_cnn));
  out.check(secs < kCriterion2Seconds, "runtime " + fmt("%.2f", secs) + " s");
  out.detail = "max rel err pretrain " + fmt("%.2g", worst_pre) + ", fine-tune " + fmt("%.2g", worst_fine) +
               ", cnn " + fmt("%.2g", worst_cnn) + ", " + fmt("%.2f", secs) + " s";
  return out;
}

Outcome criterion3() {
  Outcome out;
  std::size_t cases = 0;
  for (std::size_t s : {1u, 2u}) {
    for (std::size_t k : {10u, 30u}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = generate_planted_graph(60, 20, PlantedGraphParams{}, seed);
        EigenOptions o;
        o.k = k;
        const auto emb = normalize_coordinates(eigen_top_k(g, o));
        for (NodeId u = 0; u < g.node_count(); u += 7) {
          const auto x = build_vector_input(g, emb, u, s);
          out.check(x.size() == (2 * s + 1) * k, "vector length " + std::to_string(x.size()));
          const RowMatrix m = build_matrix_input(g, emb, u, s).matrix();
          for (std::size_t width = 1; width <= 2 * s + 1; ++width) {
            cnn::Filter f{width, RowMatrix::Constant(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(k), 0.1), 0.0};
            const auto h = cnn::convolve(f, m, nn::Activation::relu);
            out.check(static_cast<std::size_t>(h.size()) == 2 * s - width + 2,
                      "s=" + std::to_string(s) + " m=" + std::to_string(width) + " |h|=" + std::to_string(h.size()));
            ++cases;
          }
        }
      }
    }
  }
  out.detail = std::to_string(cases) + " (s, k, m, node) cases";
  return out;
}

Outcome criterion4() {
  Outcome out;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    const auto g = family_graph(i);
    EigenOptions o;
    o.k = std::min<std::size_t>(8, g.node_count());
    const auto emb = normalize_coordinates(eigen_top_k(g, o));
    for (NodeId u = 0; u < g.node_count(); ++u) {
      const auto shells = oracle::enumerate_shells(g, u, 2);
      for (std::size_t d = 1; d <= 2; ++d) {
        for (auto sign : {NeighborSign::positive, NeighborSign::negative}) {
          const auto& ids = sign == NeighborSign::positive ? shells[d - 1].positive : shells[d - 1].negative;
          Eigen::VectorXd want = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(o.k));
          for (NodeId w : ids) want += emb.row(w);
          if (!ids.empty()) want /= static_cast<double>(ids.size());
          out.check(neighbor_mean(g, emb, u, d, sign) == want,
                    "graph " + std::to_string(i) + " node " + std::to_string(u) + " step " + std::to_string(d));
          ++compared;
        }
      }
    }
  }
  out.detail = std::to_string(compared) + " neighbour means compared bitwise";
  return out;
}

void check_kkt(Outcome& out, const SvmModel& m, const std::vector<Eigen::VectorXd>& pts, const std::string& name) {
  double balance = 0.0;
  for (Eigen::Index i = 0; i < m.alpha.size(); ++i) {
    const double a = m.alpha[i];
    balance += a * m.y[i];
    const double margin = m.y[i] * oracle::svm_decision(pts, m.y, m.alpha, m.bias, m.gamma, pts[static_cast<std::size_t>(i)]);
    const bool ok = a < 0.0 || a > m.C ? false
                    : a == 0.0         ? margin >= 1.0 - kKktTol
                    : a == m.C         ? margin <= 1.0 + kKktTol
                                       : std::abs(margin - 1.0) <= kKktTol;
    out.check(ok, name + " point " + std::to_string(i) + " alpha " + fmt("%.4g", a) + " margin " + fmt("%.6f", margin));
  }
  out.check(std::abs(balance) <= 1e-9, name + " sum alpha y = " + fmt("%.3g", balance));
}

Outcome criterion5() {
  Outcome out;
  std::size_t queries = 0;
  std::mt19937_64 gen(5);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto g = family_graph(i);
    EigenOptions o;
    o.k = std::min<std::size_t>(8, g.node_count());
    const auto emb = normalize_coordinates(eigen_top_k(g, o));
    const auto table = build_feature_table(g, emb, 1, FeatureMode::spectral_vector);
    const std::size_t n = g.node_count();
    const std::size_t held = 4;
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> labels;
    for (std::size_t u = held; u < n; ++u) {
      pts.push_back(table.data.row(static_cast<Eigen::Index>(u)).transpose());
      labels.push_back(static_cast<int>(gen() % 2));
    }
    const KnnModel model(pts, labels, std::min<std::size_t>(3, pts.size()));
    for (std::size_t u = 0; u < held; ++u) {
      const Eigen::VectorXd q = table.data.row(static_cast<Eigen::Index>(u)).transpose();
      out.check(knn_predict(model, q) == oracle::knn_scan(pts, labels, model.k(), q),
                "graph " + std::to_string(i) + " query " + std::to_string(u));
      ++queries;
    }
  }

  std::size_t kkt_sets = 0;
  std::normal_distribution<double> normal;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> labels;
    for (int i = 0; i < 80; ++i) {
      Eigen::VectorXd x(4);
      for (auto& v : x) v = normal(gen);
      x[0] += i % 2 ? 1.0 : -1.0;
      pts.push_back(x);
      labels.push_back(i % 2);
    }
    SvmParams p;
    p.tol = kKktTol;
    p.C = seed % 2 ? 1.0 : 10.0;
    const auto m = svm_train(pts, labels, p);
    out.check(m.converged, "blobs " + std::to_string(seed) + " did not converge");
    check_kkt(out, m, pts, "blobs " + std::to_string(seed));
    ++kkt_sets;
  }
  {
    const auto g = generate_planted_graph(200, 200, PlantedGraphParams{}, 3);
    EigenOptions o;
    o.k = 30;
    const auto table = build_feature_table(g, normalize_coordinates(eigen_top_k(g, o)), 1, FeatureMode::spectral_vector);
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> labels;
    for (NodeId u = 0; u < g.node_count(); u += 5) {
      pts.push_back(table.data.row(u).transpose());
      labels.push_back(to_class(g.label(u)));
    }
    SvmParams p;
    p.tol = kKktTol;
    const auto m = svm_train(pts, labels, p);
    out.check(m.converged, "planted features did not converge");
    check_kkt(out, m, pts, "planted");
    ++kkt_sets;
  }

  std::vector<Eigen::VectorXd> xor_pts;
  std::vector<int> xor_labels;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      xor_pts.push_back(Eigen::Vector2d(a, b));
      xor_labels.push_back(a ^ b);
    }
  }
  SvmParams xp;
  xp.C = 100.0;
  xp.gamma = 1.0;
  const auto xm = svm_train(xor_pts, xor_labels, xp);
  const double xor_acc = accuracy(svm_predict(xm, xor_pts), xor_labels);
  out.check(xor_acc == 1.0, "XOR training accuracy " + fmt("%.2f", xor_acc));
  check_kkt(out, xm, xor_pts, "xor");
  out.detail = std::to_string(queries) + " k-NN queries, " + std::to_string(kkt_sets + 1) +
               " KKT problems, XOR accuracy " + fmt("%.2f", xor_acc);
  return out;
}

void print_rows(const ExperimentReport& report) {
  std::ostringstream table;
  report.write_table(table);
  std::istringstream lines(table.str());
  for (std::string line; std::getline(lines, line);) std::cout << "    " << line << '\n';
}

ProgressFn quiet() {
  return {};
}

double mean_of(const ExperimentReport& r, Algorithm a, FeatureMode m, double ratio, std::size_t k, Outcome& out) {
  const auto* row = r.find(a, m, ratio, k);
  if (!row || row->failed) {
    out.check(false, std::string(to_string(a)) + " " + std::string(to_string(m)) + " ratio " + fmt("%g", ratio) +
                         " missing or failed" + (row ? ": " + row->error : ""));
    return std::nan("");
  }
  return row->mean_accuracy;
}

Outcome criterion6() {
  Outcome out;
  const auto start = Clock::now();
  ExperimentConfig spectral;  // 1000 + 1000 planted nodes, graph seeds 1..10, k = 30, s = 1, 10 runs
  const auto report = run_experiment(spectral, quiet());
  print_rows(report);

  ExperimentConfig adjacency;
  adjacency.input_modes = {FeatureMode::adjacency_row};
  adjacency.algorithms = {Algorithm::cnn};
  adjacency.ratios = {5};
  const auto adj = run_experiment(adjacency, quiet());
  print_rows(adj);

  const auto vec = FeatureMode::spectral_vector;
  for (auto a : {Algorithm::dae, Algorithm::cnn}) {
    const double acc = mean_of(report, a, vec, 20, 30, out);
    out.check(acc >= kAccuracyFloor,
              "(a) " + std::string(to_string(a)) + " at 20% = " + fmt("%.4f", acc) + " < " + fmt("%.2f", kAccuracyFloor));
  }
  for (double ratio : spectral.ratios) {
    for (auto a : {Algorithm::dae, Algorithm::cnn}) {
      for (auto b : {Algorithm::knn, Algorithm::svm}) {
        const double lead = mean_of(report, a, vec, ratio, 30, out) - mean_of(report, b, vec, ratio, 30, out);
        out.check(lead >= kBaselineMargin, "(b) " + std::string(to_string(a)) + " - " + std::string(to_string(b)) +
                                               " at " + fmt("%g", ratio) + "% = " + fmt("%+.4f", lead));
      }
    }
  }
  const double spec5 = mean_of(report, Algorithm::cnn, vec, 5, 30, out);
  const double adj5 = mean_of(adj, Algorithm::cnn, FeatureMode::adjacency_row, 5, 0, out);
  out.check(spec5 - adj5 >= kAdjacencyMargin,
            "(c) spectral cnn - adjacency cnn at 5% = " + fmt("%+.4f", spec5 - adj5));
  const double secs = since(start);
  out.check(secs < kCriterion6Seconds, "runtime " + fmt("%.1f", secs) + " s");
  out.detail = fmt("%.1f s", secs);
  return out;
}

Outcome criterion7() {
  Outcome out;
  ExperimentConfig c;
  c.input_modes = {FeatureMode::spectral_vector, FeatureMode::alpha_only};
  c.algorithms = {Algorithm::dae, Algorithm::cnn};
  c.ratios = {20};
  const auto report = run_experiment(c, quiet());
  print_rows(report);
  std::string detail;
  for (auto a : c.algorithms) {
    const double with = mean_of(report, a, FeatureMode::spectral_vector, 20, 30, out);
    const double without = mean_of(report, a, FeatureMode::alpha_only, 20, 30, out);
    out.check(with - without >= 0.0, std::string(to_string(a)) + " x_u - alpha_u = " + fmt("%+.4f", with - without));
    detail += std::string(to_string(a)) + " " + fmt("%+.4f", with - without) + " ";
  }
  out.detail = detail;
  return out;
}

Outcome criterion8() {
  Outcome out;
  ExperimentConfig c;
  c.ks = {10, 20, 30, 40, 50};
  c.algorithms = {Algorithm::dae, Algorithm::cnn};
  c.ratios = {20};
  const auto report = run_experiment(c, quiet());
  print_rows(report);
  std::string detail;
  for (auto a : c.algorithms) {
    double lo = 1.0, hi = 0.0;
    for (auto k : c.ks) {
      const double acc = mean_of(report, a, FeatureMode::spectral_vector, 20, k, out);
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
    out.check(hi - lo <= kStabilityRange, std::string(to_string(a)) + " range over k = " + fmt("%.4f", hi - lo));
    detail += std::string(to_string(a)) + " range " + fmt("%.4f", hi - lo) + " ";
  }
  out.detail = detail;
  return out;
}

Outcome criterion9() {
  Outcome out;
  const char* edges = std::getenv("SIGNET_WIKI_EDGES");
  const char* labels = std::getenv("SIGNET_WIKI_LABELS");
  if (!edges || !labels) {
    out.detail = "not applicable: set SIGNET_WIKI_EDGES and SIGNET_WIKI_LABELS to a WikiEditor edge list";
    return out;
  }
  ExperimentConfig c;
  c.source.kind = GraphSource::Kind::edge_list;
  c.source.edges = edges;
  c.source.labels = labels;
  if (const char* runs = std::getenv("SIGNET_WIKI_RUNS")) c.runs = std::stoul(runs);
  c.input_modes = {FeatureMode::adjacency_row, FeatureMode::spectral_vector};

  const auto lg = load_graph(c.source, 0);
  const auto& g = lg.graph;
  const bool counts = g.node_count() == 18992 && g.edge_count() == 81316 && g.positive_edge_count() == 52139 &&
                      g.negative_edge_count() == 29177;
  if (!counts) {
    out.detail = "not applicable: dataset counts (" + std::to_string(g.node_count()) + " nodes, " +
                 std::to_string(g.positive_edge_count()) + "+/" + std::to_string(g.negative_edge_count()) +
                 "- links) differ from the reference dataset";
    return out;
  }
  const auto report = run_experiment(c, [](const std::string& m) { std::cerr << m << '\n'; });
  print_rows(report);
  out.check(report.complete(), "grid has failed cells");
  const auto* cell = report.find(Algorithm::cnn, FeatureMode::spectral_vector, 20, 30);
  if (cell && !cell->failed) {
    const double diff = cell->mean_accuracy - kReferenceCnnCell;
    std::cout << "    reported (not gated): cnn x_u 20% = " << fmt("%.4f", cell->mean_accuracy) << ", "
              << (std::abs(diff) <= kReferenceBand ? "within" : "outside") << " +-2 points of the reference cell\n";
  }
  out.detail = "full grid on the supplied dataset";
  return out;
}

Outcome criterion10() {
  Outcome out;
  ExperimentConfig c;
  c.source.benign = 150;
  c.source.fraud = 150;
  c.ks = {10};
  c.input_modes = {FeatureMode::spectral_vector, FeatureMode::spectral_matrix, FeatureMode::adjacency_row};
  c.ratios = {10, 20};
  c.runs = 2;
  c.timing = false;
  c.seed = 77;
  c.cnn.filters = 30;
  c.dae.hidden = {32, 16};
  for (auto* t : {&c.dae_pretrain, &c.dae_finetune, &c.cnn_train}) t->epochs = 5;
  auto csv = [&]() {
    std::ostringstream s;
    run_experiment(c, quiet()).write_csv(s);
    return s.str();
  };
  const auto first = csv();
  const auto second = csv();
  out.check(first == second, "CSV reports differ between identical runs");
  out.check(first.find("nan") == std::string::npos, "report has failed cells");
  out.detail = std::to_string(std::count(first.begin(), first.end(), '\n') - 1) + " rows, " +
               std::to_string(first.size()) + " bytes identical";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signet acceptance suite"};
  std::vector<int> which;
  app.add_option("--criterion,-c", which, "criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) {
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  }
  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (int c : which) {
    Outcome o;
    try {
      o = criteria[c - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
