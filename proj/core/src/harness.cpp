#include "signet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include "signet/error.hpp"
#include "signet/random.hpp"

namespace signet {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dae: return "dae";
    case Algorithm::cnn: return "cnn";
    case Algorithm::knn: return "knn";
    case Algorithm::svm: return "svm";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "dae") return Algorithm::dae;
  if (text == "cnn") return Algorithm::cnn;
  if (text == "knn") return Algorithm::knn;
  if (text == "svm") return Algorithm::svm;
  throw PreconditionError("unknown algorithm '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

Split stratified_split(std::span<const NodeLabel> labels, double ratio_percent, std::uint64_t seed,
                       bool stratify) {
  if (!(ratio_percent > 0.0 && ratio_percent < 100.0)) {
    throw PreconditionError("split ratio must lie in (0, 100)");
  }
  const std::size_t n = labels.size();
  std::vector<NodeId> by_class[2];
  for (std::size_t u = 0; u < n; ++u) by_class[to_class(labels[u])].push_back(static_cast<NodeId>(u));
  if (by_class[0].empty() || by_class[1].empty()) throw PreconditionError("split needs both classes present");

  const auto total = static_cast<std::size_t>(std::llround(ratio_percent * static_cast<double>(n) / 100.0));
  Rng rng(seed);
  Split split;
  if (stratify) {
    std::size_t quota[2];
    double remainder[2];
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
      const double exact = ratio_percent * static_cast<double>(by_class[c].size()) / 100.0;
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      remainder[c] = exact - static_cast<double>(quota[c]);
      assigned += quota[c];
    }
    while (assigned < total) {
      const int c = remainder[1] > remainder[0] ? 1 : 0;
      ++quota[c];
      remainder[c] = -1.0;
      ++assigned;
    }
    for (int c = 0; c < 2; ++c) {
      if (quota[c] == 0 || quota[c] >= by_class[c].size()) {
        throw PreconditionError("split ratio " + std::to_string(ratio_percent) +
                                "% leaves a class without training or test nodes");
      }
      auto& ids = by_class[c];
      rng.shuffle(std::span<NodeId>(ids));
      split.train.insert(split.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(quota[c]));
      split.test.insert(split.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(quota[c]), ids.end());
    }
  } else {
    std::vector<NodeId> ids(n);
    for (std::size_t u = 0; u < n; ++u) ids[u] = static_cast<NodeId>(u);
    rng.shuffle(std::span<NodeId>(ids));
    split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(total));
    split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(total), ids.end());
    bool seen[2] = {false, false};
    for (NodeId u : split.train) seen[to_class(labels[u])] = true;
    if (!seen[0] || !seen[1] || split.test.empty()) {
      throw PreconditionError("split ratio " + std::to_string(ratio_percent) +
                              "% leaves a class without training nodes");
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) throw ShapeError("prediction and truth lengths differ");
  if (truth.empty()) throw PreconditionError("accuracy needs at least one prediction");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------------------

bool ExperimentReport::complete() const {
  return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed; });
}

const ReportRow* ExperimentReport::find(Algorithm algorithm, FeatureMode mode, double ratio,
                                        std::size_t k) const {
  for (const auto& r : rows) {
    if (r.algorithm == algorithm && r.input_mode == mode && r.ratio == ratio && r.k == k) return &r;
  }
  return nullptr;
}

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string ratio_text(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

}  // namespace

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "algorithm,input_mode,ratio,k,mean_acc,std_acc,epoch_seconds\n";
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << ',' << to_string(r.input_mode) << ',' << ratio_text(r.ratio) << ','
        << r.k << ',' << fixed(r.mean_accuracy, 6) << ',' << fixed(r.std_accuracy, 6) << ','
        << fixed(r.epoch_seconds, 6) << '\n';
  }
}

void ExperimentReport::write_table(std::ostream& out) const {
  const std::vector<std::string> header = {"algorithm", "input", "ratio%", "k", "mean", "std", "epoch_s"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::string(to_string(r.algorithm)), std::string(to_string(r.input_mode)),
                     ratio_text(r.ratio), std::to_string(r.k), fixed(r.mean_accuracy, 4),
                     fixed(r.std_accuracy, 4), fixed(r.epoch_seconds, 4)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto pad = std::string(width[c] - row[c].size(), ' ');
      // text columns left-aligned, numbers right-aligned
      if (c < 2) out << row[c] << pad;
      else out << pad << row[c];
      out << (c + 1 < row.size() ? "  " : "\n");
    }
  };
  emit(header);
  std::size_t rule = 2 * (header.size() - 1);
  for (auto w : width) rule += w;
  out << std::string(rule, '-') << '\n';
  for (const auto& row : cells) emit(row);
  for (const auto& r : rows) {
    if (r.failed) out << "failed: " << to_string(r.algorithm) << ' ' << to_string(r.input_mode) << ' '
                      << ratio_text(r.ratio) << "% k=" << r.k << ": " << r.error << '\n';
  }
}

// ---------------------------------------------------------------------------

LabeledGraph load_graph(const GraphSource& source, std::size_t run) {
  LabeledGraph out;
  switch (source.kind) {
    case GraphSource::Kind::generator:
      out.graph = generate_planted_graph(source.benign, source.fraud, source.planted, source.graph_seed + run);
      out.labels = out.graph.labels();
      break;
    case GraphSource::Kind::edge_list:
      out.graph = load_edge_list(source.edges);
      out.labels = load_labels(out.graph, source.labels);
      break;
    case GraphSource::Kind::edit_log: {
      const auto records = load_edit_log(source.edit_log);
      out.graph = build_coedit_graph(records);
      out.labels = load_labels(out.graph, source.labels);
      break;
    }
  }
  return out;
}

SpectralEmbedding embed(const SignedGraph& graph, std::size_t k, const EigenOptions& options) {
  EigenOptions o = options;
  o.k = k;
  return normalize_coordinates(eigen_top_k(graph, o));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CellResult {
  std::vector<int> predictions;
  double epoch_seconds = 0.0;
};

struct RunContext {
  const ExperimentConfig& config;
  const FeatureTable& table;
  const Split& split;
  const std::vector<int>& truth;
  std::uint64_t seed;
};

Eigen::VectorXd feature_vector(const FeatureTable& t, NodeId u) { return t.data.row(u).transpose(); }

std::size_t cnn_rows(const FeatureTable& t, std::size_t s) {
  switch (t.mode) {
    case FeatureMode::spectral_vector:
    case FeatureMode::spectral_matrix: return 2 * s + 1;
    default: return 1;
  }
}

CellResult run_dae(const RunContext& ctx, const dae::AutoencoderStack& pretrained) {
  dae::AutoencoderStack stack = pretrained;
  std::vector<dae::LabeledVector> train;
  train.reserve(ctx.split.train.size());
  for (NodeId u : ctx.split.train) train.push_back({feature_vector(ctx.table, u), ctx.truth[u]});
  nn::TrainConfig tc = ctx.config.dae_finetune;
  tc.seed = ctx.seed;
  const auto history = dae::fine_tune(stack, train, tc);
  Eigen::MatrixXd x(ctx.table.data.cols(), static_cast<Eigen::Index>(ctx.split.test.size()));
  for (std::size_t j = 0; j < ctx.split.test.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = feature_vector(ctx.table, ctx.split.test[j]);
  }
  const Eigen::MatrixXd probs = dae::predict_batch(stack, x);
  CellResult out;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    out.predictions.push_back(static_cast<int>(nn::argmax(probs.col(j))));
  }
  out.epoch_seconds = history.seconds_per_epoch;
  return out;
}

CellResult run_cnn(const RunContext& ctx) {
  const auto& t = ctx.table;
  const std::size_t rows = cnn_rows(t, ctx.config.s);
  const std::size_t cols = static_cast<std::size_t>(t.data.cols()) / rows;
  cnn::ConvFilterBank bank;
  if (rows == 1) {
    bank = cnn::ConvFilterBank::for_adjacency(cols, ctx.config.cnn.filters, ctx.config.cnn.activation,
                                              ctx.seed, ctx.config.cnn.classes);
  } else {
    bank = cnn::ConvFilterBank(rows, cols, ctx.config.cnn, ctx.seed);
  }
  auto sample = [&](NodeId u) {
    return RowMatrix(Eigen::Map<const RowMatrix>(t.data.row(u).data(), static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols)));
  };
  std::vector<cnn::LabeledMatrix> train;
  train.reserve(ctx.split.train.size());
  for (NodeId u : ctx.split.train) train.push_back({sample(u), ctx.truth[u]});
  nn::TrainConfig tc = ctx.config.cnn_train;
  tc.seed = hash_combine(ctx.seed, 1);
  const auto history = cnn::train(bank, train, tc);
  CellResult out;
  for (NodeId u : ctx.split.test) out.predictions.push_back(static_cast<int>(nn::argmax(cnn::forward(bank, sample(u)))));
  out.epoch_seconds = history.seconds_per_epoch;
  return out;
}

std::vector<Eigen::VectorXd> gather(const FeatureTable& t, std::span<const NodeId> ids) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(ids.size());
  for (NodeId u : ids) out.push_back(feature_vector(t, u));
  return out;
}

CellResult run_knn(const RunContext& ctx) {
  const auto t0 = Clock::now();
  const auto points = gather(ctx.table, ctx.split.train);
  std::vector<int> labels;
  for (NodeId u : ctx.split.train) labels.push_back(ctx.truth[u]);
  const KnnModel model(points, labels, ctx.config.knn_k);
  CellResult out;
  out.epoch_seconds = seconds_since(t0);
  out.predictions = knn_predict(model, gather(ctx.table, ctx.split.test));
  return out;
}

CellResult run_svm(const RunContext& ctx) {
  const auto t0 = Clock::now();
  const auto points = gather(ctx.table, ctx.split.train);
  std::vector<int> labels;
  for (NodeId u : ctx.split.train) labels.push_back(ctx.truth[u]);
  const SvmModel model = svm_train(points, labels, ctx.config.svm);
  CellResult out;
  out.epoch_seconds = seconds_since(t0);
  out.predictions = svm_predict(model, gather(ctx.table, ctx.split.test));
  return out;
}

std::string cell_tag(FeatureMode mode, std::size_t k) {
  return std::string(to_string(mode)) + ":k" + std::to_string(k);
}

struct Accumulator {
  std::vector<double> accuracies;
  double seconds = 0.0;
  std::optional<std::string> error;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  // row layout: mode, k, algorithm, ratio; adjacency input appears once with k = 0
  struct Cell {
    FeatureMode mode;
    std::size_t k;
    Algorithm algorithm;
    double ratio;
  };
  std::vector<Cell> cells;
  std::vector<std::pair<FeatureMode, std::size_t>> inputs;
  for (const auto mode : config.input_modes) {
    if (mode == FeatureMode::adjacency_row) {
      inputs.emplace_back(mode, 0);
    } else {
      for (const auto k : config.ks) inputs.emplace_back(mode, k);
    }
  }
  for (const auto& [mode, k] : inputs) {
    for (const auto a : config.algorithms) {
      for (const auto r : config.ratios) cells.push_back({mode, k, a, r});
    }
  }
  std::vector<Accumulator> acc(cells.size());
  auto fail_matching = [&](auto&& pred, const std::string& msg) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (pred(cells[c]) && !acc[c].error) acc[c].error = msg;
    }
  };

  std::optional<LabeledGraph> fixed_graph;
  for (std::size_t run = 0; run < config.runs; ++run) {
    say("run " + std::to_string(run + 1) + "/" + std::to_string(config.runs));
    LabeledGraph lg;
    try {
      if (config.source.kind == GraphSource::Kind::generator) {
        lg = load_graph(config.source, run);
      } else {
        if (!fixed_graph) fixed_graph = load_graph(config.source, 0);
        lg = *fixed_graph;
      }
    } catch (const std::exception& e) {
      fail_matching([](const Cell&) { return true; }, std::string("graph: ") + e.what());
      continue;
    }
    std::vector<int> truth(lg.labels.size());
    for (std::size_t u = 0; u < truth.size(); ++u) truth[u] = to_class(lg.labels[u]);

    std::map<double, Split> splits;
    for (const auto r : config.ratios) {
      try {
        splits.emplace(r, stratified_split(lg.labels, r, derive_seed(config.seed, run, "split:" + ratio_text(r)),
                                           config.stratify));
      } catch (const std::exception& e) {
        fail_matching([&](const Cell& c) { return c.ratio == r; }, std::string("split: ") + e.what());
      }
    }

    std::map<std::size_t, SpectralEmbedding> embeddings;
    for (const auto& [mode, k] : inputs) {
      auto matches_input = [&, mode = mode, k = k](const Cell& c) { return c.mode == mode && c.k == k; };
      FeatureTable table;
      try {
        if (mode == FeatureMode::adjacency_row) {
          table = build_feature_table(lg.graph, SpectralEmbedding{}, config.s, mode);
        } else {
          auto it = embeddings.find(k);
          if (it == embeddings.end()) {
            say("  embedding k=" + std::to_string(k));
            it = embeddings.emplace(k, embed(lg.graph, k, config.eigen)).first;
          }
          table = build_feature_table(lg.graph, it->second, config.s, mode);
        }
      } catch (const std::exception& e) {
        fail_matching(matches_input, std::string("features: ") + e.what());
        continue;
      }

      std::optional<dae::AutoencoderStack> pretrained;
      std::optional<std::string> pretrain_error;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        if (!matches_input(cell) || acc[c].error) continue;
        const auto split_it = splits.find(cell.ratio);
        if (split_it == splits.end()) continue;
        const std::string tag = std::string(to_string(cell.algorithm)) + ":" + cell_tag(mode, k) + ":" +
                                ratio_text(cell.ratio);
        say("  " + tag);
        try {
          if (cell.algorithm == Algorithm::dae && !pretrained && !pretrain_error) {
            try {
              const auto seed = derive_seed(config.seed, run, "dae-pretrain:" + cell_tag(mode, k));
              dae::AutoencoderStack stack(static_cast<std::size_t>(table.data.cols()), config.dae, seed);
              std::vector<NodeId> ids(lg.graph.node_count());
              for (std::size_t u = 0; u < ids.size(); ++u) ids[u] = static_cast<NodeId>(u);
              if (ids.size() > config.pretrain_samples) {
                Rng rng(hash_combine(seed, 7));
                rng.shuffle(std::span<NodeId>(ids));
                ids.resize(config.pretrain_samples);
              }
              const auto inputs_vec = gather(table, ids);
              nn::TrainConfig pc = config.dae_pretrain;
              pc.seed = hash_combine(seed, 1);
              dae::pretrain(stack, inputs_vec, pc, config.dae.pretrain_mode);
              pretrained = std::move(stack);
            } catch (const std::exception& e) {
              pretrain_error = std::string("pretrain: ") + e.what();
            }
          }
          if (cell.algorithm == Algorithm::dae && pretrain_error) throw Error(*pretrain_error);
          const RunContext ctx{config, table, split_it->second, truth, derive_seed(config.seed, run, tag)};
          CellResult result;
          switch (cell.algorithm) {
            case Algorithm::dae: result = run_dae(ctx, *pretrained); break;
            case Algorithm::cnn: result = run_cnn(ctx); break;
            case Algorithm::knn: result = run_knn(ctx); break;
            case Algorithm::svm: result = run_svm(ctx); break;
          }
          std::vector<int> expected;
          for (NodeId u : split_it->second.test) expected.push_back(truth[u]);
          acc[c].accuracies.push_back(accuracy(result.predictions, expected));
          acc[c].seconds += result.epoch_seconds;
        } catch (const std::exception& e) {
          acc[c].error = "run " + std::to_string(run + 1) + ": " + e.what();
        }
      }
    }
  }

  ExperimentReport report;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ReportRow row;
    row.algorithm = cells[c].algorithm;
    row.input_mode = cells[c].mode;
    row.ratio = cells[c].ratio;
    row.k = cells[c].k;
    if (acc[c].error || acc[c].accuracies.size() != config.runs) {
      row.failed = true;
      row.error = acc[c].error.value_or("incomplete runs");
      row.mean_accuracy = row.std_accuracy = row.epoch_seconds = std::nan("");
    } else {
      row.accuracies = acc[c].accuracies;
      const double n = static_cast<double>(row.accuracies.size());
      double sum = 0.0;
      for (double a : row.accuracies) sum += a;
      row.mean_accuracy = sum / n;
      double ss = 0.0;
      for (double a : row.accuracies) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
      row.std_accuracy = row.accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      row.epoch_seconds = config.timing ? acc[c].seconds / n : 0.0;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace signet
