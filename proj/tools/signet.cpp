// signet: spectral fraud detection on signed graphs.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "signet/checkpoint.hpp"
#include "signet/cnn.hpp"
#include "signet/dae.hpp"
#include "signet/error.hpp"
#include "signet/harness.hpp"
#include "signet/random.hpp"

using namespace signet;

namespace {

struct Overrides {
  std::string config;
  std::string edges;
  std::string labels;
  std::string edit_log;
  std::optional<std::size_t> k;
  std::optional<double> ratio;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::string input_mode;
  std::string algo;
  bool no_stratify = false;
  bool no_timing = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--edges", o.edges, "signed edge list (u v sign)")->check(CLI::ExistingFile);
  cmd->add_option("--labels", o.labels, "node labels (node 0|1)")->check(CLI::ExistingFile);
  cmd->add_option("--edit-log", o.edit_log, "tab-separated edit log (user, page, reverted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--k", o.k, "spectral dimension");
  cmd->add_option("--seed", o.seed, "master seed");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.edit_log.empty()) {
    c.source.kind = GraphSource::Kind::edit_log;
    c.source.edit_log = o.edit_log;
  } else if (!o.edges.empty()) {
    c.source.kind = GraphSource::Kind::edge_list;
    c.source.edges = o.edges;
  }
  if (!o.labels.empty()) c.source.labels = o.labels;
  if (c.source.kind != GraphSource::Kind::generator && c.source.labels.empty()) {
    throw PreconditionError("--labels is required with a file graph source");
  }
  if (o.k) c.ks = {*o.k};
  if (o.ratio) c.ratios = {*o.ratio};
  if (o.runs) c.runs = *o.runs;
  if (o.seed) c.seed = *o.seed;
  if (!o.input_mode.empty()) c.input_modes = {parse_feature_mode(o.input_mode)};
  if (!o.algo.empty()) {
    c.algorithms.clear();
    std::stringstream ss(o.algo);
    std::string a;
    while (std::getline(ss, a, ',')) c.algorithms.push_back(parse_algorithm(a));
  }
  if (o.no_stratify) c.stratify = false;
  if (o.no_timing) c.timing = false;
  c.validate();
  return c;
}

FeatureTable features_for(const LabeledGraph& lg, const ExperimentConfig& c, FeatureMode mode, std::size_t k) {
  if (mode == FeatureMode::adjacency_row) return build_feature_table(lg.graph, SpectralEmbedding{}, c.s, mode);
  return build_feature_table(lg.graph, embed(lg.graph, k, c.eigen), c.s, mode);
}

std::size_t view_rows(FeatureMode mode, std::size_t s) {
  return mode == FeatureMode::spectral_vector || mode == FeatureMode::spectral_matrix ? 2 * s + 1 : 1;
}

RowMatrix node_matrix(const FeatureTable& t, NodeId u, std::size_t rows) {
  const auto cols = t.data.cols() / static_cast<Eigen::Index>(rows);
  return Eigen::Map<const RowMatrix>(t.data.row(u).data(), static_cast<Eigen::Index>(rows), cols);
}

int cmd_generate(std::size_t benign, std::size_t fraud, std::uint64_t seed, const std::string& edges,
                 const std::string& labels) {
  const auto g = generate_planted_graph(benign, fraud, PlantedGraphParams{}, seed);
  save_edge_list(g, edges);
  save_labels(g, labels);
  const auto st = g.stats();
  std::cout << "nodes " << st.nodes << "  edges " << st.edges << " (+" << st.positive_edges << " / -"
            << st.negative_edges << ")  fraud " << st.fraud_nodes << '\n';
  return 0;
}

int cmd_embed(const Overrides& o, const std::string& out) {
  auto c = resolve(o);
  const auto lg = load_graph(c.source, 0);
  EigenOptions opt = c.eigen;
  opt.k = c.ks.front();
  const auto emb = eigen_top_k(lg.graph, opt);
  save_embedding(emb, out);
  std::cout << "k=" << emb.k << " lanczos steps " << emb.lanczos_steps << "  lambda_1 " << emb.eigenvalues.front()
            << "  lambda_k " << emb.eigenvalues.back() << '\n';
  return 0;
}

int cmd_train(const Overrides& o, const std::string& out) {
  auto c = resolve(o);
  if (c.algorithms.size() != 1) throw PreconditionError("train needs exactly one --algo (dae or cnn)");
  const Algorithm algo = c.algorithms.front();
  if (algo != Algorithm::dae && algo != Algorithm::cnn) throw PreconditionError("train supports dae and cnn");
  const FeatureMode mode = c.input_modes.front();
  const std::size_t k = c.ks.front();
  const double ratio = c.ratios.front();
  const auto lg = load_graph(c.source, 0);
  const auto table = features_for(lg, c, mode, k);
  const auto split = stratified_split(lg.labels, ratio, derive_seed(c.seed, 0, "split"), c.stratify);
  const auto seed = derive_seed(c.seed, 0, to_string(algo));

  Checkpoint cp;
  std::vector<int> predicted;
  if (algo == Algorithm::dae) {
    dae::AutoencoderStack stack(static_cast<std::size_t>(table.data.cols()), c.dae, seed);
    std::vector<Eigen::VectorXd> all;
    for (Eigen::Index u = 0; u < table.data.rows() && static_cast<std::size_t>(u) < c.pretrain_samples; ++u) {
      all.push_back(table.data.row(u).transpose());
    }
    auto pc = c.dae_pretrain;
    pc.seed = hash_combine(seed, 1);
    dae::pretrain(stack, all, pc, c.dae.pretrain_mode);
    std::vector<dae::LabeledVector> train;
    for (NodeId u : split.train) train.push_back({table.data.row(u).transpose(), to_class(lg.labels[u])});
    auto fc = c.dae_finetune;
    fc.seed = seed;
    const auto h = dae::fine_tune(stack, train, fc);
    std::cout << "fine-tune epochs " << h.epochs_run << "  final loss " << h.train_loss.back() << '\n';
    for (NodeId u : split.test) {
      predicted.push_back(static_cast<int>(nn::argmax(dae::predict(stack, table.data.row(u).transpose()))));
    }
    cp = dae::to_checkpoint(stack, config_hash(c));
  } else {
    const auto rows = view_rows(mode, c.s);
    const auto cols = static_cast<std::size_t>(table.data.cols()) / rows;
    auto bank = rows == 1 ? cnn::ConvFilterBank::for_adjacency(cols, c.cnn.filters, c.cnn.activation, seed)
                          : cnn::ConvFilterBank(rows, cols, c.cnn, seed);
    std::vector<cnn::LabeledMatrix> train;
    for (NodeId u : split.train) train.push_back({node_matrix(table, u, rows), to_class(lg.labels[u])});
    auto tc = c.cnn_train;
    tc.seed = hash_combine(seed, 1);
    const auto h = cnn::train(bank, train, tc);
    std::cout << "epochs " << h.epochs_run << "  final loss " << h.train_loss.back() << '\n';
    for (NodeId u : split.test) {
      predicted.push_back(static_cast<int>(nn::argmax(cnn::forward(bank, node_matrix(table, u, rows)))));
    }
    cp = cnn::to_checkpoint(bank, config_hash(c));
  }
  std::vector<int> truth;
  for (NodeId u : split.test) truth.push_back(to_class(lg.labels[u]));
  cp.add_meta("input_mode", std::string(to_string(mode)));
  cp.add_meta("k", std::to_string(k));
  cp.add_meta("s", std::to_string(c.s));
  cp.add_meta("ratio", std::to_string(ratio));
  cp.add_meta("seed", std::to_string(c.seed));
  cp.add_meta("stratify", c.stratify ? "1" : "0");
  write_checkpoint(cp, out);
  std::cout << "test accuracy " << accuracy(predicted, truth) << " on " << truth.size() << " nodes\n";
  return 0;
}

int cmd_eval(const Overrides& o, const std::string& checkpoint_path) {
  auto c = resolve(o);
  const auto cp = read_checkpoint(checkpoint_path);
  const FeatureMode mode = parse_feature_mode(cp.meta_value("input_mode"));
  const std::size_t k = std::stoul(cp.meta_value("k"));
  c.s = std::stoul(cp.meta_value("s"));
  const auto lg = load_graph(c.source, 0);
  const auto table = features_for(lg, c, mode, k);
  const auto split = stratified_split(lg.labels, std::stod(cp.meta_value("ratio")),
                                      derive_seed(std::stoull(cp.meta_value("seed")), 0, "split"),
                                      cp.meta_value("stratify") == "1");
  std::vector<int> predicted, truth;
  if (cp.kind == "dae") {
    const auto stack = dae::from_checkpoint(cp);
    for (NodeId u : split.test) {
      predicted.push_back(static_cast<int>(nn::argmax(dae::predict(stack, table.data.row(u).transpose()))));
    }
  } else {
    const auto bank = cnn::from_checkpoint(cp);
    for (NodeId u : split.test) {
      predicted.push_back(
          static_cast<int>(nn::argmax(cnn::forward(bank, node_matrix(table, u, bank.input_rows())))));
    }
  }
  for (NodeId u : split.test) truth.push_back(to_class(lg.labels[u]));
  std::cout << "test accuracy " << accuracy(predicted, truth) << " on " << truth.size() << " nodes\n";
  return 0;
}

int cmd_experiment(const Overrides& o, const std::string& csv, const std::string& table) {
  auto c = resolve(o);
  ProgressFn progress;
  if (!o.quiet) progress = [](const std::string& m) { std::cerr << m << '\n'; };
  const auto report = run_experiment(c, progress);
  if (csv.empty() || csv == "-") {
    report.write_csv(std::cout);
  } else {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv);
    report.write_csv(out);
  }
  if (!table.empty()) {
    std::ofstream out(table);
    if (!out) throw Error("cannot write " + table);
    report.write_table(out);
  } else {
    report.write_table(std::cerr);
  }
  return report.complete() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signet: fraud detection from signed-graph spectral coordinates"};
  app.require_subcommand(1);

  Overrides o;
  std::string out, csv, table, checkpoint;
  std::size_t benign = 1000, fraud = 1000;
  std::uint64_t gen_seed = 1;

  auto* gen = app.add_subcommand("generate", "write a synthetic labeled signed graph");
  gen->add_option("--benign", benign, "benign node count");
  gen->add_option("--fraud", fraud, "fraud node count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--edges", out, "output edge list")->required();
  gen->add_option("--labels", table, "output labels")->required();

  auto* emb = app.add_subcommand("embed", "compute top-k adjacency eigenvectors");
  add_common(emb, o);
  emb->add_option("--out", out, "embedding output (node<TAB>coordinates)")->required();

  auto* train = app.add_subcommand("train", "train one DAE or CNN model and write a checkpoint");
  add_common(train, o);
  train->add_option("--algo", o.algo, "dae or cnn")->required();
  train->add_option("--input-mode", o.input_mode, "spectral-vector | spectral-matrix | adjacency-row | alpha-only");
  train->add_option("--ratio", o.ratio, "training split percent");
  train->add_flag("--no-stratify", o.no_stratify, "plain random split");
  train->add_option("--out", out, "checkpoint path")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on its held-out split");
  add_common(eval, o);
  eval->add_option("--checkpoint", checkpoint, "checkpoint from `signet train`")->required()->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "run the accuracy grid and report means over runs");
  add_common(exp, o);
  exp->add_option("--ratio", o.ratio, "single training split percent");
  exp->add_option("--runs", o.runs, "runs per cell");
  exp->add_option("--input-mode", o.input_mode, "input mode");
  exp->add_option("--algo", o.algo, "comma-separated algorithms (dae,cnn,knn,svm)");
  exp->add_flag("--no-stratify", o.no_stratify, "plain random split");
  exp->add_flag("--no-timing", o.no_timing, "write epoch_seconds as 0 for byte-stable reports");
  exp->add_flag("-q,--quiet", o.quiet, "no progress on stderr");
  exp->add_option("--csv", csv, "CSV output (default stdout)");
  exp->add_option("--table", table, "aligned table output (default stderr)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(benign, fraud, gen_seed, out, table);
    if (emb->parsed()) return cmd_embed(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, checkpoint);
    if (exp->parsed()) return cmd_experiment(o, csv, table);
  } catch (const std::exception& e) {
    std::cerr << "signet: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
