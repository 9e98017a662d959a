#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signet/baselines.hpp"
#include "signet/cnn.hpp"
#include "signet/dae.hpp"
#include "signet/features.hpp"
#include "signet/graph.hpp"
#include "signet/nn.hpp"
#include "signet/spectral.hpp"

namespace signet {

enum class Algorithm { dae, cnn, knn, svm };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

struct GraphSource {
  enum class Kind { generator, edge_list, edit_log };
  Kind kind = Kind::generator;
  std::filesystem::path edges;   // edge_list
  std::filesystem::path labels;  // edge_list and edit_log
  std::filesystem::path edit_log;
  std::size_t benign = 1000;
  std::size_t fraud = 1000;
  PlantedGraphParams planted;
  /// Run r (0-based) draws its graph with generator seed graph_seed + r.
  std::uint64_t graph_seed = 1;
};

struct ExperimentConfig {
  GraphSource source;
  std::vector<FeatureMode> input_modes = {FeatureMode::spectral_vector};
  std::vector<std::size_t> ks = {30};
  std::size_t s = 1;
  /// Training split sizes in percent, each in (0, 100).
  std::vector<double> ratios = {5, 10, 15, 20};
  std::size_t runs = 10;
  std::vector<Algorithm> algorithms = {Algorithm::dae, Algorithm::cnn, Algorithm::knn, Algorithm::svm};
  std::uint64_t seed = 1;
  bool stratify = true;
  /// When false every epoch_seconds entry is written as 0 so reports are byte-stable.
  bool timing = true;

  EigenOptions eigen;

  dae::DaeConfig dae;
  nn::TrainConfig dae_pretrain;
  nn::TrainConfig dae_finetune;
  /// Upper bound on the unlabeled node features used for pretraining.
  std::size_t pretrain_samples = 5000;

  cnn::CnnConfig cnn;
  nn::TrainConfig cnn_train;

  std::size_t knn_k = 3;
  SvmParams svm;

  ExperimentConfig();
  void validate() const;
};

/// key = value text, one entry per line, '#' comments. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> test;
};

/// Samples round(ratio% of n) training nodes. Stratified mode allocates per-class
/// quotas by largest remainder (ties to the lower class) and requires every class to
/// receive at least one training and one test node. Both lists are sorted.
Split stratified_split(std::span<const NodeLabel> labels, double ratio_percent, std::uint64_t seed,
                       bool stratify = true);

double accuracy(std::span<const int> predictions, std::span<const int> truth);

struct ReportRow {
  Algorithm algorithm = Algorithm::dae;
  FeatureMode input_mode = FeatureMode::spectral_vector;
  double ratio = 0.0;
  /// Spectral dimension; 0 for adjacency input, which does not depend on k.
  std::size_t k = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> accuracies;
  double epoch_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  bool complete() const;
  const ReportRow* find(Algorithm algorithm, FeatureMode mode, double ratio, std::size_t k) const;
  void write_csv(std::ostream& out) const;
  void write_table(std::ostream& out) const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the algorithm x input mode x ratio x k grid for every run. A failure inside
/// one cell marks that cell failed and leaves the rest of the grid running.
ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Graph and labels for run index r of the configured source.
struct LabeledGraph {
  SignedGraph graph;
  std::vector<NodeLabel> labels;
};
LabeledGraph load_graph(const GraphSource& source, std::size_t run);

/// Normalized top-k embedding as used for features.
SpectralEmbedding embed(const SignedGraph& graph, std::size_t k, const EigenOptions& options);

}  // namespace signet
