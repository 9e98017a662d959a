#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "signet/error.hpp"
#include "signet/harness.hpp"
#include "signet/random.hpp"

namespace signet {

ExperimentConfig::ExperimentConfig() {
  dae_pretrain.epochs = 30;
  dae_pretrain.learning_rate = 1e-3;
  dae_pretrain.batch_size = 32;
  dae_pretrain.validation_fraction = 0.1;
  dae_pretrain.early_stop_patience = 5;

  dae_finetune.epochs = 30;
  dae_finetune.learning_rate = 3e-3;
  dae_finetune.batch_size = 16;
  dae_finetune.validation_fraction = 0.1;
  dae_finetune.early_stop_patience = 10;

  cnn_train.epochs = 30;
  cnn_train.learning_rate = 3e-3;
  cnn_train.batch_size = 16;
  cnn_train.validation_fraction = 0.1;
  cnn_train.early_stop_patience = 10;
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw PreconditionError("runs must be >= 1");
  if (ratios.empty()) throw PreconditionError("at least one split ratio is required");
  for (double r : ratios) {
    if (!(r > 0.0 && r < 100.0)) throw PreconditionError("split ratios must lie in (0, 100)");
  }
  if (algorithms.empty()) throw PreconditionError("at least one algorithm is required");
  if (input_modes.empty()) throw PreconditionError("at least one input mode is required");
  if (s < 1) throw PreconditionError("s must be >= 1");
  for (auto k : ks) {
    if (k < 1) throw PreconditionError("k must be >= 1");
  }
  if (ks.empty()) throw PreconditionError("at least one k is required");
  if (knn_k < 1) throw PreconditionError("knn.k must be >= 1");
  if (pretrain_samples < 1) throw PreconditionError("dae.pretrain_samples must be >= 1");
  dae_pretrain.validate();
  dae_finetune.validate();
  cnn_train.validate();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw std::invalid_argument("not an unsigned integer");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean");
}

std::string num(double d) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, ec == std::errc() ? end : buf);
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

struct Entry {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

void add_train_entries(std::vector<Entry>& out, const std::string& prefix,
                       nn::TrainConfig ExperimentConfig::*member) {
  out.push_back({prefix + ".epochs", [=](auto& c, auto& v) { (c.*member).epochs = to_uint(v); },
                 [=](auto& c) { return std::to_string((c.*member).epochs); }});
  out.push_back({prefix + ".batch", [=](auto& c, auto& v) { (c.*member).batch_size = to_uint(v); },
                 [=](auto& c) { return std::to_string((c.*member).batch_size); }});
  out.push_back({prefix + ".lr", [=](auto& c, auto& v) { (c.*member).learning_rate = to_double(v); },
                 [=](auto& c) { return num((c.*member).learning_rate); }});
  out.push_back({prefix + ".optimizer",
                 [=](auto& c, auto& v) {
                   if (v == "adam") (c.*member).optimizer = nn::OptimizerKind::adam;
                   else if (v == "sgd") (c.*member).optimizer = nn::OptimizerKind::sgd;
                   else throw std::invalid_argument("expected adam or sgd");
                 },
                 [=](auto& c) { return std::string((c.*member).optimizer == nn::OptimizerKind::adam ? "adam" : "sgd"); }});
  out.push_back({prefix + ".patience", [=](auto& c, auto& v) { (c.*member).early_stop_patience = to_uint(v); },
                 [=](auto& c) { return std::to_string((c.*member).early_stop_patience); }});
  out.push_back({prefix + ".validation",
                 [=](auto& c, auto& v) { (c.*member).validation_fraction = to_double(v); },
                 [=](auto& c) { return num((c.*member).validation_fraction); }});
}

std::string source_kind(GraphSource::Kind k) {
  switch (k) {
    case GraphSource::Kind::generator: return "generator";
    case GraphSource::Kind::edge_list: return "edge-list";
    case GraphSource::Kind::edit_log: return "edit-log";
  }
  return "?";
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"graph",
                 [](auto& c, auto& v) {
                   if (v == "generator") c.source.kind = GraphSource::Kind::generator;
                   else if (v == "edge-list") c.source.kind = GraphSource::Kind::edge_list;
                   else if (v == "edit-log") c.source.kind = GraphSource::Kind::edit_log;
                   else throw std::invalid_argument("expected generator, edge-list or edit-log");
                 },
                 [](auto& c) { return source_kind(c.source.kind); }});
    t.push_back({"edges", [](auto& c, auto& v) { c.source.edges = v; }, [](auto& c) { return c.source.edges.string(); }});
    t.push_back({"labels", [](auto& c, auto& v) { c.source.labels = v; }, [](auto& c) { return c.source.labels.string(); }});
    t.push_back({"edit_log", [](auto& c, auto& v) { c.source.edit_log = v; },
                 [](auto& c) { return c.source.edit_log.string(); }});
    t.push_back({"benign", [](auto& c, auto& v) { c.source.benign = to_uint(v); },
                 [](auto& c) { return std::to_string(c.source.benign); }});
    t.push_back({"fraud", [](auto& c, auto& v) { c.source.fraud = to_uint(v); },
                 [](auto& c) { return std::to_string(c.source.fraud); }});
    t.push_back({"graph_seed", [](auto& c, auto& v) { c.source.graph_seed = to_uint(v); },
                 [](auto& c) { return std::to_string(c.source.graph_seed); }});
    t.push_back({"planted.within_block_positive",
                 [](auto& c, auto& v) { c.source.planted.within_block_positive = to_double(v); },
                 [](auto& c) { return num(c.source.planted.within_block_positive); }});
    t.push_back({"planted.cross_block_negative",
                 [](auto& c, auto& v) { c.source.planted.cross_block_negative = to_double(v); },
                 [](auto& c) { return num(c.source.planted.cross_block_negative); }});
    t.push_back({"planted.fraud_out_degree",
                 [](auto& c, auto& v) { c.source.planted.fraud_out_degree = to_uint(v); },
                 [](auto& c) { return std::to_string(c.source.planted.fraud_out_degree); }});
    t.push_back({"planted.fraud_negative_fraction",
                 [](auto& c, auto& v) { c.source.planted.fraud_negative_fraction = to_double(v); },
                 [](auto& c) { return num(c.source.planted.fraud_negative_fraction); }});
    t.push_back({"planted.benign_blocks",
                 [](auto& c, auto& v) { c.source.planted.benign_blocks = to_uint(v); },
                 [](auto& c) { return std::to_string(c.source.planted.benign_blocks); }});
    t.push_back({"input_mode",
                 [](auto& c, auto& v) {
                   c.input_modes.clear();
                   for (const auto& m : split_list(v)) c.input_modes.push_back(parse_feature_mode(m));
                 },
                 [](auto& c) { return join(c.input_modes, [](FeatureMode m) { return std::string(to_string(m)); }); }});
    t.push_back({"k",
                 [](auto& c, auto& v) {
                   c.ks.clear();
                   for (const auto& k : split_list(v)) c.ks.push_back(to_uint(k));
                 },
                 [](auto& c) { return join(c.ks, [](std::size_t k) { return std::to_string(k); }); }});
    t.push_back({"s", [](auto& c, auto& v) { c.s = to_uint(v); }, [](auto& c) { return std::to_string(c.s); }});
    t.push_back({"ratios",
                 [](auto& c, auto& v) {
                   c.ratios.clear();
                   for (const auto& r : split_list(v)) c.ratios.push_back(to_double(r));
                 },
                 [](auto& c) { return join(c.ratios, [](double r) { return num(r); }); }});
    t.push_back({"runs", [](auto& c, auto& v) { c.runs = to_uint(v); }, [](auto& c) { return std::to_string(c.runs); }});
    t.push_back({"algorithms",
                 [](auto& c, auto& v) {
                   c.algorithms.clear();
                   for (const auto& a : split_list(v)) c.algorithms.push_back(parse_algorithm(a));
                 },
                 [](auto& c) { return join(c.algorithms, [](Algorithm a) { return std::string(to_string(a)); }); }});
    t.push_back({"seed", [](auto& c, auto& v) { c.seed = to_uint(v); }, [](auto& c) { return std::to_string(c.seed); }});
    t.push_back({"stratify", [](auto& c, auto& v) { c.stratify = to_bool(v); },
                 [](auto& c) { return std::string(c.stratify ? "true" : "false"); }});
    t.push_back({"timing", [](auto& c, auto& v) { c.timing = to_bool(v); },
                 [](auto& c) { return std::string(c.timing ? "true" : "false"); }});
    t.push_back({"eigen.tol", [](auto& c, auto& v) { c.eigen.tol = to_double(v); },
                 [](auto& c) { return num(c.eigen.tol); }});
    t.push_back({"eigen.max_iter", [](auto& c, auto& v) { c.eigen.max_iter = to_uint(v); },
                 [](auto& c) { return std::to_string(c.eigen.max_iter); }});
    t.push_back({"eigen.order",
                 [](auto& c, auto& v) {
                   if (v == "algebraic") c.eigen.order = EigenOrder::algebraic;
                   else if (v == "magnitude") c.eigen.order = EigenOrder::magnitude;
                   else throw std::invalid_argument("expected algebraic or magnitude");
                 },
                 [](auto& c) { return std::string(c.eigen.order == EigenOrder::algebraic ? "algebraic" : "magnitude"); }});

    t.push_back({"dae.hidden",
                 [](auto& c, auto& v) {
                   c.dae.hidden.clear();
                   for (const auto& h : split_list(v)) c.dae.hidden.push_back(to_uint(h));
                 },
                 [](auto& c) { return join(c.dae.hidden, [](std::size_t h) { return std::to_string(h); }); }});
    t.push_back({"dae.activation", [](auto& c, auto& v) { c.dae.hidden_activation = nn::parse_activation(v); },
                 [](auto& c) { return std::string(nn::to_string(c.dae.hidden_activation)); }});
    t.push_back({"dae.output_activation", [](auto& c, auto& v) { c.dae.output_activation = nn::parse_activation(v); },
                 [](auto& c) { return std::string(nn::to_string(c.dae.output_activation)); }});
    t.push_back({"dae.pretrain_mode",
                 [](auto& c, auto& v) {
                   if (v == "greedy") c.dae.pretrain_mode = dae::PretrainMode::greedy;
                   else if (v == "joint") c.dae.pretrain_mode = dae::PretrainMode::joint;
                   else throw std::invalid_argument("expected greedy or joint");
                 },
                 [](auto& c) { return std::string(c.dae.pretrain_mode == dae::PretrainMode::greedy ? "greedy" : "joint"); }});
    t.push_back({"dae.pretrain_samples", [](auto& c, auto& v) { c.pretrain_samples = to_uint(v); },
                 [](auto& c) { return std::to_string(c.pretrain_samples); }});
    add_train_entries(t, "dae.pretrain", &ExperimentConfig::dae_pretrain);
    add_train_entries(t, "dae.finetune", &ExperimentConfig::dae_finetune);

    t.push_back({"cnn.filters", [](auto& c, auto& v) { c.cnn.filters = to_uint(v); },
                 [](auto& c) { return std::to_string(c.cnn.filters); }});
    t.push_back({"cnn.widths",
                 [](auto& c, auto& v) {
                   c.cnn.widths.clear();
                   for (const auto& w : split_list(v)) c.cnn.widths.push_back(to_uint(w));
                 },
                 [](auto& c) { return join(c.cnn.widths, [](std::size_t w) { return std::to_string(w); }); }});
    t.push_back({"cnn.activation", [](auto& c, auto& v) { c.cnn.activation = nn::parse_activation(v); },
                 [](auto& c) { return std::string(nn::to_string(c.cnn.activation)); }});
    add_train_entries(t, "cnn", &ExperimentConfig::cnn_train);

    t.push_back({"knn.k", [](auto& c, auto& v) { c.knn_k = to_uint(v); },
                 [](auto& c) { return std::to_string(c.knn_k); }});
    t.push_back({"svm.C", [](auto& c, auto& v) { c.svm.C = to_double(v); }, [](auto& c) { return num(c.svm.C); }});
    t.push_back({"svm.gamma", [](auto& c, auto& v) { c.svm.gamma = to_double(v); },
                 [](auto& c) { return num(c.svm.gamma); }});
    t.push_back({"svm.tol", [](auto& c, auto& v) { c.svm.tol = to_double(v); }, [](auto& c) { return num(c.svm.tol); }});
    t.push_back({"svm.max_iter", [](auto& c, auto& v) { c.svm.max_iter = to_uint(v); },
                 [](auto& c) { return std::to_string(c.svm.max_iter); }});
    return t;
  }();
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected `key = value`");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    const Entry* entry = nullptr;
    for (const auto& e : entries()) {
      if (e.key == key) entry = &e;
    }
    if (!entry) throw ParseError(source, lineno, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(source, lineno, "duplicate key '" + key + "'");
    try {
      entry->set(config, value);
    } catch (const Error& e) {
      throw ParseError(source, lineno, key + ": " + e.what());
    } catch (const std::exception& e) {
      throw ParseError(source, lineno, "bad value for " + key + ": '" + value + "'");
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string to_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(config) + "\n";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) { return hash_string(to_text(config)); }

}  // namespace signet
