#include "signet/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "signet/error.hpp"

namespace signet {

void Checkpoint::add_meta(std::string key, std::string value) {
  meta.emplace_back(std::move(key), std::move(value));
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw Error("checkpoint has no meta entry '" + key + "'");
}

void Checkpoint::add_tensor(std::string name, const Eigen::MatrixXd& m) {
  Tensor t;
  t.name = std::move(name);
  t.rows = static_cast<std::size_t>(m.rows());
  t.cols = static_cast<std::size_t>(m.cols());
  t.values.reserve(t.rows * t.cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
  }
  tensors.push_back(std::move(t));
}

Eigen::MatrixXd Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name != name) continue;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols));
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.values[r * t.cols + c];
      }
    }
    return m;
  }
  throw Error("checkpoint has no tensor '" + name + "'");
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[64];
  out << "signet-checkpoint 1\n";
  out << "kind " << checkpoint.kind << '\n';
  std::snprintf(buf, sizeof buf, "%016" PRIx64, checkpoint.config_hash);
  out << "config-hash " << buf << '\n';
  for (const auto& [k, v] : checkpoint.meta) out << "meta " << k << ' ' << v << '\n';
  for (const auto& t : checkpoint.tensors) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%a", t.values[r * t.cols + c]);
        if (c > 0) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const std::string source = path.string();
  Checkpoint cp;
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };
  if (!next_line() || line != "signet-checkpoint 1") {
    throw ParseError(source, lineno, "not a signet checkpoint (version 1)");
  }
  bool ended = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      ls >> cp.kind;
    } else if (tag == "config-hash") {
      std::string hex;
      ls >> hex;
      cp.config_hash = std::strtoull(hex.c_str(), nullptr, 16);
    } else if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls >> std::ws, value);
      cp.add_meta(key, value);
    } else if (tag == "tensor") {
      Tensor t;
      if (!(ls >> t.name >> t.rows >> t.cols)) throw ParseError(source, lineno, "bad tensor header");
      t.values.reserve(t.rows * t.cols);
      for (std::size_t r = 0; r < t.rows; ++r) {
        if (!next_line()) throw ParseError(source, lineno, "truncated tensor " + t.name);
        const char* p = line.c_str();
        for (std::size_t c = 0; c < t.cols; ++c) {
          char* end = nullptr;
          const double v = std::strtod(p, &end);
          if (end == p) throw ParseError(source, lineno, "bad value in tensor " + t.name);
          t.values.push_back(v);
          p = end;
        }
      }
      cp.tensors.push_back(std::move(t));
    } else if (tag == "end") {
      ended = true;
      break;
    } else if (!tag.empty()) {
      throw ParseError(source, lineno, "unknown record '" + tag + "'");
    }
  }
  if (!ended) throw ParseError(source, lineno, "missing end marker");
  return cp;
}

}  // namespace signet
