#pragma once

// Model checkpoint file, shared by every trainable model.
//
//   signet-checkpoint 1
//   kind <model kind>
//   config-hash <16 hex digits>
//   meta <key> <value>            (zero or more)
//   tensor <name> <rows> <cols>   (zero or more, each followed by `rows` lines of
//   <hex-float> ...                `cols` C99 hexadecimal floats)
//   end
//
// Hexadecimal floats make save -> load bit-exact.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace signet {

struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
};

struct Checkpoint {
  std::string kind;
  std::uint64_t config_hash = 0;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<Tensor> tensors;

  void add_meta(std::string key, std::string value);
  const std::string& meta_value(const std::string& key) const;
  void add_tensor(std::string name, const Eigen::MatrixXd& m);
  Eigen::MatrixXd tensor(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace signet
