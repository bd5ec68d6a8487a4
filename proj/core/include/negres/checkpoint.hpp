#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "negres/model.hpp"
#include "negres/tensor.hpp"

namespace negres::ckpt {

using TensorMap = std::map<std::string, Tensor>;

/// Writes `dir/index.json` plus one raw little-endian float64 file per tensor.
/// `metadata` is stored verbatim under the index's "metadata" key and must be
/// a JSON document (use "null" for none). See docs/formats.md.
void write_tensors(const TensorMap& tensors, const std::filesystem::path& dir,
                   const std::string& metadata = "null");

struct TensorFile {
  TensorMap tensors;
  std::string metadata;
};

/// Throws CheckpointError for a missing or malformed index, a missing blob or
/// a blob whose size disagrees with its shape.
TensorFile read_tensors(const std::filesystem::path& dir);

/// Parameters plus batch-norm running statistics (`<bn>.running_mean`,
/// `<bn>.running_var`), with the network spec as metadata.
void save_network(const model::Network& net, const std::filesystem::path& dir);

/// Rebuilds the network from the stored spec.
model::Network load_network(const std::filesystem::path& dir);

/// Loads into an existing network. Throws CheckpointError when the stored
/// spec, tensor names or shapes differ from `net`.
void load_into(model::Network& net, const std::filesystem::path& dir);

}  // namespace negres::ckpt
