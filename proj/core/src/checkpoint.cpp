#include "negres/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <nlohmann/json.hpp>

#include "negres/error.hpp"
#include "negres/io.hpp"

namespace negres::ckpt {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian float64");

using nlohmann::json;

constexpr const char* kFormat = "negres-tensors";
constexpr int kVersion = 1;

std::string blob_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%05zu.bin", i);
  return buf;
}

TensorMap collect(const model::Network& net) {
  TensorMap m;
  for (const auto& p : net.parameters()) m.emplace(p.name, p.value);
  for (const auto& b : net.batchnorm_states()) {
    m.emplace(b.name + ".running_mean", b.state.mean);
    m.emplace(b.name + ".running_var", b.state.var);
  }
  return m;
}

}  // namespace

void write_tensors(const TensorMap& tensors, const std::filesystem::path& dir,
                   const std::string& metadata) {
  json meta;
  try {
    meta = json::parse(metadata);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json index;
  index["format"] = kFormat;
  index["version"] = kVersion;
  index["metadata"] = meta;
  index["tensors"] = json::array();
  std::size_t i = 0;
  for (const auto& [name, t] : tensors) {
    const std::string file = blob_name(i++);
    std::string bytes(t.size() * 8, '\0');
    if (t.size() > 0) std::memcpy(bytes.data(), t.data(), bytes.size());
    io::write_file_atomic(dir / file, bytes);
    index["tensors"].push_back({{"name", name}, {"shape", t.shape()}, {"file", file}});
  }
  io::write_file_atomic(dir / "index.json", index.dump(2) + "\n");
}

TensorFile read_tensors(const std::filesystem::path& dir) {
  std::string text;
  try {
    text = io::read_file(dir / "index.json");
  } catch (const IoError& e) {
    throw CheckpointError(std::string("no checkpoint index: ") + e.what());
  }
  TensorFile out;
  try {
    const json index = json::parse(text);
    if (index.at("format").get<std::string>() != kFormat) {
      throw CheckpointError("unknown checkpoint format in " + dir.string());
    }
    if (index.at("version").get<int>() != kVersion) {
      throw CheckpointError("unsupported checkpoint version in " + dir.string());
    }
    out.metadata = index.at("metadata").dump();
    for (const auto& entry : index.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto file = entry.at("file").get<std::string>();
      if (file.find('/') != std::string::npos || file.find("..") != std::string::npos) {
        throw CheckpointError("tensor file '" + file + "' escapes the checkpoint directory");
      }
      std::string bytes;
      try {
        bytes = io::read_file(dir / file);
      } catch (const IoError& e) {
        throw CheckpointError("tensor '" + name + "': " + e.what());
      }
      Tensor t(shape);
      if (bytes.size() != t.size() * 8) {
        throw CheckpointError("tensor '" + name + "' has " + std::to_string(bytes.size()) +
                              " bytes, shape " + shape_string(shape) + " needs " +
                              std::to_string(t.size() * 8));
      }
      if (t.size() > 0) std::memcpy(t.data(), bytes.data(), bytes.size());
      if (!out.tensors.emplace(name, std::move(t)).second) {
        throw CheckpointError("duplicate tensor '" + name + "'");
      }
    }
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint index " + (dir / "index.json").string() + ": " +
                          e.what());
  }
  return out;
}

void save_network(const model::Network& net, const std::filesystem::path& dir) {
  const json meta = {{"network", json::parse(model::to_json(net.spec()))}};
  write_tensors(collect(net), dir, meta.dump());
}

namespace {

model::NetworkSpec stored_spec(const TensorFile& file) {
  try {
    return model::network_spec_from_json(json::parse(file.metadata).at("network").dump());
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint has no network spec: ") + e.what());
  } catch (const Error& e) {
    throw CheckpointError(std::string("checkpoint network spec is invalid: ") + e.what());
  }
}

void assign(model::Network& net, const TensorFile& file) {
  const TensorMap expected = collect(net);
  for (const auto& [name, t] : expected) {
    auto it = file.tensors.find(name);
    if (it == file.tensors.end()) throw CheckpointError("checkpoint lacks tensor '" + name + "'");
    if (it->second.shape() != t.shape()) {
      throw CheckpointError("tensor '" + name + "' has shape " +
                            shape_string(it->second.shape()) + ", model expects " +
                            shape_string(t.shape()));
    }
  }
  for (const auto& [name, t] : file.tensors) {
    if (!expected.count(name)) throw CheckpointError("unexpected tensor '" + name + "'");
  }
  for (auto& p : net.parameters()) {
    p.value = file.tensors.at(p.name);
    p.value.set_requires_grad(true);
  }
  for (auto& b : net.batchnorm_states()) {
    b.state.mean = file.tensors.at(b.name + ".running_mean");
    b.state.var = file.tensors.at(b.name + ".running_var");
  }
}

}  // namespace

model::Network load_network(const std::filesystem::path& dir) {
  const TensorFile file = read_tensors(dir);
  Rng unused(0);
  model::Network net(stored_spec(file), unused);
  assign(net, file);
  return net;
}

void load_into(model::Network& net, const std::filesystem::path& dir) {
  const TensorFile file = read_tensors(dir);
  if (stored_spec(file) != net.spec()) {
    throw CheckpointError("checkpoint architecture differs from the model");
  }
  assign(net, file);
}

}  // namespace negres::ckpt
