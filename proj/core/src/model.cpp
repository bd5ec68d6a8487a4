#include "negres/model.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <type_traits>

#include "negres/error.hpp"

namespace negres::model {

using ad::Tape;
using ad::Var;

NetworkSpec NetworkSpec::standard(std::size_t n_classes) {
  return scaled(32, 15, n_classes, 0.2);
}

NetworkSpec NetworkSpec::scaled(std::size_t base_filters, std::size_t kernel_size,
                                std::size_t n_classes, double dropout_rate) {
  NetworkSpec s;
  s.n_classes = n_classes;
  s.stem_channels = base_filters;
  s.stem_kernel = kernel_size;
  // Width doubles after the fourth block; length halves at blocks 2 and 4.
  for (std::size_t i = 0; i < 5; ++i) {
    ResidualBlockSpec b;
    b.channels_in = base_filters;
    b.channels_out = i < 4 ? base_filters : 2 * base_filters;
    b.kernel_size = kernel_size;
    b.subsample = (i == 1 || i == 3);
    b.dropout_rate = dropout_rate;
    s.blocks.push_back(b);
  }
  s.final_channels = 2 * base_filters;
  return s;
}

void NetworkSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("network spec: " + m); };
  if (input_length == 0) fail("input_length must be positive");
  if (n_classes < 2) fail("n_classes must be >= 2");
  if (stem_channels == 0 || stem_kernel == 0) fail("stem needs channels and kernel");
  if (stem_kernel % 2 == 0) fail("stem kernel must be odd for same padding");
  if (final_channels == 0) fail("final_channels must be positive");
  std::size_t ch = stem_channels;
  std::size_t len = input_length;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string tag = "block " + std::to_string(i + 1) + ": ";
    if (b.channels_in != ch) {
      fail(tag + "channels_in " + std::to_string(b.channels_in) + " but previous layer has " +
           std::to_string(ch));
    }
    if (b.channels_out == 0) fail(tag + "channels_out must be positive");
    if (b.kernel_size == 0 || b.kernel_size % 2 == 0) fail(tag + "kernel must be odd");
    if (!(b.dropout_rate >= 0.0 && b.dropout_rate < 1.0)) fail(tag + "dropout in [0,1)");
    if (b.subsample) {
      if (len < 2) fail(tag + "length too short to subsample");
      len = (len - 2) / 2 + 1;
    }
    ch = b.channels_out;
  }
}

std::vector<std::size_t> NetworkSpec::feature_lengths() const {
  std::vector<std::size_t> out{input_length};
  std::size_t len = input_length;
  for (const auto& b : blocks) {
    if (b.subsample) len = ad::window_output_length(len, 2, 2);
    out.push_back(len);
  }
  return out;
}

std::string to_json(const NetworkSpec& spec) {
  nlohmann::json j;
  j["input_length"] = spec.input_length;
  j["n_classes"] = spec.n_classes;
  j["stem_channels"] = spec.stem_channels;
  j["stem_kernel"] = spec.stem_kernel;
  j["final_channels"] = spec.final_channels;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : spec.blocks) {
    j["blocks"].push_back({{"channels_in", b.channels_in},
                           {"channels_out", b.channels_out},
                           {"kernel_size", b.kernel_size},
                           {"subsample", b.subsample},
                           {"dropout_rate", b.dropout_rate}});
  }
  return j.dump(2);
}

NetworkSpec network_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("network spec JSON: ") + e.what());
  }
  NetworkSpec s;
  try {
    s.input_length = j.value("input_length", s.input_length);
    s.n_classes = j.value("n_classes", s.n_classes);
    s.stem_channels = j.value("stem_channels", s.stem_channels);
    s.stem_kernel = j.value("stem_kernel", s.stem_kernel);
    s.final_channels = j.value("final_channels", s.final_channels);
    for (const auto& jb : j.at("blocks")) {
      ResidualBlockSpec b;
      b.channels_in = jb.at("channels_in").get<std::size_t>();
      b.channels_out = jb.at("channels_out").get<std::size_t>();
      b.kernel_size = jb.at("kernel_size").get<std::size_t>();
      b.subsample = jb.at("subsample").get<bool>();
      b.dropout_rate = jb.at("dropout_rate").get<double>();
      s.blocks.push_back(b);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("network spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::size_t Network::add_param(std::string name, Tensor value) {
  params_.emplace_back(std::move(name), std::move(value));
  return params_.size() - 1;
}

Network::ConvRef Network::add_conv(const std::string& name, std::size_t cout,
                                   std::size_t cin, std::size_t k, Rng& rng) {
  // He-uniform on fan-in.
  const double bound = std::sqrt(6.0 / static_cast<double>(cin * k));
  Tensor w({cout, cin, k});
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  ConvRef r;
  r.weight = add_param(name + ".weight", std::move(w));
  r.bias = add_param(name + ".bias", Tensor({cout}, 0.0));
  return r;
}

Network::NormRef Network::add_norm(const std::string& name, std::size_t channels,
                                   double gamma) {
  NormRef r;
  r.gamma = add_param(name + ".gamma", Tensor({channels}, gamma));
  r.beta = add_param(name + ".beta", Tensor({channels}, 0.0));
  norms_.push_back({name, ad::BatchNormState(channels)});
  r.state = norms_.size() - 1;
  return r;
}

Network::Network(NetworkSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  stem_conv_ = add_conv("stem.conv", spec_.stem_channels, 1, spec_.stem_kernel, rng);
  stem_bn_ = add_norm("stem.bn", spec_.stem_channels, 1.0);
  for (std::size_t i = 0; i < spec_.blocks.size(); ++i) {
    const auto& b = spec_.blocks[i];
    const std::string p = "block" + std::to_string(i + 1);
    BlockRef r;
    r.conv1 = add_conv(p + ".conv1", b.channels_out, b.channels_in, b.kernel_size, rng);
    r.bn1 = add_norm(p + ".bn1", b.channels_out, 1.0);
    r.conv2 = add_conv(p + ".conv2", b.channels_out, b.channels_out, b.kernel_size, rng);
    // Zero gamma: every block starts as its shortcut.
    r.bn2 = add_norm(p + ".bn2", b.channels_out, 0.0);
    r.has_projection = b.needs_projection();
    if (r.has_projection) {
      r.projection = add_conv(p + ".proj", b.channels_out, b.channels_in, 1, rng);
    }
    blocks_.push_back(r);
  }
  const std::size_t last_ch =
      spec_.blocks.empty() ? spec_.stem_channels : spec_.blocks.back().channels_out;
  final_conv_ = add_conv("final.conv", spec_.final_channels, last_ch, 1, rng);
  final_bn_ = add_norm("final.bn", spec_.final_channels, 1.0);
  const std::size_t flat = spec_.final_channels * spec_.feature_lengths().back();
  const double bound = std::sqrt(3.0 / static_cast<double>(flat));
  Tensor hw({spec_.n_classes, flat});
  for (double& v : hw.values()) v = rng.uniform(-bound, bound);
  head_weight_ = add_param("head.weight", std::move(hw));
  head_bias_ = add_param("head.bias", Tensor({spec_.n_classes}, 0.0));
}

const Parameter& Network::parameter(const std::string& name) const {
  auto it = std::find_if(params_.begin(), params_.end(),
                         [&](const Parameter& p) { return p.name == name; });
  if (it == params_.end()) throw ContractError("no parameter named " + name);
  return *it;
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <class Self>
Var Network::run(Self& self, Tape& tape, Var input, ad::Mode mode, Rng* dropout_rng) {
  constexpr bool kFrozen = std::is_const_v<Self>;
  auto bind = [&](std::size_t i) -> Var {
    if constexpr (kFrozen) {
      return tape.constant(self.params_[i].value);
    } else {
      return tape.parameter(self.params_[i]);
    }
  };
  auto conv = [&](Var x, ConvRef c, std::size_t padding) {
    return ad::conv1d(tape, x, bind(c.weight), bind(c.bias), {1, padding});
  };
  auto norm = [&](Var x, NormRef n) {
    if constexpr (kFrozen) {
      return ad::batchnorm1d_eval(tape, x, bind(n.gamma), bind(n.beta),
                                  self.norms_[n.state].state);
    } else {
      return ad::batchnorm1d(tape, x, bind(n.gamma), bind(n.beta),
                             self.norms_[n.state].state, mode);
    }
  };

  const auto& spec = self.spec_;
  const Tensor& in = tape.value(input);
  if (in.rank() != 3 || in.dim(1) != 1 || in.dim(2) != spec.input_length) {
    throw DimensionError("network expects input [batch, 1, " +
                         std::to_string(spec.input_length) + "], got " +
                         shape_string(in.shape()));
  }

  Var x = conv(input, self.stem_conv_, spec.stem_kernel / 2);
  x = ad::relu(tape, norm(x, self.stem_bn_));
  for (std::size_t i = 0; i < self.blocks_.size(); ++i) {
    const auto& bs = spec.blocks[i];
    const auto& br = self.blocks_[i];
    if (bs.subsample) x = ad::maxpool1d(tape, x, 2, 2);
    Var shortcut = br.has_projection ? conv(x, br.projection, 0) : x;
    if (self.residual_branches_) {
      const std::size_t pad = bs.kernel_size / 2;
      Var f = conv(x, br.conv1, pad);
      f = ad::relu(tape, norm(f, br.bn1));
      if (mode == ad::Mode::kTrain && dropout_rng != nullptr) {
        f = ad::dropout(tape, f, bs.dropout_rate, mode, *dropout_rng);
      }
      f = norm(conv(f, br.conv2, pad), br.bn2);
      x = ad::relu(tape, ad::add(tape, f, shortcut));
    } else {
      x = ad::relu(tape, shortcut);
    }
  }
  x = ad::relu(tape, norm(conv(x, self.final_conv_, 0), self.final_bn_));
  Var logits = ad::dense(tape, ad::flatten(tape, x), bind(self.head_weight_),
                         bind(self.head_bias_));
  return ad::softmax(tape, logits);
}

Var Network::forward(Tape& tape, Var input, ad::Mode mode, Rng& dropout_rng) {
  return run(*this, tape, input, mode, &dropout_rng);
}

Tensor Network::predict_proba(const Tensor& batch) const {
  Tape tape;
  Var in = tape.constant(batch);
  Var out = run(*this, tape, in, ad::Mode::kEval, nullptr);
  return tape.value(out);
}

std::vector<std::size_t> argmax_rows(const Tensor& probs) {
  if (probs.rank() != 2) throw DimensionError("argmax_rows: expects [batch, n]");
  const std::size_t rows = probs.dim(0), n = probs.dim(1);
  std::vector<std::size_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* p = probs.data() + r * n;
    out[r] = static_cast<std::size_t>(std::max_element(p, p + n) - p);
  }
  return out;
}

Confidence confidence(const Tensor& probs, std::size_t row) {
  if (probs.rank() != 2 || row >= probs.dim(0)) {
    throw DimensionError("confidence: row out of range");
  }
  const std::size_t n = probs.dim(1);
  const double* p = probs.data() + row * n;
  const auto best = static_cast<std::size_t>(std::max_element(p, p + n) - p);
  return {best, p[best]};
}

}  // namespace negres::model
