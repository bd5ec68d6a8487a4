#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "negres/autodiff.hpp"
#include "negres/rng.hpp"
#include "negres/tensor.hpp"

namespace negres::model {

struct ResidualBlockSpec {
  std::size_t channels_in = 32;
  std::size_t channels_out = 32;
  std::size_t kernel_size = 15;
  /// Halve the length with a window-2 stride-2 max-pool ahead of both paths.
  bool subsample = false;
  double dropout_rate = 0.2;

  /// The shortcut carries a 1x1 convolution iff shapes change.
  bool needs_projection() const noexcept {
    return channels_in != channels_out || subsample;
  }
  friend bool operator==(const ResidualBlockSpec&, const ResidualBlockSpec&) = default;
};

/// Declarative Negative-ResNet backbone:
///   stem conv -> BN -> ReLU
///   5 residual blocks
///   1x1 conv -> BN -> ReLU -> flatten -> dense -> softmax
struct NetworkSpec {
  std::size_t input_length = 250;
  std::size_t n_classes = 6;
  std::size_t stem_channels = 32;
  std::size_t stem_kernel = 15;
  std::vector<ResidualBlockSpec> blocks;
  std::size_t final_channels = 64;

  /// 32 base filters, kernel 15, subsampling at blocks 2 and 4, doubling at
  /// block 5, dropout 0.2.
  static NetworkSpec standard(std::size_t n_classes = 6);
  /// Same topology with a different width and kernel size.
  static NetworkSpec scaled(std::size_t base_filters, std::size_t kernel_size,
                            std::size_t n_classes = 6, double dropout_rate = 0.2);

  /// Throws ConfigError describing the first inconsistency.
  void validate() const;

  /// Stem + two per block + final 1x1; projections are not counted.
  std::size_t conv_layer_count() const noexcept { return 2 + 2 * blocks.size(); }
  /// Feature length after the stem and after each block.
  std::vector<std::size_t> feature_lengths() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

std::string to_json(const NetworkSpec& spec);
/// Throws ParseError on malformed JSON and ConfigError on invalid fields.
NetworkSpec network_spec_from_json(const std::string& text);

struct NamedBatchNorm {
  std::string name;
  ad::BatchNormState state;
};

/// Residual CNN with its parameters and batch-norm statistics.
class Network {
 public:
  /// build_network: allocates and initializes every parameter from `rng`.
  Network(NetworkSpec spec, Rng& rng);

  const NetworkSpec& spec() const noexcept { return spec_; }

  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::vector<NamedBatchNorm>& batchnorm_states() noexcept { return norms_; }
  const std::vector<NamedBatchNorm>& batchnorm_states() const noexcept { return norms_; }
  const Parameter& parameter(const std::string& name) const;
  std::size_t parameter_count() const noexcept;

  /// Trainable forward pass: [B, 1, L] -> probabilities [B, n_classes].
  /// Train mode updates batch-norm statistics and draws dropout masks from
  /// `dropout_rng`.
  ad::Var forward(ad::Tape& tape, ad::Var input, ad::Mode mode, Rng& dropout_rng);

  /// Eval-mode probabilities; parameters are recorded as constants.
  Tensor predict_proba(const Tensor& batch) const;

  /// Disables the residual (non-shortcut) path of every block. Diagnostic
  /// only; the shortcut-only network is what a fresh model reduces to.
  void set_residual_branches(bool enabled) noexcept { residual_branches_ = enabled; }

 private:
  struct ConvRef {
    std::size_t weight, bias;
  };
  struct NormRef {
    std::size_t gamma, beta, state;
  };
  struct BlockRef {
    ConvRef conv1, conv2;
    NormRef bn1, bn2;
    bool has_projection = false;
    ConvRef projection{};
  };

  template <class Self>
  static ad::Var run(Self& self, ad::Tape& tape, ad::Var input, ad::Mode mode,
                     Rng* dropout_rng);

  std::size_t add_param(std::string name, Tensor value);
  ConvRef add_conv(const std::string& name, std::size_t cout, std::size_t cin,
                   std::size_t k, Rng& rng);
  NormRef add_norm(const std::string& name, std::size_t channels, double gamma);

  NetworkSpec spec_;
  std::vector<Parameter> params_;
  std::vector<NamedBatchNorm> norms_;
  ConvRef stem_conv_{};
  NormRef stem_bn_{};
  std::vector<BlockRef> blocks_;
  ConvRef final_conv_{};
  NormRef final_bn_{};
  std::size_t head_weight_ = 0, head_bias_ = 0;
  bool residual_branches_ = true;
};

/// Index of the largest probability in each row.
std::vector<std::size_t> argmax_rows(const Tensor& probs);

struct Confidence {
  std::size_t label;
  double probability;
};
/// Predicted class and its probability for one row.
Confidence confidence(const Tensor& probs, std::size_t row);

}  // namespace negres::model
