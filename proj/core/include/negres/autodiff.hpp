#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "negres/rng.hpp"
#include "negres/tensor.hpp"

namespace negres::ad {

enum class Mode { kTrain, kEval };

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  std::size_t index() const noexcept { return index_; }
  friend bool operator==(Var, Var) = default;

 private:
  friend class Tape;
  explicit Var(std::size_t i) : index_(i) {}
  std::size_t index_ = static_cast<std::size_t>(-1);
};

class Tape;

/// Reads the gradient of `out` and adds its contribution to the inputs.
using BackwardFn = std::function<void(Tape&, Var out)>;

/// Linear record of one forward pass. Nodes are appended in evaluation order,
/// so reverse iteration is a valid topological order for backpropagation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf bound to a parameter; backward() adds into `p.grad`. The parameter
  /// must outlive the tape.
  Var parameter(Parameter& p);
  /// Leaf whose gradient is tracked on the tape but not exported.
  Var variable(Tensor value);

  /// Records an operation result. `fn` runs during backward() only when some
  /// input requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  const Tensor& value(Var v) const { return nodes_.at(v.index()).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.index()).requires_grad; }

  /// Gradient buffer of `v`, zero-filled on first access.
  Tensor& grad(Var v);
  /// Gradient of `v` from the last backward(); zeros if never touched.
  Tensor grad_of(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 and propagates to every node. Parameter
  /// gradients accumulate across calls. Throws ContractError for a
  /// non-scalar loss.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() noexcept { nodes_.clear(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Output length of a strided window op: floor((L + 2p - k) / s) + 1.
std::size_t window_output_length(std::size_t length, std::size_t window,
                                 std::size_t stride, std::size_t padding = 0);

/// input [B, Cin, L], kernel [Cout, Cin, K], bias [Cout] -> [B, Cout, Lout].
Var conv1d(Tape& tape, Var input, Var kernel, Var bias, Conv1dOptions opt = {});

/// input [B, C, L] -> [B, C, Lout]; gradient goes to the first maximal index.
Var maxpool1d(Tape& tape, Var input, std::size_t window, std::size_t stride);

/// Running statistics of one batch-norm layer.
struct BatchNormState {
  Tensor mean;
  Tensor var;
  double momentum = 0.9;
  double epsilon = 1e-5;

  explicit BatchNormState(std::size_t channels = 0)
      : mean(Shape{channels}, 0.0), var(Shape{channels}, 1.0) {}
};

/// Per-channel normalization over batch and length. Train mode uses batch
/// statistics and updates `state` (running = m * running + (1 - m) * batch);
/// eval mode uses the running statistics.
Var batchnorm1d(Tape& tape, Var input, Var gamma, Var beta, BatchNormState& state,
                Mode mode);
/// Eval-mode batch norm over frozen statistics.
Var batchnorm1d_eval(Tape& tape, Var input, Var gamma, Var beta,
                     const BatchNormState& state);

Var relu(Tape& tape, Var input);

/// Inverted dropout; identity in eval mode or when rate == 0.
Var dropout(Tape& tape, Var input, double rate, Mode mode, Rng& rng);

/// input [B, Din], weight [Dout, Din], bias [Dout] -> [B, Dout].
Var dense(Tape& tape, Var input, Var weight, Var bias);

/// Row-wise softmax of [B, n], max-subtracted.
Var softmax(Tape& tape, Var logits);

Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var x, double factor);
/// Sum of all elements, as a scalar.
Var sum(Tape& tape, Var x);
/// [B, ...] -> [B, prod(...)].
Var flatten(Tape& tape, Var x);
/// Rows of a [B, n] tensor, in the given order.
Var gather_rows(Tape& tape, Var x, std::span<const std::size_t> rows);

/// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] inside the logs.
inline constexpr double kProbFloor = 1e-12;

/// Mean over rows of -log p[row, target[row]].
Var positive_loss(Tape& tape, Var probs, std::span<const std::size_t> targets);
/// Mean over rows of -log(1 - p[row, complement[row]]).
Var negative_loss(Tape& tape, Var probs, std::span<const std::size_t> complements);

/// Momentum SGD: v := m v + g; w := w - alpha v. With m = 0 this is the plain
/// update w := w - alpha g.
class Sgd {
 public:
  /// Throws ConfigError unless alpha > 0 and 0 <= momentum < 1.
  Sgd(double alpha, double momentum = 0.9);

  void step(std::span<Parameter> params);
  void reset() { velocity_.clear(); }

  double alpha() const noexcept { return alpha_; }
  double momentum() const noexcept { return momentum_; }

 private:
  double alpha_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

/// One-shot form of Sgd::step without persistent velocity (momentum 0).
void sgd_step(std::span<Parameter> params, double alpha);

void zero_grads(std::span<Parameter> params);

}  // namespace negres::ad
