#include <algorithm>

#include "negres/autodiff.hpp"
#include "negres/error.hpp"

namespace negres::ad {

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var(nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, true});
  return Var(nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, {}, &p, true});
  return Var(nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [this](Var v) { return requires_grad(v); });
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{},
                        nullptr, needs});
  return Var(nodes_.size() - 1);
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_.at(v.index());
  if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) {
    n.grad = Tensor(n.value.shape(), 0.0);
  }
  return n.grad;
}

Tensor Tape::grad_of(Var v) const {
  const Node& n = nodes_.at(v.index());
  if (n.grad.size() != n.value.size()) return Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(value(loss).shape()));
  }
  // Buffers are re-created lazily by grad() for nodes that receive a gradient.
  for (Node& n : nodes_) n.grad = Tensor();
  if (!requires_grad(loss)) return;
  grad(loss)[0] = 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() != n.value.size()) continue;
    if (n.backward) n.backward(*this, Var(i));
    if (n.param != nullptr && n.grad.size() == n.value.size()) {
      auto dst = n.param->grad.values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

}  // namespace negres::ad
