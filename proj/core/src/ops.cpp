#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "negres/autodiff.hpp"
#include "negres/error.hpp"

namespace negres::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* arg) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + arg + " must have rank " +
                         std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

void add_into(Tensor& dst, const Tensor& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

// Output positions l whose input index l * stride + k - padding is in range.
struct ValidRange {
  std::size_t begin, end;
};

ValidRange valid_range(std::size_t k, std::size_t len, std::size_t l_out,
                       Conv1dOptions opt) {
  // l * stride + k >= padding  and  l * stride + k - padding < len
  std::size_t begin = 0;
  if (opt.padding > k) begin = (opt.padding - k + opt.stride - 1) / opt.stride;
  std::size_t end = 0;
  if (len + opt.padding > k) end = (len + opt.padding - k - 1) / opt.stride + 1;
  end = std::min(end, l_out);
  begin = std::min(begin, end);
  return {begin, end};
}

// Column matrix for conv1d: row (ci, k), column (b, l).
void im2col(const Tensor& x, std::size_t k_size, std::size_t l_out, Conv1dOptions opt,
            RowMat& cols) {
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  cols.resize(static_cast<Eigen::Index>(cin * k_size),
              static_cast<Eigen::Index>(batch * l_out));
  const double* xd = x.data();
  for (std::size_t k = 0; k < k_size; ++k) {
    const auto [lo, hi] = valid_range(k, len, l_out, opt);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      double* row = cols.data() + (ci * k_size + k) * batch * l_out;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* src = xd + (b * cin + ci) * len;
        double* dst = row + b * l_out;
        std::fill(dst, dst + lo, 0.0);
        if (opt.stride == 1 && hi > lo) {
          std::copy_n(src + (lo + k - opt.padding), hi - lo, dst + lo);
        } else {
          for (std::size_t l = lo; l < hi; ++l) dst[l] = src[l * opt.stride + k - opt.padding];
        }
        std::fill(dst + hi, dst + l_out, 0.0);
      }
    }
  }
}

void col2im_add(const RowMat& cols, std::size_t k_size, std::size_t l_out,
                Conv1dOptions opt, Tensor& gx) {
  const std::size_t batch = gx.dim(0), cin = gx.dim(1), len = gx.dim(2);
  double* gd = gx.data();
  for (std::size_t k = 0; k < k_size; ++k) {
    const auto [lo, hi] = valid_range(k, len, l_out, opt);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* row = cols.data() + (ci * k_size + k) * batch * l_out;
      for (std::size_t b = 0; b < batch; ++b) {
        double* dst = gd + (b * cin + ci) * len;
        const double* src = row + b * l_out;
        for (std::size_t l = lo; l < hi; ++l) dst[l * opt.stride + k - opt.padding] += src[l];
      }
    }
  }
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

void check_targets(const Tensor& probs, std::span<const std::size_t> targets,
                   const char* op) {
  require_rank(probs, 2, op, "probs");
  if (targets.size() != probs.dim(0)) {
    throw DimensionError(std::string(op) + ": " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(probs.dim(0)) + " rows");
  }
  if (probs.dim(0) == 0) throw ContractError(std::string(op) + ": empty batch");
  for (std::size_t t : targets) {
    if (t >= probs.dim(1)) {
      throw DimensionError(std::string(op) + ": class index " + std::to_string(t) +
                           " out of range");
    }
  }
}

}  // namespace

std::size_t window_output_length(std::size_t length, std::size_t window,
                                 std::size_t stride, std::size_t padding) {
  if (stride == 0) throw ConfigError("stride must be >= 1");
  if (window == 0 || window > length + 2 * padding) {
    throw DimensionError("window " + std::to_string(window) + " does not fit length " +
                         std::to_string(length) + " with padding " +
                         std::to_string(padding));
  }
  return (length + 2 * padding - window) / stride + 1;
}

Var conv1d(Tape& tape, Var input, Var kernel, Var bias, Conv1dOptions opt) {
  const Tensor& x = tape.value(input);
  const Tensor& w = tape.value(kernel);
  const Tensor& bv = tape.value(bias);
  require_rank(x, 3, "conv1d", "input");
  require_rank(w, 3, "conv1d", "kernel");
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = w.dim(0), k_size = w.dim(2);
  if (w.dim(1) != cin) {
    throw DimensionError("conv1d: kernel expects " + std::to_string(w.dim(1)) +
                         " input channels, input has " + std::to_string(cin));
  }
  if (bv.rank() != 1 || bv.dim(0) != cout) {
    throw DimensionError("conv1d: bias shape " + shape_string(bv.shape()) +
                         " does not match " + std::to_string(cout) + " channels");
  }
  const std::size_t l_out = window_output_length(len, k_size, opt.stride, opt.padding);
  const auto n = static_cast<Eigen::Index>(batch * l_out);

  RowMat cols;
  im2col(x, k_size, l_out, opt, cols);
  ConstRowMap wm(w.data(), static_cast<Eigen::Index>(cout),
                 static_cast<Eigen::Index>(cin * k_size));
  RowMat y(static_cast<Eigen::Index>(cout), n);
  y.noalias() = wm * cols;

  Tensor out({batch, cout, l_out});
  for (std::size_t co = 0; co < cout; ++co) {
    const double* src = y.data() + co * batch * l_out;
    for (std::size_t b = 0; b < batch; ++b) {
      double* dst = out.data() + (b * cout + co) * l_out;
      for (std::size_t l = 0; l < l_out; ++l) dst[l] = src[b * l_out + l] + bv[co];
    }
  }

  return tape.record(std::move(out), {input, kernel, bias},
                     [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    RowMat dy(static_cast<Eigen::Index>(cout), n);
    for (std::size_t co = 0; co < cout; ++co) {
      double* dst = dy.data() + co * batch * l_out;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* src = g.data() + (b * cout + co) * l_out;
        std::copy(src, src + l_out, dst + b * l_out);
      }
    }
    if (t.requires_grad(bias)) {
      Tensor& gb = t.grad(bias);
      for (std::size_t co = 0; co < cout; ++co) gb[co] += dy.row(co).sum();
    }
    const Tensor& xv = t.value(input);
    if (t.requires_grad(kernel)) {
      RowMat c;
      im2col(xv, k_size, l_out, opt, c);
      Tensor& gw = t.grad(kernel);
      RowMap gwm(gw.data(), static_cast<Eigen::Index>(cout),
                 static_cast<Eigen::Index>(cin * k_size));
      gwm.noalias() += dy * c.transpose();
    }
    if (t.requires_grad(input)) {
      const Tensor& wv = t.value(kernel);
      ConstRowMap wmb(wv.data(), static_cast<Eigen::Index>(cout),
                      static_cast<Eigen::Index>(cin * k_size));
      RowMat dcols(static_cast<Eigen::Index>(cin * k_size), n);
      dcols.noalias() = wmb.transpose() * dy;
      col2im_add(dcols, k_size, l_out, opt, t.grad(input));
    }
  });
}

Var maxpool1d(Tape& tape, Var input, std::size_t window, std::size_t stride) {
  const Tensor& x = tape.value(input);
  require_rank(x, 3, "maxpool1d", "input");
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  if (window > len) {
    throw DimensionError("maxpool1d: window " + std::to_string(window) +
                         " exceeds length " + std::to_string(len));
  }
  const std::size_t l_out = window_output_length(len, window, stride);
  Tensor out({batch, ch, l_out});
  auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.size());
  for (std::size_t r = 0; r < batch * ch; ++r) {
    const double* src = x.data() + r * len;
    for (std::size_t l = 0; l < l_out; ++l) {
      std::size_t best = l * stride;
      for (std::size_t j = best + 1; j < l * stride + window; ++j) {
        if (src[j] > src[best]) best = j;
      }
      out[r * l_out + l] = src[best];
      (*argmax)[r * l_out + l] = static_cast<std::uint32_t>(r * len + best);
    }
  }
  return tape.record(std::move(out), {input}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(input);
    for (std::size_t i = 0; i < g.size(); ++i) gx[(*argmax)[i]] += g[i];
  });
}

namespace {

Var batchnorm_impl(Tape& tape, Var input, Var gamma, Var beta,
                   const BatchNormState& stats, BatchNormState* update, Mode mode) {
  const Tensor& x = tape.value(input);
  require_rank(x, 3, "batchnorm1d", "input");
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  const Tensor& gm = tape.value(gamma);
  const Tensor& bt = tape.value(beta);
  if (gm.size() != ch || bt.size() != ch || stats.mean.size() != ch ||
      stats.var.size() != ch) {
    throw DimensionError("batchnorm1d: parameters do not match " + std::to_string(ch) +
                         " channels");
  }
  const std::size_t count = batch * len;
  if (mode == Mode::kTrain && count < 2) {
    throw ContractError("batchnorm1d: degenerate batch (batch * length < 2)");
  }

  auto xhat = std::make_shared<Tensor>(x.shape());
  auto inv_std = std::make_shared<std::vector<double>>(ch);
  Tensor out(x.shape());
  for (std::size_t c = 0; c < ch; ++c) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double s = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* p = x.data() + (b * ch + c) * len;
        for (std::size_t l = 0; l < len; ++l) s += p[l];
      }
      mean = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* p = x.data() + (b * ch + c) * len;
        for (std::size_t l = 0; l < len; ++l) ss += (p[l] - mean) * (p[l] - mean);
      }
      var = ss / static_cast<double>(count);
      if (update != nullptr) {
        const double m = update->momentum;
        const double unbiased = ss / static_cast<double>(count - 1);
        update->mean[c] = m * update->mean[c] + (1.0 - m) * mean;
        update->var[c] = m * update->var[c] + (1.0 - m) * unbiased;
      }
    } else {
      mean = stats.mean[c];
      var = stats.var[c];
    }
    const double is = 1.0 / std::sqrt(var + stats.epsilon);
    (*inv_std)[c] = is;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * ch + c) * len;
      for (std::size_t l = 0; l < len; ++l) {
        const double h = (x[off + l] - mean) * is;
        (*xhat)[off + l] = h;
        out[off + l] = gm[c] * h + bt[c];
      }
    }
  }

  return tape.record(std::move(out), {input, gamma, beta}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& gmv = t.value(gamma);
    const bool want_x = t.requires_grad(input);
    Tensor* gx = want_x ? &t.grad(input) : nullptr;
    Tensor* gg = t.requires_grad(gamma) ? &t.grad(gamma) : nullptr;
    Tensor* gb = t.requires_grad(beta) ? &t.grad(beta) : nullptr;
    const double n = static_cast<double>(count);
    for (std::size_t c = 0; c < ch; ++c) {
      double sum_g = 0.0, sum_gh = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t off = (b * ch + c) * len;
        for (std::size_t l = 0; l < len; ++l) {
          sum_g += g[off + l];
          sum_gh += g[off + l] * (*xhat)[off + l];
        }
      }
      if (gg) (*gg)[c] += sum_gh;
      if (gb) (*gb)[c] += sum_g;
      if (!want_x) continue;
      const double k = gmv[c] * (*inv_std)[c];
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t off = (b * ch + c) * len;
        if (mode == Mode::kTrain) {
          for (std::size_t l = 0; l < len; ++l) {
            (*gx)[off + l] +=
                k * (g[off + l] - sum_g / n - (*xhat)[off + l] * sum_gh / n);
          }
        } else {
          for (std::size_t l = 0; l < len; ++l) (*gx)[off + l] += k * g[off + l];
        }
      }
    }
  });
}

}  // namespace

Var batchnorm1d(Tape& tape, Var input, Var gamma, Var beta, BatchNormState& state,
                Mode mode) {
  return batchnorm_impl(tape, input, gamma, beta, state, &state, mode);
}

Var batchnorm1d_eval(Tape& tape, Var input, Var gamma, Var beta,
                     const BatchNormState& state) {
  return batchnorm_impl(tape, input, gamma, beta, state, nullptr, Mode::kEval);
}

Var relu(Tape& tape, Var input) {
  const Tensor& x = tape.value(input);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return tape.record(std::move(out), {input}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(input);
    Tensor& gx = t.grad(input);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var dropout(Tape& tape, Var input, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::kEval || rate == 0.0) return input;
  const Tensor& x = tape.value(input);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    (*mask)[i] = m;
    out[i] = x[i] * m;
  }
  return tape.record(std::move(out), {input}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(input);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*mask)[i];
  });
}

Var dense(Tape& tape, Var input, Var weight, Var bias) {
  const Tensor& x = tape.value(input);
  const Tensor& w = tape.value(weight);
  const Tensor& bv = tape.value(bias);
  require_rank(x, 2, "dense", "input");
  require_rank(w, 2, "dense", "weight");
  const std::size_t batch = x.dim(0), din = x.dim(1), dout = w.dim(0);
  if (w.dim(1) != din) {
    throw DimensionError("dense: weight " + shape_string(w.shape()) +
                         " does not accept input " + shape_string(x.shape()));
  }
  if (bv.rank() != 1 || bv.dim(0) != dout) {
    throw DimensionError("dense: bias shape " + shape_string(bv.shape()) +
                         " does not match " + std::to_string(dout) + " outputs");
  }
  const auto eb = static_cast<Eigen::Index>(batch);
  const auto ei = static_cast<Eigen::Index>(din);
  const auto eo = static_cast<Eigen::Index>(dout);
  Tensor out({batch, dout});
  RowMap ym(out.data(), eb, eo);
  ym.noalias() = ConstRowMap(x.data(), eb, ei) * ConstRowMap(w.data(), eo, ei).transpose();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < dout; ++o) out[b * dout + o] += bv[o];
  }
  return tape.record(std::move(out), {input, weight, bias}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    ConstRowMap gm(g.data(), eb, eo);
    if (t.requires_grad(weight)) {
      RowMap(t.grad(weight).data(), eo, ei).noalias() +=
          gm.transpose() * ConstRowMap(t.value(input).data(), eb, ei);
    }
    if (t.requires_grad(bias)) {
      Tensor& gb = t.grad(bias);
      for (std::size_t o = 0; o < dout; ++o) gb[o] += gm.col(static_cast<Eigen::Index>(o)).sum();
    }
    if (t.requires_grad(input)) {
      RowMap(t.grad(input).data(), eb, ei).noalias() +=
          gm * ConstRowMap(t.value(weight).data(), eo, ei);
    }
  });
}

Var softmax(Tape& tape, Var logits) {
  const Tensor& z = tape.value(logits);
  require_rank(z, 2, "softmax", "logits");
  const std::size_t rows = z.dim(0), n = z.dim(1);
  if (n < 2) throw DimensionError("softmax: needs at least 2 classes");
  Tensor out(z.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = z.data() + r * n;
    double* pr = out.data() + r * n;
    const double mx = *std::max_element(zr, zr + n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += (pr[j] = std::exp(zr[j] - mx));
    for (std::size_t j = 0; j < n; ++j) pr[j] /= s;
  }
  return tape.record(std::move(out), {logits}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    const Tensor& p = t.value(self);
    Tensor& gz = t.grad(logits);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[r * n + j] * p[r * n + j];
      for (std::size_t j = 0; j < n; ++j) {
        gz[r * n + j] += p[r * n + j] * (g[r * n + j] - dot);
      }
    }
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  if (x.shape() != y.shape()) {
    throw DimensionError("add: shapes " + shape_string(x.shape()) + " and " +
                         shape_string(y.shape()) + " differ");
  }
  Tensor out = x;
  add_into(out, y);
  return tape.record(std::move(out), {a, b}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(a)) add_into(t.grad(a), g);
    if (t.requires_grad(b)) add_into(t.grad(b), g);
  });
}

Var scale(Tape& tape, Var x, double factor) {
  Tensor out = tape.value(x);
  for (double& v : out.values()) v *= factor;
  return tape.record(std::move(out), {x}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var sum(Tape& tape, Var x) {
  double s = 0.0;
  for (double v : tape.value(x).values()) s += v;
  return tape.record(Tensor::scalar(s), {x}, [=](Tape& t, Var self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad(x).values()) v += g;
  });
}

Var flatten(Tape& tape, Var x) {
  const Tensor& v = tape.value(x);
  if (v.rank() < 1) throw DimensionError("flatten: scalar input");
  const std::size_t rows = v.dim(0);
  const std::size_t cols = rows == 0 ? 0 : v.size() / rows;
  return tape.record(v.reshaped({rows, cols}), {x}, [=](Tape& t, Var self) {
    add_into(t.grad(x), t.grad(self));
  });
}

Var gather_rows(Tape& tape, Var x, std::span<const std::size_t> rows) {
  const Tensor& v = tape.value(x);
  require_rank(v, 2, "gather_rows", "input");
  const std::size_t n = v.dim(1);
  auto idx = std::make_shared<std::vector<std::size_t>>(rows.begin(), rows.end());
  Tensor out({idx->size(), n});
  for (std::size_t i = 0; i < idx->size(); ++i) {
    if ((*idx)[i] >= v.dim(0)) throw DimensionError("gather_rows: row out of range");
    std::copy_n(v.data() + (*idx)[i] * n, n, out.data() + i * n);
  }
  return tape.record(std::move(out), {x}, [=](Tape& t, Var self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) gx[(*idx)[i] * n + j] += g[i * n + j];
    }
  });
}

// Gradients use the clamped probability, so a saturated row still pushes
// back instead of going silent.
Var positive_loss(Tape& tape, Var probs, std::span<const std::size_t> targets) {
  const Tensor& p = tape.value(probs);
  check_targets(p, targets, "positive_loss");
  const std::size_t rows = p.dim(0), n = p.dim(1);
  auto tgt = std::make_shared<std::vector<std::size_t>>(targets.begin(), targets.end());
  double s = 0.0;
  for (std::size_t r = 0; r < rows; ++r) s -= std::log(clamp_prob(p[r * n + (*tgt)[r]]));
  return tape.record(Tensor::scalar(s / static_cast<double>(rows)), {probs},
                     [=](Tape& t, Var self) {
    const double g = t.grad(self)[0] / static_cast<double>(rows);
    const Tensor& pv = t.value(probs);
    Tensor& gp = t.grad(probs);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = r * n + (*tgt)[r];
      gp[i] -= g / clamp_prob(pv[i]);
    }
  });
}

Var negative_loss(Tape& tape, Var probs, std::span<const std::size_t> complements) {
  const Tensor& p = tape.value(probs);
  check_targets(p, complements, "negative_loss");
  const std::size_t rows = p.dim(0), n = p.dim(1);
  auto tgt = std::make_shared<std::vector<std::size_t>>(complements.begin(),
                                                        complements.end());
  double s = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    s -= std::log(1.0 - clamp_prob(p[r * n + (*tgt)[r]]));
  }
  return tape.record(Tensor::scalar(s / static_cast<double>(rows)), {probs},
                     [=](Tape& t, Var self) {
    const double g = t.grad(self)[0] / static_cast<double>(rows);
    const Tensor& pv = t.value(probs);
    Tensor& gp = t.grad(probs);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = r * n + (*tgt)[r];
      gp[i] += g / (1.0 - clamp_prob(pv[i]));
    }
  });
}

Sgd::Sgd(double alpha, double momentum) : alpha_(alpha), momentum_(momentum) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("learning rate must be positive, got " + std::to_string(alpha));
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must be in [0, 1), got " + std::to_string(momentum));
  }
}

void Sgd::step(std::span<Parameter> params) {
  if (velocity_.size() != params.size()) {
    velocity_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity_[i].assign(params[i].value.size(), 0.0);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].value.values();
    auto g = params[i].grad.values();
    auto& v = velocity_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      v[k] = momentum_ * v[k] + g[k];
      w[k] -= alpha_ * v[k];
    }
  }
}

void sgd_step(std::span<Parameter> params, double alpha) {
  Sgd(alpha, 0.0).step(params);
}

void zero_grads(std::span<Parameter> params) {
  for (Parameter& p : params) p.zero_grad();
}

}  // namespace negres::ad
