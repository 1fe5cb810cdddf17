#include "carskit/autodiff.hpp"

#include <cmath>
#include <utility>

namespace carskit::ad {

namespace {

using Matrix = Eigen::MatrixXd;
using Eigen::Map;

// Gathers the zero-padded sliding windows of x into a (B*L, Cin*K) matrix.
void im2col(const Array& x, Index B, Index Cin, Index L, Index K,
            Matrix& cols) {
  const Index pad = K / 2;
  cols.setZero(B * L, Cin * K);
  for (Index ci = 0; ci < Cin; ++ci) {
    for (Index k = 0; k < K; ++k) {
      const Index shift = k - pad;
      const Index t0 = std::max<Index>(0, -shift);
      const Index t1 = std::min<Index>(L, L - shift);
      if (t1 <= t0) continue;
      double* dst_col = cols.col(ci * K + k).data();
      for (Index b = 0; b < B; ++b) {
        const double* src = x.data() + (b * Cin + ci) * L + (t0 + shift);
        std::copy(src, src + (t1 - t0), dst_col + b * L + t0);
      }
    }
  }
}

// Scatter-adds the column gradient back onto the input layout.
void col2im_add(const Matrix& gcols, Index B, Index Cin, Index L, Index K,
                Array& gx) {
  const Index pad = K / 2;
  for (Index ci = 0; ci < Cin; ++ci) {
    for (Index k = 0; k < K; ++k) {
      const Index shift = k - pad;
      const Index t0 = std::max<Index>(0, -shift);
      const Index t1 = std::min<Index>(L, L - shift);
      if (t1 <= t0) continue;
      const double* src_col = gcols.col(ci * K + k).data();
      for (Index b = 0; b < B; ++b) {
        double* dst = gx.data() + (b * Cin + ci) * L + (t0 + shift);
        const double* src = src_col + b * L + t0;
        for (Index t = 0; t < t1 - t0; ++t) dst[t] += src[t];
      }
    }
  }
}

}  // namespace

const Array& Tensor::value() const { return tape_->node(node_).value; }
const Array& Tensor::grad() const { return tape_->node(node_).grad; }
const Shape& Tensor::shape() const { return tape_->node(node_).shape; }

double Tensor::scalar() const {
  const Array& v = value();
  if (v.size() != 1) throw NumericError("Tensor::scalar on non-scalar");
  return v[0];
}

Tensor Tape::make_node(Array value, Shape shape, bool requires_grad,
                       std::function<void(Tape&, const Array&)> backprop) {
  if (value.size() != shape.size()) {
    throw NumericError("tape: value size does not match declared shape");
  }
  Node n;
  n.value = std::move(value);
  n.shape = shape;
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Array& Tape::grad_buffer(int i) {
  Node& n = node(i);
  if (n.grad.size() == 0) n.grad = Array::Zero(n.shape.size());
  return n.grad;
}

void Tape::check_owned(Tensor t, const char* op) const {
  if (t.tape_ != this) {
    throw NumericError(std::string(op) + ": tensor from another tape");
  }
}

void Tape::check_same_shape(Tensor a, Tensor b, const char* op) const {
  check_owned(a, op);
  check_owned(b, op);
  if (!(node(a.node_).shape == node(b.node_).shape)) {
    throw NumericError(std::string(op) + ": shape mismatch");
  }
}

Tensor Tape::leaf(Array data, Shape shape, bool requires_grad) {
  return make_node(std::move(data), shape, requires_grad, {});
}

Tensor Tape::leaf(Array data, bool requires_grad) {
  const Index n = data.size();
  return leaf(std::move(data), vector_shape(n), requires_grad);
}

Tensor Tape::scalar_leaf(double v, bool requires_grad) {
  Array a(1);
  a[0] = v;
  return leaf(std::move(a), scalar_shape(), requires_grad);
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_shape(a, b, "add");
  const int ia = a.node_, ib = b.node_;
  const bool rg = node(ia).requires_grad || node(ib).requires_grad;
  Array out = node(ia).value + node(ib).value;
  return make_node(std::move(out), node(ia).shape, rg,
                   [ia, ib](Tape& t, const Array& g) {
                     if (t.node(ia).requires_grad) t.grad_buffer(ia) += g;
                     if (t.node(ib).requires_grad) t.grad_buffer(ib) += g;
                   });
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_shape(a, b, "sub");
  const int ia = a.node_, ib = b.node_;
  const bool rg = node(ia).requires_grad || node(ib).requires_grad;
  Array out = node(ia).value - node(ib).value;
  return make_node(std::move(out), node(ia).shape, rg,
                   [ia, ib](Tape& t, const Array& g) {
                     if (t.node(ia).requires_grad) t.grad_buffer(ia) += g;
                     if (t.node(ib).requires_grad) t.grad_buffer(ib) -= g;
                   });
}

Tensor Tape::mul(Tensor a, Tensor b) {
  check_same_shape(a, b, "mul");
  const int ia = a.node_, ib = b.node_;
  const bool rg = node(ia).requires_grad || node(ib).requires_grad;
  Array out = node(ia).value * node(ib).value;
  return make_node(std::move(out), node(ia).shape, rg,
                   [ia, ib](Tape& t, const Array& g) {
                     if (t.node(ia).requires_grad) {
                       t.grad_buffer(ia) += g * t.node(ib).value;
                     }
                     if (t.node(ib).requires_grad) {
                       t.grad_buffer(ib) += g * t.node(ia).value;
                     }
                   });
}

Tensor Tape::div(Tensor a, Tensor b) {
  check_same_shape(a, b, "div");
  const int ia = a.node_, ib = b.node_;
  const bool rg = node(ia).requires_grad || node(ib).requires_grad;
  Array out = node(ia).value / node(ib).value;
  return make_node(std::move(out), node(ia).shape, rg,
                   [ia, ib](Tape& t, const Array& g) {
                     const Array& bv = t.node(ib).value;
                     if (t.node(ia).requires_grad) t.grad_buffer(ia) += g / bv;
                     if (t.node(ib).requires_grad) {
                       t.grad_buffer(ib) -=
                           g * t.node(ia).value / (bv * bv);
                     }
                   });
}

Tensor Tape::scale(Tensor a, double s) {
  check_owned(a, "scale");
  const int ia = a.node_;
  Array out = node(ia).value * s;
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia, s](Tape& t, const Array& g) {
                     if (t.node(ia).requires_grad) t.grad_buffer(ia) += s * g;
                   });
}

Tensor Tape::offset(Tensor a, double c) {
  check_owned(a, "offset");
  const int ia = a.node_;
  Array out = node(ia).value + c;
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia](Tape& t, const Array& g) {
                     if (t.node(ia).requires_grad) t.grad_buffer(ia) += g;
                   });
}

Tensor Tape::relu(Tensor a) {
  check_owned(a, "relu");
  const int ia = a.node_;
  Array out = node(ia).value.max(0.0);
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     const Array& x = t.node(ia).value;
                     t.grad_buffer(ia) += g * (x > 0.0).cast<double>();
                   });
}

Tensor Tape::sigmoid(Tensor a) {
  check_owned(a, "sigmoid");
  const int ia = a.node_;
  Array out = node(ia).value.unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  const int iout = static_cast<int>(nodes_.size());
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia, iout](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     const Array& y = t.node(iout).value;
                     t.grad_buffer(ia) += g * y * (1.0 - y);
                   });
}

Tensor Tape::softplus(Tensor a) {
  check_owned(a, "softplus");
  const int ia = a.node_;
  Array out = node(ia).value.unaryExpr([](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  });
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     const Array sig = t.node(ia).value.unaryExpr([](double x) {
                       if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                       const double e = std::exp(x);
                       return e / (1.0 + e);
                     });
                     t.grad_buffer(ia) += g * sig;
                   });
}

Tensor Tape::exp(Tensor a) {
  check_owned(a, "exp");
  const int ia = a.node_;
  Array out = node(ia).value.exp();
  const int iout = static_cast<int>(nodes_.size());
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia, iout](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     t.grad_buffer(ia) += g * t.node(iout).value;
                   });
}

Tensor Tape::log(Tensor a) {
  check_owned(a, "log");
  const int ia = a.node_;
  Array out = node(ia).value.log();
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     t.grad_buffer(ia) += g / t.node(ia).value;
                   });
}

Tensor Tape::square(Tensor a) {
  check_owned(a, "square");
  const int ia = a.node_;
  Array out = node(ia).value.square();
  return make_node(std::move(out), node(ia).shape, node(ia).requires_grad,
                   [ia](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     t.grad_buffer(ia) += 2.0 * g * t.node(ia).value;
                   });
}

Tensor Tape::sum(Tensor a) {
  check_owned(a, "sum");
  const int ia = a.node_;
  Array out(1);
  out[0] = node(ia).value.sum();
  return make_node(std::move(out), scalar_shape(), node(ia).requires_grad,
                   [ia](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     t.grad_buffer(ia) += g[0];
                   });
}

Tensor Tape::mean(Tensor a) {
  check_owned(a, "mean");
  const int ia = a.node_;
  const double inv_n = 1.0 / static_cast<double>(node(ia).value.size());
  Array out(1);
  out[0] = node(ia).value.sum() * inv_n;
  return make_node(std::move(out), scalar_shape(), node(ia).requires_grad,
                   [ia, inv_n](Tape& t, const Array& g) {
                     if (!t.node(ia).requires_grad) return;
                     t.grad_buffer(ia) += g[0] * inv_n;
                   });
}

Tensor Tape::conv1d(Tensor x, Tensor w, Tensor b) {
  check_owned(x, "conv1d");
  check_owned(w, "conv1d");
  check_owned(b, "conv1d");
  const int ix = x.node_, iw = w.node_, ib = b.node_;
  const Shape xs = node(ix).shape;
  const Shape ws = node(iw).shape;  // (Cout, Cin, K)
  const Index B = xs.batch, Cin = xs.channels, L = xs.length;
  const Index Cout = ws.batch, K = ws.length;
  if (ws.channels != Cin) throw NumericError("conv1d: channel mismatch");
  if (K % 2 == 0) throw NumericError("conv1d: kernel size must be odd");
  if (!(node(ib).shape == Shape{1, Cout, 1})) {
    throw NumericError("conv1d: bias shape mismatch");
  }

  Matrix cols;
  im2col(node(ix).value, B, Cin, L, K, cols);
  Map<const Matrix> wmat(node(iw).value.data(), Cin * K, Cout);
  Matrix out_mat = cols * wmat;  // (B*L, Cout)

  Array out(B * Cout * L);
  for (Index bi = 0; bi < B; ++bi) {
    for (Index co = 0; co < Cout; ++co) {
      const double bias = node(ib).value[co];
      const double* src = out_mat.col(co).data() + bi * L;
      double* dst = out.data() + (bi * Cout + co) * L;
      for (Index t = 0; t < L; ++t) dst[t] = src[t] + bias;
    }
  }

  const bool rg = node(ix).requires_grad || node(iw).requires_grad ||
                  node(ib).requires_grad;
  const Shape out_shape{B, Cout, L};
  return make_node(
      std::move(out), out_shape, rg,
      [ix, iw, ib, B, Cin, Cout, L, K](Tape& t, const Array& g) {
        Matrix g_mat(B * L, Cout);
        for (Index bi = 0; bi < B; ++bi) {
          for (Index co = 0; co < Cout; ++co) {
            const double* src = g.data() + (bi * Cout + co) * L;
            std::copy(src, src + L, g_mat.col(co).data() + bi * L);
          }
        }
        if (t.node(ib).requires_grad) {
          Array& gb = t.grad_buffer(ib);
          for (Index co = 0; co < Cout; ++co) gb[co] += g_mat.col(co).sum();
        }
        const bool need_w = t.node(iw).requires_grad;
        const bool need_x = t.node(ix).requires_grad;
        if (need_w) {
          Matrix cols;
          im2col(t.node(ix).value, B, Cin, L, K, cols);
          Matrix gw = cols.transpose() * g_mat;  // (Cin*K, Cout)
          Map<Matrix>(t.grad_buffer(iw).data(), Cin * K, Cout) += gw;
        }
        if (need_x) {
          Map<const Matrix> wmat(t.node(iw).value.data(), Cin * K, Cout);
          Matrix gcols = g_mat * wmat.transpose();  // (B*L, Cin*K)
          col2im_add(gcols, B, Cin, L, K, t.grad_buffer(ix));
        }
      });
}

Tensor Tape::dropout(Tensor x, double p, bool training, Rng* rng) {
  check_owned(x, "dropout");
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout: p must be in [0, 1)");
  }
  const int ix = x.node_;
  if (!training || p == 0.0) {
    Array out = node(ix).value;
    return make_node(std::move(out), node(ix).shape, node(ix).requires_grad,
                     [ix](Tape& t, const Array& g) {
                       if (t.node(ix).requires_grad) t.grad_buffer(ix) += g;
                     });
  }
  if (rng == nullptr) throw ConfigError("dropout: rng required in training");
  const double keep_scale = 1.0 / (1.0 - p);
  Array mask(node(ix).value.size());
  for (Index i = 0; i < mask.size(); ++i) {
    mask[i] = rng->uniform() < p ? 0.0 : keep_scale;
  }
  Array out = node(ix).value * mask;
  return make_node(std::move(out), node(ix).shape, node(ix).requires_grad,
                   [ix, mask](Tape& t, const Array& g) {
                     if (t.node(ix).requires_grad) {
                       t.grad_buffer(ix) += g * mask;
                     }
                   });
}

Tensor Tape::linear_op(Tensor x, LinearOpTag tag) {
  check_owned(x, "linear_op");
  const int ix = x.node_;
  const Shape xs = node(ix).shape;
  const Index rows = xs.batch * xs.channels;
  const Index L = xs.length;
  const Index Lout = tag == LinearOpTag::kFirstDifference ? L - 1 : L;

  Array out(rows * Lout);
  Spectrum row(L);
  for (Index r = 0; r < rows; ++r) {
    row = Map<const Array>(node(ix).value.data() + r * L, L);
    const Spectrum res = apply_linear_op(tag, row);
    Map<Array>(out.data() + r * Lout, Lout) = res;
  }
  const Shape out_shape{xs.batch, xs.channels, Lout};
  return make_node(std::move(out), out_shape, node(ix).requires_grad,
                   [ix, tag, rows, L, Lout](Tape& t, const Array& g) {
                     if (!t.node(ix).requires_grad) return;
                     Array& gx = t.grad_buffer(ix);
                     Array grow(Lout);
                     for (Index r = 0; r < rows; ++r) {
                       grow = Map<const Array>(g.data() + r * Lout, Lout);
                       const Array back =
                           apply_linear_op_adjoint(tag, grow, L);
                       Map<Array>(gx.data() + r * L, L) += back;
                     }
                   });
}

void Tape::backward(Tensor loss) {
  check_owned(loss, "backward");
  if (backward_done_) {
    throw std::logic_error("backward: called twice on one tape");
  }
  backward_done_ = true;
  const Node& ln = node(loss.node_);
  if (ln.shape.size() != 1) {
    throw NumericError("backward: loss must be scalar");
  }
  if (!ln.requires_grad) {
    throw NumericError("backward: loss does not depend on any parameter");
  }
  grad_buffer(loss.node_)[0] = 1.0;
  for (int i = loss.node_; i >= 0; --i) {
    Node& n = node(i);
    if (n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(*this, n.grad);
  }
}

}  // namespace carskit::ad
