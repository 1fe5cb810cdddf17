#pragma once

#include "carskit/common.hpp"
#include "carskit/rng.hpp"
#include "carskit/signal_ops.hpp"

#include <functional>
#include <vector>

namespace carskit::ad {

// (batch, channels, length) for activations. Convolution weights reuse the
// same struct as (out_channels, in_channels, kernel); biases as
// (1, channels, 1); plain vectors as (1, 1, n); scalars as (1, 1, 1).
struct Shape {
  Index batch = 1;
  Index channels = 1;
  Index length = 1;

  Index size() const { return batch * channels * length; }
  bool operator==(const Shape&) const = default;
};

inline Shape scalar_shape() { return Shape{1, 1, 1}; }
inline Shape vector_shape(Index n) { return Shape{1, 1, n}; }

class Tape;

// Lightweight handle into a tape node. Valid only while its tape lives.
class Tensor {
 public:
  Tensor() = default;

  bool valid() const { return tape_ != nullptr; }
  const Array& value() const;
  const Array& grad() const;
  const Shape& shape() const;
  double scalar() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, int node) : tape_(tape), node_(node) {}

  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Single-use reverse-mode tape. Build a graph, call backward once, read
// gradients, throw the tape away. Construction is per-invocation; tapes are
// never shared across threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(Array data, Shape shape, bool requires_grad = true);
  Tensor leaf(Array data, bool requires_grad = true);  // flat vector
  Tensor scalar_leaf(double v, bool requires_grad = true);

  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor div(Tensor a, Tensor b);
  Tensor scale(Tensor a, double s);
  Tensor offset(Tensor a, double c);
  Tensor neg(Tensor a) { return scale(a, -1.0); }

  Tensor relu(Tensor a);
  Tensor sigmoid(Tensor a);
  Tensor softplus(Tensor a);
  Tensor exp(Tensor a);
  Tensor log(Tensor a);
  Tensor square(Tensor a);

  Tensor sum(Tensor a);
  Tensor mean(Tensor a);

  // 1-D convolution, stride 1, zero-padded to the same length.
  // x: (B, Cin, L), w: (Cout, Cin, K) with K odd, b: (1, Cout, 1).
  Tensor conv1d(Tensor x, Tensor w, Tensor b);

  // Inverted dropout: scales kept activations by 1/(1-p) in training mode,
  // identity in eval mode.
  Tensor dropout(Tensor x, double p, bool training, Rng* rng);

  // Applies a tagged linear operator along the length axis of every
  // (batch, channel) row; backward applies the operator's adjoint.
  Tensor linear_op(Tensor x, LinearOpTag tag);

  // Reverse pass from a scalar loss. Gradients accumulate additively over
  // shared uses. A second call without rebuilding the graph is an error.
  void backward(Tensor loss);

  Index node_count() const { return static_cast<Index>(nodes_.size()); }

 private:
  friend class Tensor;

  struct Node {
    Array value;
    Array grad;  // lazily sized; empty until touched
    Shape shape;
    bool requires_grad = false;
    // Receives the node's own upstream gradient; scatters into parents.
    std::function<void(Tape&, const Array&)> backprop;  // empty for leaves
  };

  Tensor make_node(Array value, Shape shape, bool requires_grad,
                   std::function<void(Tape&, const Array&)> backprop);
  Node& node(int i) { return nodes_[static_cast<size_t>(i)]; }
  const Node& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  Array& grad_buffer(int i);
  void check_same_shape(Tensor a, Tensor b, const char* op) const;
  void check_owned(Tensor t, const char* op) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace carskit::ad
