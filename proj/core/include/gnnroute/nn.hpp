// Copyright 2026 The gnnroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnnroute/rng.hpp"

namespace gnnroute {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Rows index outputs, columns inputs.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return data.size(); }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

/// y += W x
void matvec_add(const Mat& w, std::span<const double> x, std::span<double> y);
/// y += W^T x
void matvec_transpose_add(const Mat& w, std::span<const double> x, std::span<double> y);
/// W += a b^T
void outer_add(Mat& w, std::span<const double> a, std::span<const double> b);

enum class Activation { linear, selu };

double selu(double x);
/// SELU derivative expressed in terms of the activation output.
double selu_derivative_from_output(double y);

struct DenseLayer {
  Mat weights;  // out x in
  Vec bias;     // out
  Activation activation = Activation::linear;

  int in_size() const { return weights.cols; }
  int out_size() const { return weights.rows; }
};

struct DenseGrads {
  Mat weights;
  Vec bias;
};

/// activation(W x + b). Throws std::invalid_argument on shape mismatch.
Vec dense_apply(const DenseLayer& layer, std::span<const double> input);

/// Backward pass of dense_apply. `output` is the forward result for these
/// inputs (the SELU derivative is recovered from it), `dl_doutput` the
/// upstream gradient. Accumulates parameter gradients into `grads` and the
/// input gradient into `dl_dinput` (which must be pre-sized and may already
/// hold partial sums).
void dense_backward(const DenseLayer& layer, std::span<const double> input,
                    std::span<const double> output, std::span<const double> dl_doutput,
                    DenseGrads& grads, std::span<double> dl_dinput);

/// Gated recurrent cell (GRU form) with equal hidden and input width H:
///   z = sigmoid(Wz x + Uz h + bz)         update gate
///   r = sigmoid(Wr x + Ur h + br)         reset gate
///   c = tanh(Wc x + Uc (r*h) + bc)        candidate
///   h' = (1-z)*h + z*c
struct RecurrentCell {
  Mat w_update, u_update;
  Vec b_update;
  Mat w_reset, u_reset;
  Vec b_reset;
  Mat w_cand, u_cand;
  Vec b_cand;

  int hidden_size() const { return w_update.rows; }
};

struct RecurrentGrads {
  Mat w_update, u_update;
  Vec b_update;
  Mat w_reset, u_reset;
  Vec b_reset;
  Mat w_cand, u_cand;
  Vec b_cand;
};

/// Gate values saved by the forward pass for backprop.
struct RecurrentTrace {
  Vec z, r, c;
};

/// One cell application. Pass a trace pointer when a backward pass will
/// follow. Throws std::invalid_argument on shape mismatch.
Vec recurrent_update(const RecurrentCell& cell, std::span<const double> hidden,
                     std::span<const double> input, RecurrentTrace* trace = nullptr);

/// Allocation-free cell application into caller-provided rows (gate values
/// land in z/r/c, the new hidden state in h_out). Used by per-link loops.
void recurrent_forward_spans(const RecurrentCell& cell, std::span<const double> hidden,
                             std::span<const double> input, std::span<double> z,
                             std::span<double> r, std::span<double> c, std::span<double> h_out);

/// Backward pass of recurrent_update. Accumulates parameter gradients into
/// `grads`, and the hidden/input gradients into the provided accumulators.
void recurrent_backward(const RecurrentCell& cell, std::span<const double> hidden,
                        std::span<const double> input, const RecurrentTrace& trace,
                        std::span<const double> dl_dh_new, RecurrentGrads& grads,
                        std::span<double> dl_dh_prev, std::span<double> dl_dinput);

/// Span-trace variant of recurrent_backward for per-link loops.
void recurrent_backward_spans(const RecurrentCell& cell, std::span<const double> hidden,
                              std::span<const double> input, std::span<const double> z,
                              std::span<const double> r, std::span<const double> c,
                              std::span<const double> dl_dh_new, RecurrentGrads& grads,
                              std::span<double> dl_dh_prev, std::span<double> dl_dinput);

/// Named view of one parameter block; the canonical unit for the optimizer,
/// checkpointing and gradient verification.
struct ParamRef {
  std::string name;
  std::span<double> values;
  int rows = 0;  // shape metadata for the checkpoint container
  int cols = 0;  // cols == 0 marks a flat vector
};

struct ConstParamRef {
  std::string name;
  std::span<const double> values;
  int rows = 0;
  int cols = 0;
};

std::vector<ParamRef> parameter_refs(DenseLayer& layer, const std::string& prefix);
std::vector<ParamRef> parameter_refs(RecurrentCell& cell, const std::string& prefix);
std::vector<ParamRef> parameter_refs(DenseGrads& grads, const std::string& prefix);
std::vector<ParamRef> parameter_refs(RecurrentGrads& grads, const std::string& prefix);

/// Glorot-style uniform initialization: U(-lim, lim), lim = sqrt(6/(fan_in+fan_out)).
void glorot_init(Mat& w, Rng& rng);

DenseLayer make_dense(int in, int out, Activation act, Rng& rng);
RecurrentCell make_recurrent(int hidden, Rng& rng);
DenseGrads zeros_like(const DenseLayer& layer);
RecurrentGrads zeros_like(const RecurrentCell& cell);

/// Stochastic gradient descent with Nesterov momentum, in the form
///   v   <- mu*v - lr*g
///   th  <- th + mu*v - lr*g
/// (the parameter update applies the refreshed velocity). With mu = 0 this
/// is plain SGD.
class NesterovOptimizer {
 public:
  NesterovOptimizer(double learning_rate, double momentum)
      : learning_rate_(learning_rate), momentum_(momentum) {}

  /// params and grads must enumerate the same blocks in the same order.
  void step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads);

  double learning_rate() const { return learning_rate_; }
  double momentum() const { return momentum_; }

 private:
  double learning_rate_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;  // lazily shaped on first step
};

/// Gradient verification against central finite differences.
struct GradCheckBlock {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error = 0.0;
  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// For each parameter in each block, perturbs by +-step, evaluates loss_fn,
/// and compares the central difference against the matching analytic
/// gradient. loss_fn must be deterministic. Relative error uses
/// |fd - g| / max(1e-10, |fd| + |g|).
GradCheckReport finite_diff_check(const std::vector<ParamRef>& params,
                                  const std::vector<ParamRef>& analytic_grads,
                                  const std::function<double()>& loss_fn, double step = 1e-5);

}  // namespace gnnroute
