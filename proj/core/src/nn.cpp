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

#include "gnnroute/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace gnnroute {

void matvec_add(const Mat& w, std::span<const double> x, std::span<double> y) {
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

void matvec_transpose_add(const Mat& w, std::span<const double> x, std::span<double> y) {
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    const double xr = x[r];
    for (int c = 0; c < w.cols; ++c) y[c] += wr[c] * xr;
  }
}

void outer_add(Mat& w, std::span<const double> a, std::span<const double> b) {
  for (int r = 0; r < w.rows; ++r) {
    double* wr = w.row(r);
    const double ar = a[r];
    for (int c = 0; c < w.cols; ++c) wr[c] += ar * b[c];
  }
}

// SELU constants (Klambauer et al. self-normalizing networks).
namespace {
constexpr double kSeluScale = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double selu(double x) {
  return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * (std::exp(x) - 1.0);
}

double selu_derivative_from_output(double y) {
  // y > 0 iff x > 0; for x <= 0, scale*alpha*exp(x) == y + scale*alpha.
  return y > 0.0 ? kSeluScale : y + kSeluScale * kSeluAlpha;
}

Vec dense_apply(const DenseLayer& layer, std::span<const double> input) {
  if (static_cast<int>(input.size()) != layer.in_size())
    throw std::invalid_argument("dense_apply: input size mismatch");
  Vec out = layer.bias;
  matvec_add(layer.weights, input, out);
  if (layer.activation == Activation::selu)
    for (double& v : out) v = selu(v);
  return out;
}

void dense_backward(const DenseLayer& layer, std::span<const double> input,
                    std::span<const double> output, std::span<const double> dl_doutput,
                    DenseGrads& grads, std::span<double> dl_dinput) {
  const int out_n = layer.out_size();
  Vec dz(out_n);
  for (int r = 0; r < out_n; ++r) {
    const double act = layer.activation == Activation::selu
                           ? selu_derivative_from_output(output[r])
                           : 1.0;
    dz[r] = dl_doutput[r] * act;
  }
  outer_add(grads.weights, dz, input);
  for (int r = 0; r < out_n; ++r) grads.bias[r] += dz[r];
  matvec_transpose_add(layer.weights, dz, dl_dinput);
}

void recurrent_forward_spans(const RecurrentCell& cell, std::span<const double> hidden,
                             std::span<const double> input, std::span<double> z,
                             std::span<double> r, std::span<double> c, std::span<double> h_out) {
  const int h = cell.hidden_size();
  if (static_cast<int>(hidden.size()) != h || static_cast<int>(input.size()) != h)
    throw std::invalid_argument("recurrent_update: size mismatch");

  std::copy(cell.b_update.begin(), cell.b_update.end(), z.begin());
  matvec_add(cell.w_update, input, z);
  matvec_add(cell.u_update, hidden, z);
  for (double& v : z) v = sigmoid(v);

  std::copy(cell.b_reset.begin(), cell.b_reset.end(), r.begin());
  matvec_add(cell.w_reset, input, r);
  matvec_add(cell.u_reset, hidden, r);
  for (double& v : r) v = sigmoid(v);

  Vec gated(h);
  for (int i = 0; i < h; ++i) gated[i] = r[i] * hidden[i];
  std::copy(cell.b_cand.begin(), cell.b_cand.end(), c.begin());
  matvec_add(cell.w_cand, input, c);
  matvec_add(cell.u_cand, gated, c);
  for (double& v : c) v = std::tanh(v);

  for (int i = 0; i < h; ++i) h_out[i] = (1.0 - z[i]) * hidden[i] + z[i] * c[i];
}

Vec recurrent_update(const RecurrentCell& cell, std::span<const double> hidden,
                     std::span<const double> input, RecurrentTrace* trace) {
  const int h = cell.hidden_size();
  Vec z(h), r(h), c(h), out(h);
  recurrent_forward_spans(cell, hidden, input, z, r, c, out);
  if (trace) {
    trace->z = std::move(z);
    trace->r = std::move(r);
    trace->c = std::move(c);
  }
  return out;
}

void recurrent_backward(const RecurrentCell& cell, std::span<const double> hidden,
                        std::span<const double> input, const RecurrentTrace& trace,
                        std::span<const double> dl_dh_new, RecurrentGrads& grads,
                        std::span<double> dl_dh_prev, std::span<double> dl_dinput) {
  recurrent_backward_spans(cell, hidden, input, trace.z, trace.r, trace.c, dl_dh_new, grads,
                           dl_dh_prev, dl_dinput);
}

void recurrent_backward_spans(const RecurrentCell& cell, std::span<const double> hidden,
                              std::span<const double> input, std::span<const double> z,
                              std::span<const double> r, std::span<const double> c,
                              std::span<const double> dl_dh_new, RecurrentGrads& grads,
                              std::span<double> dl_dh_prev, std::span<double> dl_dinput) {
  const int h = cell.hidden_size();

  // h' = (1-z)*h + z*c
  Vec dz(h), dc(h);
  for (int i = 0; i < h; ++i) {
    const double g = dl_dh_new[i];
    dz[i] = g * (c[i] - hidden[i]);
    dc[i] = g * z[i];
    dl_dh_prev[i] += g * (1.0 - z[i]);
  }

  // candidate: c = tanh(Wc x + Uc (r*h) + bc)
  Vec dc_pre(h), gated(h);
  for (int i = 0; i < h; ++i) {
    dc_pre[i] = dc[i] * (1.0 - c[i] * c[i]);
    gated[i] = r[i] * hidden[i];
  }
  outer_add(grads.w_cand, dc_pre, input);
  outer_add(grads.u_cand, dc_pre, gated);
  for (int i = 0; i < h; ++i) grads.b_cand[i] += dc_pre[i];
  matvec_transpose_add(cell.w_cand, dc_pre, dl_dinput);
  Vec dgated(h, 0.0);
  matvec_transpose_add(cell.u_cand, dc_pre, dgated);
  Vec dr(h);
  for (int i = 0; i < h; ++i) {
    dr[i] = dgated[i] * hidden[i];
    dl_dh_prev[i] += dgated[i] * r[i];
  }

  // reset gate: r = sigmoid(Wr x + Ur h + br)
  Vec dr_pre(h);
  for (int i = 0; i < h; ++i) dr_pre[i] = dr[i] * r[i] * (1.0 - r[i]);
  outer_add(grads.w_reset, dr_pre, input);
  outer_add(grads.u_reset, dr_pre, hidden);
  for (int i = 0; i < h; ++i) grads.b_reset[i] += dr_pre[i];
  matvec_transpose_add(cell.w_reset, dr_pre, dl_dinput);
  matvec_transpose_add(cell.u_reset, dr_pre, dl_dh_prev);

  // update gate: z = sigmoid(Wz x + Uz h + bz)
  Vec dz_pre(h);
  for (int i = 0; i < h; ++i) dz_pre[i] = dz[i] * z[i] * (1.0 - z[i]);
  outer_add(grads.w_update, dz_pre, input);
  outer_add(grads.u_update, dz_pre, hidden);
  for (int i = 0; i < h; ++i) grads.b_update[i] += dz_pre[i];
  matvec_transpose_add(cell.w_update, dz_pre, dl_dinput);
  matvec_transpose_add(cell.u_update, dz_pre, dl_dh_prev);
}

std::vector<ParamRef> parameter_refs(DenseLayer& layer, const std::string& prefix) {
  return {
      {prefix + ".weights", layer.weights.data, layer.weights.rows, layer.weights.cols},
      {prefix + ".bias", layer.bias, static_cast<int>(layer.bias.size()), 0},
  };
}

std::vector<ParamRef> parameter_refs(RecurrentCell& cell, const std::string& prefix) {
  std::vector<ParamRef> refs;
  auto add_mat = [&](const char* name, Mat& m) {
    refs.push_back({prefix + "." + name, m.data, m.rows, m.cols});
  };
  auto add_vec = [&](const char* name, Vec& v) {
    refs.push_back({prefix + "." + name, v, static_cast<int>(v.size()), 0});
  };
  add_mat("w_update", cell.w_update);
  add_mat("u_update", cell.u_update);
  add_vec("b_update", cell.b_update);
  add_mat("w_reset", cell.w_reset);
  add_mat("u_reset", cell.u_reset);
  add_vec("b_reset", cell.b_reset);
  add_mat("w_cand", cell.w_cand);
  add_mat("u_cand", cell.u_cand);
  add_vec("b_cand", cell.b_cand);
  return refs;
}

std::vector<ParamRef> parameter_refs(DenseGrads& grads, const std::string& prefix) {
  return {
      {prefix + ".weights", grads.weights.data, grads.weights.rows, grads.weights.cols},
      {prefix + ".bias", grads.bias, static_cast<int>(grads.bias.size()), 0},
  };
}

std::vector<ParamRef> parameter_refs(RecurrentGrads& grads, const std::string& prefix) {
  std::vector<ParamRef> refs;
  auto add_mat = [&](const char* name, Mat& m) {
    refs.push_back({prefix + "." + name, m.data, m.rows, m.cols});
  };
  auto add_vec = [&](const char* name, Vec& v) {
    refs.push_back({prefix + "." + name, v, static_cast<int>(v.size()), 0});
  };
  add_mat("w_update", grads.w_update);
  add_mat("u_update", grads.u_update);
  add_vec("b_update", grads.b_update);
  add_mat("w_reset", grads.w_reset);
  add_mat("u_reset", grads.u_reset);
  add_vec("b_reset", grads.b_reset);
  add_mat("w_cand", grads.w_cand);
  add_mat("u_cand", grads.u_cand);
  add_vec("b_cand", grads.b_cand);
  return refs;
}

void glorot_init(Mat& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / (w.rows + w.cols));
  for (double& v : w.data) v = rng.uniform_real(-limit, limit);
}

DenseLayer make_dense(int in, int out, Activation act, Rng& rng) {
  DenseLayer layer;
  layer.weights = Mat(out, in);
  glorot_init(layer.weights, rng);
  layer.bias.assign(out, 0.0);
  layer.activation = act;
  return layer;
}

RecurrentCell make_recurrent(int hidden, Rng& rng) {
  RecurrentCell cell;
  auto mat = [&] {
    Mat m(hidden, hidden);
    glorot_init(m, rng);
    return m;
  };
  cell.w_update = mat();
  cell.u_update = mat();
  cell.b_update.assign(hidden, 0.0);
  cell.w_reset = mat();
  cell.u_reset = mat();
  cell.b_reset.assign(hidden, 0.0);
  cell.w_cand = mat();
  cell.u_cand = mat();
  cell.b_cand.assign(hidden, 0.0);
  return cell;
}

DenseGrads zeros_like(const DenseLayer& layer) {
  DenseGrads g;
  g.weights = Mat(layer.weights.rows, layer.weights.cols);
  g.bias.assign(layer.bias.size(), 0.0);
  return g;
}

RecurrentGrads zeros_like(const RecurrentCell& cell) {
  const int h = cell.hidden_size();
  RecurrentGrads g;
  g.w_update = Mat(h, h);
  g.u_update = Mat(h, h);
  g.b_update.assign(h, 0.0);
  g.w_reset = Mat(h, h);
  g.u_reset = Mat(h, h);
  g.b_reset.assign(h, 0.0);
  g.w_cand = Mat(h, h);
  g.u_cand = Mat(h, h);
  g.b_cand.assign(h, 0.0);
  return g;
}

void NesterovOptimizer::step(const std::vector<ParamRef>& params,
                             const std::vector<ParamRef>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("optimizer: parameter/gradient block count mismatch");
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const auto& p : params) velocity_.emplace_back(p.values.size(), 0.0);
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& theta = params[b].values;
    auto& g = grads[b].values;
    auto& v = velocity_[b];
    if (theta.size() != g.size() || theta.size() != v.size())
      throw std::invalid_argument("optimizer: block size mismatch at " + params[b].name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double dv = momentum_ * v[i] - learning_rate_ * g[i];
      v[i] = dv;
      theta[i] += momentum_ * dv - learning_rate_ * g[i];
    }
  }
}

GradCheckReport finite_diff_check(const std::vector<ParamRef>& params,
                                  const std::vector<ParamRef>& analytic_grads,
                                  const std::function<double()>& loss_fn, double step) {
  if (params.size() != analytic_grads.size())
    throw std::invalid_argument("finite_diff_check: block count mismatch");
  GradCheckReport report;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& theta = params[b].values;
    auto& g = analytic_grads[b].values;
    if (theta.size() != g.size())
      throw std::invalid_argument("finite_diff_check: block size mismatch at " + params[b].name);
    GradCheckBlock block{params[b].name, 0.0};
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + step;
      const double up = loss_fn();
      theta[i] = saved - step;
      const double down = loss_fn();
      theta[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double rel = std::abs(fd - g[i]) / std::max(1e-10, std::abs(fd) + std::abs(g[i]));
      block.max_rel_error = std::max(block.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace gnnroute
