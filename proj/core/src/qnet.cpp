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

#include "gnnroute/qnet.hpp"

#include <cmath>
#include <stdexcept>

#include "gnnroute/checkpoint.hpp"
#include "gnnroute/parallel.hpp"

namespace gnnroute {

QNetworkParams QNetworkParams::init(const QNetworkConfig& config, Rng& rng) {
  if (config.hidden_size < kLinkFeatureCount)
    throw std::invalid_argument("hidden_size must be >= " + std::to_string(kLinkFeatureCount));
  if (config.msg_steps < 1) throw std::invalid_argument("msg_steps must be >= 1");
  const int h = config.hidden_size;
  QNetworkParams params;
  params.hidden_size = h;
  params.msg_steps = config.msg_steps;
  params.msg_hidden = make_dense(2 * h, h, Activation::selu, rng);
  params.msg_out = make_dense(h, h, Activation::linear, rng);
  params.update = make_recurrent(h, rng);
  params.readout_hidden = make_dense(h, h, Activation::selu, rng);
  params.readout_out = make_dense(h, 1, Activation::linear, rng);
  // The output layer starts at zero so q-values begin at 0: early Bellman
  // targets reduce to the immediate reward (0 for blocked allocations),
  // which anchors action discrimination before the bootstrapped value
  // scale grows.
  params.readout_out.weights.fill(0.0);
  return params;
}

std::vector<ParamRef> QNetworkParams::parameter_refs() {
  std::vector<ParamRef> refs;
  auto append = [&](std::vector<ParamRef> block) {
    for (auto& r : block) refs.push_back(std::move(r));
  };
  append(gnnroute::parameter_refs(msg_hidden, "msg_hidden"));
  append(gnnroute::parameter_refs(msg_out, "msg_out"));
  append(gnnroute::parameter_refs(update, "update"));
  append(gnnroute::parameter_refs(readout_hidden, "readout_hidden"));
  append(gnnroute::parameter_refs(readout_out, "readout_out"));
  return refs;
}

std::vector<ConstParamRef> QNetworkParams::const_parameter_refs() const {
  auto refs = const_cast<QNetworkParams*>(this)->parameter_refs();
  std::vector<ConstParamRef> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back({r.name, r.values, r.rows, r.cols});
  return out;
}

QNetworkGrads QNetworkGrads::zeros_like(const QNetworkParams& params) {
  QNetworkGrads g;
  g.msg_hidden = gnnroute::zeros_like(params.msg_hidden);
  g.msg_out = gnnroute::zeros_like(params.msg_out);
  g.update = gnnroute::zeros_like(params.update);
  g.readout_hidden = gnnroute::zeros_like(params.readout_hidden);
  g.readout_out = gnnroute::zeros_like(params.readout_out);
  return g;
}

std::vector<ParamRef> QNetworkGrads::parameter_refs() {
  std::vector<ParamRef> refs;
  auto append = [&](std::vector<ParamRef> block) {
    for (auto& r : block) refs.push_back(std::move(r));
  };
  append(gnnroute::parameter_refs(msg_hidden, "msg_hidden"));
  append(gnnroute::parameter_refs(msg_out, "msg_out"));
  append(gnnroute::parameter_refs(update, "update"));
  append(gnnroute::parameter_refs(readout_hidden, "readout_hidden"));
  append(gnnroute::parameter_refs(readout_out, "readout_out"));
  return refs;
}

void QNetworkGrads::add(const QNetworkGrads& other) {
  auto mine = parameter_refs();
  auto theirs = const_cast<QNetworkGrads&>(other).parameter_refs();
  for (std::size_t b = 0; b < mine.size(); ++b)
    for (std::size_t i = 0; i < mine[b].values.size(); ++i)
      mine[b].values[i] += theirs[b].values[i];
}

void QNetworkGrads::scale(double factor) {
  for (auto& block : parameter_refs())
    for (double& v : block.values) v *= factor;
}

HiddenStates init_hidden_states(const EnvState& state, const CandidatePath& action,
                                const TrafficDemand& demand, int hidden_size) {
  if (hidden_size < kLinkFeatureCount)
    throw std::invalid_argument("hidden_size must hold the link features");
  const int link_count = state.link_count();
  const int one_hot = 2 + demand_size_index(demand.bandwidth);

  HiddenStates hidden(link_count, hidden_size);
  for (int l = 0; l < link_count; ++l) {
    double* row = hidden.row(l);
    row[0] = state.available(l) / state.max_capacity(l);
    row[1] = state.betweenness(l);
  }
  for (int l : action.link_sequence) hidden(l, one_hot) = 1.0;
  return hidden;
}

namespace {

// Intermediates of one message-passing step kept for the backward pass.
struct StepTrace {
  Mat h_in;     // states entering the step
  Mat u;        // left half of the message hidden layer + bias, per link
  Mat v;        // right half of the message hidden layer, per link
  Mat msg_sum;  // aggregated messages per link
  Mat z, r, c;  // recurrent gate values per link
};

struct ForwardTrace {
  std::vector<StepTrace> steps;
  Mat h_final;
  Vec readout_sum;
  Vec readout_hidden_out;
  double q = 0.0;
};

// One synchronous message-passing step. The message hidden layer input is
// the concatenation [h_l, h_i]; its contribution splits into a per-link
// "self" half u_l (including the bias) and "neighbor" half v_i, each
// computed once per link instead of once per message.
void step_forward(Mat& hidden, const std::vector<std::vector<int>>& adjacency,
                  const QNetworkParams& params, StepTrace* trace) {
  const int link_count = hidden.rows;
  const int h = params.hidden_size;
  const Mat& w1 = params.msg_hidden.weights;
  const Vec& b1 = params.msg_hidden.bias;

  Mat u(link_count, h), v(link_count, h);
  for (int l = 0; l < link_count; ++l) {
    const double* hl = hidden.row(l);
    double* ul = u.row(l);
    double* vl = v.row(l);
    for (int r = 0; r < h; ++r) {
      const double* wr = w1.row(r);
      double acc_u = b1[r];
      double acc_v = 0.0;
      for (int c = 0; c < h; ++c) {
        acc_u += wr[c] * hl[c];
        acc_v += wr[h + c] * hl[c];
      }
      ul[r] = acc_u;
      vl[r] = acc_v;
    }
  }

  Mat msg_sum(link_count, h);
  Vec z1(h), a1(h);
  for (int l = 0; l < link_count; ++l) {
    double* ml = msg_sum.row(l);
    for (int i : adjacency[l]) {
      const double* ul = u.row(l);
      const double* vi = v.row(i);
      for (int r = 0; r < h; ++r) a1[r] = selu(ul[r] + vi[r]);
      for (int r = 0; r < h; ++r) ml[r] += params.msg_out.bias[r];
      matvec_add(params.msg_out.weights, a1, std::span<double>(ml, static_cast<std::size_t>(h)));
    }
  }

  Mat h_next(link_count, h);
  Mat zs(link_count, h), rs(link_count, h), cs(link_count, h);
  for (int l = 0; l < link_count; ++l) {
    recurrent_forward_spans(params.update, {hidden.row(l), static_cast<std::size_t>(h)},
                            {msg_sum.row(l), static_cast<std::size_t>(h)},
                            {zs.row(l), static_cast<std::size_t>(h)},
                            {rs.row(l), static_cast<std::size_t>(h)},
                            {cs.row(l), static_cast<std::size_t>(h)},
                            {h_next.row(l), static_cast<std::size_t>(h)});
  }

  if (trace) {
    trace->h_in = std::move(hidden);
    trace->u = std::move(u);
    trace->v = std::move(v);
    trace->msg_sum = std::move(msg_sum);
    trace->z = std::move(zs);
    trace->r = std::move(rs);
    trace->c = std::move(cs);
  }
  hidden = std::move(h_next);
}

double forward(const Topology& topo, const EnvState& state, const TrafficDemand& demand,
               const CandidatePath& action, const QNetworkParams& params, ForwardTrace* trace) {
  if (action.src() != demand.src || action.dst() != demand.dst)
    throw std::invalid_argument("q_value: action path does not join the demand endpoints");
  if (state.link_count() != topo.link_count())
    throw std::invalid_argument("q_value: state size does not match topology");

  const int h = params.hidden_size;
  Mat hidden = init_hidden_states(state, action, demand, h);
  if (trace) trace->steps.resize(params.msg_steps);
  for (int t = 0; t < params.msg_steps; ++t)
    step_forward(hidden, topo.link_adjacency(), params, trace ? &trace->steps[t] : nullptr);

  Vec sum(h, 0.0);
  for (int l = 0; l < hidden.rows; ++l) {
    const double* row = hidden.row(l);
    for (int r = 0; r < h; ++r) sum[r] += row[r];
  }
  Vec hid = dense_apply(params.readout_hidden, sum);
  Vec out = dense_apply(params.readout_out, hid);

  if (trace) {
    trace->h_final = std::move(hidden);
    trace->readout_sum = std::move(sum);
    trace->readout_hidden_out = std::move(hid);
    trace->q = out[0];
  }
  return out[0];
}

// Reverse-mode pass for one sample; dl_dq is the loss gradient at the scalar
// output. Parameter gradients accumulate into `grads`.
void backward(const Topology& topo, const QNetworkParams& params, const ForwardTrace& trace,
              double dl_dq, QNetworkGrads& grads) {
  const int h = params.hidden_size;
  const int link_count = trace.h_final.rows;
  const auto& adjacency = topo.link_adjacency();

  // Readout: q = readout_out(readout_hidden(sum)).
  Vec dq{dl_dq};
  Vec d_hid(h, 0.0);
  dense_backward(params.readout_out, trace.readout_hidden_out, {&trace.q, 1}, dq,
                 grads.readout_out, d_hid);
  Vec d_sum(h, 0.0);
  dense_backward(params.readout_hidden, trace.readout_sum, trace.readout_hidden_out, d_hid,
                 grads.readout_hidden, d_sum);

  // The element-wise sum readout sends the same gradient to every link.
  Mat dh(link_count, h);
  for (int l = 0; l < link_count; ++l)
    std::copy(d_sum.begin(), d_sum.end(), dh.row(l));

  const Mat& w1 = params.msg_hidden.weights;
  Vec a1(h), dz1(h), da1(h);
  for (int t = params.msg_steps - 1; t >= 0; --t) {
    const StepTrace& st = trace.steps[t];
    Mat dh_prev(link_count, h);
    Mat d_msg(link_count, h);
    for (int l = 0; l < link_count; ++l) {
      recurrent_backward_spans(params.update, {st.h_in.row(l), static_cast<std::size_t>(h)},
                               {st.msg_sum.row(l), static_cast<std::size_t>(h)},
                               {st.z.row(l), static_cast<std::size_t>(h)},
                               {st.r.row(l), static_cast<std::size_t>(h)},
                               {st.c.row(l), static_cast<std::size_t>(h)},
                               {dh.row(l), static_cast<std::size_t>(h)}, grads.update,
                               {dh_prev.row(l), static_cast<std::size_t>(h)},
                               {d_msg.row(l), static_cast<std::size_t>(h)});
    }

    // Messages: every message to link l carries the same output gradient
    // d_msg[l]; the hidden-layer gradient splits into du (self half, owns
    // the bias) and dv (neighbor half).
    Mat du(link_count, h), dv(link_count, h);
    for (int l = 0; l < link_count; ++l) {
      if (adjacency[l].empty()) continue;
      const std::span<const double> dml{d_msg.row(l), static_cast<std::size_t>(h)};
      std::fill(da1.begin(), da1.end(), 0.0);
      matvec_transpose_add(params.msg_out.weights, dml, da1);
      for (int r = 0; r < h; ++r) grads.msg_out.bias[r] += dml[r] * adjacency[l].size();
      const double* ul = st.u.row(l);
      double* dul = du.row(l);
      for (int i : adjacency[l]) {
        const double* vi = st.v.row(i);
        for (int r = 0; r < h; ++r) a1[r] = selu(ul[r] + vi[r]);
        outer_add(grads.msg_out.weights, dml, a1);
        double* dvi = dv.row(i);
        for (int r = 0; r < h; ++r) {
          dz1[r] = da1[r] * selu_derivative_from_output(a1[r]);
          dul[r] += dz1[r];
          dvi[r] += dz1[r];
        }
      }
    }

    // Fold du/dv into the hidden-layer parameter grads and the incoming
    // state gradients.
    for (int l = 0; l < link_count; ++l) {
      const double* hl = st.h_in.row(l);
      const double* dul = du.row(l);
      const double* dvl = dv.row(l);
      double* dhp = dh_prev.row(l);
      for (int r = 0; r < h; ++r) {
        grads.msg_hidden.bias[r] += dul[r];
        double* gw = grads.msg_hidden.weights.row(r);
        const double* wr = w1.row(r);
        const double dur = dul[r];
        const double dvr = dvl[r];
        for (int c = 0; c < h; ++c) {
          gw[c] += dur * hl[c];
          gw[h + c] += dvr * hl[c];
          dhp[c] += wr[c] * dur + wr[h + c] * dvr;
        }
      }
    }
    dh = std::move(dh_prev);
  }
  // dh now holds gradients w.r.t. the input features, which are not
  // learnable; nothing further to propagate.
}

}  // namespace

void message_pass(HiddenStates& hidden, const std::vector<std::vector<int>>& link_adjacency,
                  const QNetworkParams& params) {
  if (static_cast<std::size_t>(hidden.rows) != link_adjacency.size())
    throw std::invalid_argument("message_pass: adjacency does not match hidden state rows");
  step_forward(hidden, link_adjacency, params, nullptr);
}

double q_value(const Topology& topo, const EnvState& state, const TrafficDemand& demand,
               const CandidatePath& action, const QNetworkParams& params) {
  return forward(topo, state, demand, action, params, nullptr);
}

QBatchResult q_gradients(const Topology& topo, std::span<const QTrainingExample> batch,
                         const QNetworkParams& params) {
  if (batch.empty()) throw std::invalid_argument("q_gradients: empty batch");
  const std::size_t n = batch.size();

  std::vector<QNetworkGrads> per_sample(n);
  std::vector<double> sq_error(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const auto& ex = batch[i];
    ForwardTrace trace;
    const double q = forward(topo, *ex.state, *ex.demand, *ex.action, params, &trace);
    const double err = q - ex.target;
    sq_error[i] = err * err;
    per_sample[i] = QNetworkGrads::zeros_like(params);
    backward(topo, params, trace, 2.0 * err, per_sample[i]);
  });

  QBatchResult result;
  result.grads = std::move(per_sample[0]);
  for (std::size_t i = 1; i < n; ++i) result.grads.add(per_sample[i]);
  result.grads.scale(1.0 / static_cast<double>(n));
  for (double e : sq_error) result.mse += e;
  result.mse /= static_cast<double>(n);
  return result;
}

void save_qnetwork(const std::filesystem::path& file, const QNetworkParams& params,
                   const std::map<std::string, std::string>& extra_fields) {
  std::map<std::string, std::string> fields = extra_fields;
  fields["hidden_size"] = std::to_string(params.hidden_size);
  fields["msg_steps"] = std::to_string(params.msg_steps);
  fields["feature_layout"] = std::to_string(kFeatureLayoutVersion);
  write_param_container(file, fields, params.const_parameter_refs());
}

LoadedQNetwork load_qnetwork(const std::filesystem::path& file) {
  LoadedContainer container = read_param_container(file);
  const int layout = container.int_field("feature_layout");
  if (layout != kFeatureLayoutVersion)
    throw CheckpointError(file.string() + ": feature layout v" + std::to_string(layout) +
                          " incompatible with v" + std::to_string(kFeatureLayoutVersion));

  QNetworkConfig config;
  config.hidden_size = container.int_field("hidden_size");
  config.msg_steps = container.int_field("msg_steps");
  Rng scratch(0);
  LoadedQNetwork loaded;
  loaded.params = QNetworkParams::init(config, scratch);
  loaded.fields = container.fields;

  auto refs = loaded.params.parameter_refs();
  if (refs.size() != container.array_names.size())
    throw CheckpointError(file.string() + ": unexpected array count");
  for (auto& ref : refs) {
    auto it = container.arrays.find(ref.name);
    if (it == container.arrays.end())
      throw CheckpointError(file.string() + ": missing array " + ref.name);
    const LoadedArray& a = it->second;
    if (a.rows != ref.rows || a.cols != ref.cols)
      throw CheckpointError(file.string() + ": shape mismatch for " + ref.name);
    std::copy(a.data.begin(), a.data.end(), ref.values.begin());
  }
  return loaded;
}

}  // namespace gnnroute
