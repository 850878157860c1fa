/*
 * Copyright 2026 The irdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Small conditional encoder-decoder predicting (drift, noise) from
// [x_t, condition channels, t]. Three resolutions, skip connections by
// concatenation, SiLU activations, 3x3 convs via im2col + GEMM.
//
//   32: conv(in->c) conv(c->c) ----------------------------- cat -> conv(3c->c) -> 1x1(c->2)
//   16:    pool conv(c->2c) conv(2c->2c) ------ cat -> conv(4c->2c) -^ up
//    8:       pool conv(2c->2c) conv(2c->2c) -^ up
//
// Activations are (channels x pixels) column-major matrices; pixel index
// is (b * h + y) * w + x.

#ifndef IRDKIT_UNET_HPP_
#define IRDKIT_UNET_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdkit/common.hpp"
#include "irdkit/ddm.hpp"
#include "irdkit/priors.hpp"
#include "irdkit/radiomap.hpp"
#include "irdkit/scene_io.hpp"

namespace irdkit {

inline constexpr int kNetInputChannels = 1 + kConditionChannels + 1;  // x_t, condition, t plane
inline constexpr int kNetOutputChannels = 2;                          // drift, noise

namespace nn {

struct Act {
  int b = 0, h = 0, w = 0;
  Eigen::MatrixXf m;  // channels x (b*h*w)
};

struct Conv {
  int cin = 0, cout = 0, k = 3;
  Eigen::MatrixXf w;  // cout x (k*k*cin), column index = tap * cin + ci
  Eigen::VectorXf b;

  Eigen::Index param_count() const { return w.size() + b.size(); }
};

inline Eigen::MatrixXf im2col3(const Act& in) {
  const int c = static_cast<int>(in.m.rows());
  Eigen::MatrixXf col(9 * c, in.m.cols());
  const float* src = in.m.data();
  float* dst = col.data();
  for (int bi = 0; bi < in.b; ++bi)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        for (int tap = 0; tap < 9; ++tap) {
          const int yy = y + tap / 3 - 1, xx = x + tap % 3 - 1;
          if (yy < 0 || yy >= in.h || xx < 0 || xx >= in.w) {
            std::fill_n(dst, c, 0.0f);
          } else {
            std::copy_n(src + static_cast<std::ptrdiff_t>(((bi * in.h + yy) * in.w + xx)) * c, c, dst);
          }
          dst += c;
        }
      }
  return col;
}

inline void col2im3_add(const Eigen::MatrixXf& dcol, Act& din) {
  const int c = static_cast<int>(din.m.rows());
  const float* src = dcol.data();
  float* dst = din.m.data();
  for (int bi = 0; bi < din.b; ++bi)
    for (int y = 0; y < din.h; ++y)
      for (int x = 0; x < din.w; ++x) {
        for (int tap = 0; tap < 9; ++tap) {
          const int yy = y + tap / 3 - 1, xx = x + tap % 3 - 1;
          if (yy >= 0 && yy < din.h && xx >= 0 && xx < din.w) {
            float* d = dst + static_cast<std::ptrdiff_t>(((bi * din.h + yy) * din.w + xx)) * c;
            for (int i = 0; i < c; ++i) d[i] += src[i];
          }
          src += c;
        }
      }
}

inline Act pool2(const Act& in) {
  Act out{in.b, in.h / 2, in.w / 2, Eigen::MatrixXf(in.m.rows(), Eigen::Index(in.b) * (in.h / 2) * (in.w / 2))};
  for (int bi = 0; bi < out.b; ++bi)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) {
        const Eigen::Index q = (bi * in.h + 2 * y) * in.w + 2 * x;
        out.m.col((bi * out.h + y) * out.w + x) =
            0.25f * (in.m.col(q) + in.m.col(q + 1) + in.m.col(q + in.w) + in.m.col(q + in.w + 1));
      }
  return out;
}

inline Act pool2_backward(const Act& dout, int h, int w) {
  Act din{dout.b, h, w, Eigen::MatrixXf(dout.m.rows(), Eigen::Index(dout.b) * h * w)};
  for (int bi = 0; bi < dout.b; ++bi)
    for (int y = 0; y < dout.h; ++y)
      for (int x = 0; x < dout.w; ++x) {
        const Eigen::Index q = (bi * h + 2 * y) * w + 2 * x;
        const auto g = 0.25f * dout.m.col((bi * dout.h + y) * dout.w + x);
        din.m.col(q) = g;
        din.m.col(q + 1) = g;
        din.m.col(q + w) = g;
        din.m.col(q + w + 1) = g;
      }
  return din;
}

inline Act up2(const Act& in) {
  Act out{in.b, in.h * 2, in.w * 2, Eigen::MatrixXf(in.m.rows(), Eigen::Index(in.b) * in.h * in.w * 4)};
  for (int bi = 0; bi < out.b; ++bi)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x)
        out.m.col((bi * out.h + y) * out.w + x) = in.m.col((bi * in.h + y / 2) * in.w + x / 2);
  return out;
}

inline Act up2_backward(const Act& dout) {
  const int h = dout.h / 2, w = dout.w / 2;
  Act din{dout.b, h, w, Eigen::MatrixXf::Zero(dout.m.rows(), Eigen::Index(dout.b) * h * w)};
  for (int bi = 0; bi < dout.b; ++bi)
    for (int y = 0; y < dout.h; ++y)
      for (int x = 0; x < dout.w; ++x)
        din.m.col((bi * h + y / 2) * w + x / 2) += dout.m.col((bi * dout.h + y) * dout.w + x);
  return din;
}

inline Act concat(const Act& a, const Act& b) {
  Act out{a.b, a.h, a.w, Eigen::MatrixXf(a.m.rows() + b.m.rows(), a.m.cols())};
  out.m.topRows(a.m.rows()) = a.m;
  out.m.bottomRows(b.m.rows()) = b.m;
  return out;
}

inline Act rows(const Act& a, Eigen::Index first, Eigen::Index count) {
  return Act{a.b, a.h, a.w, a.m.middleRows(first, count)};
}

inline Act silu(const Act& z) {
  Act a = z;
  a.m = (z.m.array() / (1.0f + (-z.m.array()).exp())).matrix();
  return a;
}

inline Act silu_backward(const Act& da, const Act& z) {
  Act dz = da;
  const Eigen::ArrayXXf s = 1.0f / (1.0f + (-z.m.array()).exp());
  dz.m = (da.m.array() * s * (1.0f + z.m.array() * (1.0f - s))).matrix();
  return dz;
}

/// Forward conv; stores the im2col matrix in *col_out when given.
inline Act conv_forward(const Conv& cv, const Act& in, Eigen::MatrixXf* col_out) {
  Act out{in.b, in.h, in.w, {}};
  if (cv.k == 1) {
    out.m = cv.w * in.m;
    if (col_out) *col_out = in.m;
  } else {
    Eigen::MatrixXf col = im2col3(in);
    out.m = cv.w * col;
    if (col_out) *col_out = std::move(col);
  }
  out.m.colwise() += cv.b;
  return out;
}

/// Accumulates weight gradients; returns d(input) unless need_input is false.
inline Act conv_backward(const Conv& cv, const Act& dout, const Eigen::MatrixXf& col, Conv& grad, bool need_input) {
  grad.w.noalias() += dout.m * col.transpose();
  grad.b += dout.m.rowwise().sum();
  Act din{dout.b, dout.h, dout.w, {}};
  if (!need_input) return din;
  if (cv.k == 1) {
    din.m = cv.w.transpose() * dout.m;
  } else {
    const Eigen::MatrixXf dcol = cv.w.transpose() * dout.m;
    din.m = Eigen::MatrixXf::Zero(cv.cin, dout.m.cols());
    col2im3_add(dcol, din);
  }
  return din;
}

}  // namespace nn

struct NetArch {
  int in_channels = kNetInputChannels;
  int base_channels = 16;

  friend bool operator==(const NetArch&, const NetArch&) = default;
};

class CondUNet {
 public:
  static constexpr int kLayers = 9;

  CondUNet() = default;

  CondUNet(NetArch arch, std::uint64_t seed) : arch_(arch) {
    if (arch.in_channels < 1 || arch.base_channels < 1) throw ConfigError("network channels must be positive");
    const int c = arch.base_channels, i = arch.in_channels;
    const int spec[kLayers][3] = {{i, c, 3},         {c, c, 3},         {c, 2 * c, 3},
                                  {2 * c, 2 * c, 3}, {2 * c, 2 * c, 3}, {2 * c, 2 * c, 3},
                                  {4 * c, 2 * c, 3}, {3 * c, c, 3},     {c, kNetOutputChannels, 1}};
    Rng rng(seed);
    for (int l = 0; l < kLayers; ++l) {
      nn::Conv& cv = layers_[l];
      cv.cin = spec[l][0];
      cv.cout = spec[l][1];
      cv.k = spec[l][2];
      const int fan_in = cv.k * cv.k * cv.cin;
      const double a = (l == kLayers - 1 ? 0.1 : 1.0) * std::sqrt(6.0 / fan_in);
      cv.w.resize(cv.cout, fan_in);
      for (Eigen::Index j = 0; j < cv.w.size(); ++j) cv.w.data()[j] = static_cast<float>(rng.uniform(-a, a));
      cv.b = Eigen::VectorXf::Zero(cv.cout);
    }
  }

  const NetArch& arch() const { return arch_; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.param_count());
    return n;
  }

  /// Flattened parameters in layer order, weights then bias.
  std::vector<float> parameters() const {
    std::vector<float> out;
    out.reserve(param_count());
    for (const auto& l : layers_) {
      out.insert(out.end(), l.w.data(), l.w.data() + l.w.size());
      out.insert(out.end(), l.b.data(), l.b.data() + l.b.size());
    }
    return out;
  }

  void set_parameters(const std::vector<float>& p) {
    if (p.size() != param_count()) throw ShapeError("parameter blob size does not match architecture");
    std::size_t k = 0;
    for (auto& l : layers_) {
      std::copy_n(p.data() + k, l.w.size(), l.w.data());
      k += static_cast<std::size_t>(l.w.size());
      std::copy_n(p.data() + k, l.b.size(), l.b.data());
      k += static_cast<std::size_t>(l.b.size());
    }
  }

  /// Zero-valued gradient holder with matching shapes.
  std::array<nn::Conv, kLayers> zero_like() const {
    std::array<nn::Conv, kLayers> g = layers_;
    for (auto& l : g) {
      l.w.setZero();
      l.b.setZero();
    }
    return g;
  }

  std::array<nn::Conv, kLayers>& layers() { return layers_; }
  const std::array<nn::Conv, kLayers>& layers() const { return layers_; }

  struct Tape {
    nn::Act z[kLayers];
    Eigen::MatrixXf col[kLayers];
  };

  /// input: in_channels x (b*h*w); h and w divisible by 4.
  nn::Act forward(const nn::Act& input, Tape* tape) const {
    if (input.m.rows() != arch_.in_channels) throw ShapeError("network input channel count mismatch");
    if (input.h % 4 != 0 || input.w % 4 != 0) throw ShapeError("network input size must be divisible by 4");
    auto step = [&](int l, const nn::Act& in) {
      nn::Act z = nn::conv_forward(layers_[l], in, tape ? &tape->col[l] : nullptr);
      nn::Act a = nn::silu(z);
      if (tape) tape->z[l] = std::move(z);
      return a;
    };
    const nn::Act a1 = step(0, input);
    const nn::Act a2 = step(1, a1);
    const nn::Act a3 = step(2, nn::pool2(a2));
    const nn::Act a4 = step(3, a3);
    const nn::Act a5 = step(4, nn::pool2(a4));
    const nn::Act a6 = step(5, a5);
    const nn::Act a7 = step(6, nn::concat(nn::up2(a6), a4));
    const nn::Act a8 = step(7, nn::concat(nn::up2(a7), a2));
    return nn::conv_forward(layers_[8], a8, tape ? &tape->col[8] : nullptr);
  }

  /// Accumulates parameter gradients of <dout, output> into grad.
  void backward(const nn::Act& dout, const Tape& tape, std::array<nn::Conv, kLayers>& grad) const {
    const int c = arch_.base_channels;
    auto back = [&](int l, const nn::Act& da, bool need_input) {
      return nn::conv_backward(layers_[l], nn::silu_backward(da, tape.z[l]), tape.col[l], grad[l], need_input);
    };
    const nn::Act d8 = nn::conv_backward(layers_[8], dout, tape.col[8], grad[8], true);
    const nn::Act du1 = back(7, d8, true);  // [up(a7) ; a2]
    nn::Act da2 = nn::rows(du1, 2 * c, c);
    const nn::Act du2 = back(6, nn::up2_backward(nn::rows(du1, 0, 2 * c)), true);  // [up(a6) ; a4]
    nn::Act da4 = nn::rows(du2, 2 * c, 2 * c);
    const nn::Act da5 = back(5, nn::up2_backward(nn::rows(du2, 0, 2 * c)), true);
    const nn::Act dp2 = back(4, da5, true);
    da4.m += nn::pool2_backward(dp2, da4.h, da4.w).m;
    const nn::Act da3 = back(3, da4, true);
    const nn::Act dp1 = back(2, da3, true);
    da2.m += nn::pool2_backward(dp1, da2.h, da2.w).m;
    const nn::Act da1 = back(1, da2, true);
    back(0, da1, false);
  }

 private:
  NetArch arch_;
  std::array<nn::Conv, kLayers> layers_;
};

// ---------------------------------------------------------------------------
// Input packing

namespace detail {

inline void pack_sample(nn::Act& in, int bi, const Grid<float>& x_t, double t, const ConditionStack& cond) {
  const int hw = x_t.width() * x_t.height();
  const int ch = static_cast<int>(in.m.rows());
  for (int p = 0; p < hw; ++p) {
    float* col = in.m.data() + static_cast<std::ptrdiff_t>(bi * hw + p) * ch;
    col[0] = x_t.data()[static_cast<std::size_t>(p)];
    for (int k = 0; k < kConditionChannels; ++k) col[1 + k] = cond.channels[static_cast<std::size_t>(k)].data()[static_cast<std::size_t>(p)];
    col[ch - 1] = static_cast<float>(t);
  }
}

}  // namespace detail

class UNetPredictor : public Predictor {
 public:
  explicit UNetPredictor(CondUNet net) : net_(std::move(net)) {}

  const CondUNet& net() const { return net_; }

  Prediction predict(const Grid<float>& x_t, double t, const ConditionStack& cond) const override {
    for (const auto& ch : cond.channels) require_same_shape(x_t, ch, "predict");
    nn::Act in{1, x_t.height(), x_t.width(), Eigen::MatrixXf(kNetInputChannels, Eigen::Index(x_t.size()))};
    detail::pack_sample(in, 0, x_t, t, cond);
    const nn::Act out = net_.forward(in, nullptr);
    Prediction p{Grid<float>(x_t.width(), x_t.height()), Grid<float>(x_t.width(), x_t.height())};
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      p.drift.data()[i] = out.m(0, static_cast<Eigen::Index>(i));
      p.noise.data()[i] = out.m(1, static_cast<Eigen::Index>(i));
    }
    return p;
  }

 private:
  CondUNet net_;
};

// ---------------------------------------------------------------------------
// Training

enum class OptimizerKind { kSgd, kAdam };

inline std::string to_string(OptimizerKind o) { return o == OptimizerKind::kSgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  double w_b = 4.0;
  int rho = 1;
  double p_min = kDefaultPMin;
  double p_max = kDefaultPMax;
  int base_channels = 16;
  OptimizerKind optimizer = OptimizerKind::kSgd;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (!(w_b >= 1.0)) throw ConfigError("w_b must be >= 1");
    if (rho < 0) throw ConfigError("rho must be >= 0");
    if (!(p_min < p_max)) throw ConfigError("p_min must be below p_max");
    if (base_channels < 1) throw ConfigError("base_channels must be >= 1");
  }
};

inline std::string describe(const TrainConfig& c) {
  std::ostringstream os;
  os << "epochs=" << c.epochs << "\n"
     << "batch_size=" << c.batch_size << "\n"
     << "learning_rate=" << format_double(c.learning_rate) << "\n"
     << "seed=" << c.seed << "\n"
     << "w_b=" << format_double(c.w_b) << "\n"
     << "rho=" << c.rho << "\n"
     << "p_min=" << format_double(c.p_min) << "\n"
     << "p_max=" << format_double(c.p_max) << "\n"
     << "base_channels=" << c.base_channels << "\n"
     << "optimizer=" << to_string(c.optimizer) << "\n";
  return os.str();
}

struct TrainingExample {
  ConditionStack cond;
  Grid<float> x0;       // normalized map
  Grid<float> weights;  // boundary weight map
};

struct LossPoint {
  int epoch = 0;
  int step = 0;
  double loss = 0.0;

  friend bool operator==(const LossPoint&, const LossPoint&) = default;
};

struct TrainResult {
  CondUNet net;
  std::vector<LossPoint> curve;
};

namespace detail {

inline void check_examples(const std::vector<TrainingExample>& data) {
  if (data.empty()) throw ValidationError("training set is empty");
  const int w = data.front().x0.width(), h = data.front().x0.height();
  for (const auto& e : data) {
    if (e.x0.width() != w || e.x0.height() != h) throw ShapeError("training maps differ in shape");
    require_same_shape(e.x0, e.weights, "training example");
    for (const auto& ch : e.cond.channels) require_same_shape(e.x0, ch, "training example");
  }
}

struct Draw {
  double t = 1.0;
  Grid<float> x_t, eps;
};

/// Loss and gradient of the weighted objective for one batch.
inline double batch_loss(const CondUNet& net, const std::vector<const TrainingExample*>& batch,
                         const std::vector<Draw>& draws, std::array<nn::Conv, CondUNet::kLayers>* grad) {
  const int b = static_cast<int>(batch.size());
  const int w = batch.front()->x0.width(), h = batch.front()->x0.height();
  const Eigen::Index hw = Eigen::Index(w) * h;
  nn::Act in{b, h, w, Eigen::MatrixXf(kNetInputChannels, hw * b)};
  for (int i = 0; i < b; ++i) pack_sample(in, i, draws[i].x_t, draws[i].t, batch[i]->cond);
  CondUNet::Tape tape;
  const nn::Act out = net.forward(in, grad ? &tape : nullptr);
  nn::Act dout{b, h, w, Eigen::MatrixXf(kNetOutputChannels, hw * b)};
  const double norm = 1.0 / static_cast<double>(hw * b);
  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    const auto& ex = *batch[i];
    for (Eigen::Index p = 0; p < hw; ++p) {
      const Eigen::Index q = i * hw + p;
      const double wt = ex.weights.data()[p];
      const double ef = static_cast<double>(out.m(0, q)) + ex.x0.data()[p];
      const double ee = static_cast<double>(out.m(1, q)) - draws[i].eps.data()[p];
      total += wt * (ef * ef + ee * ee);
      dout.m(0, q) = static_cast<float>(2.0 * wt * ef * norm);
      dout.m(1, q) = static_cast<float>(2.0 * wt * ee * norm);
    }
  }
  if (grad) net.backward(dout, tape, *grad);
  return total * norm;
}

}  // namespace detail

/// Weighted objective on fixed draws: for each example, `draws_per_example`
/// times evenly spaced over [t_min, 1] with noise from `seed`.
inline double evaluate_loss(const CondUNet& net, const std::vector<TrainingExample>& data, int draws_per_example,
                            std::uint64_t seed) {
  detail::check_examples(data);
  Rng rng(seed);
  double sum = 0.0;
  int n = 0;
  for (const auto& ex : data)
    for (int k = 0; k < draws_per_example; ++k) {
      const double t = draws_per_example == 1 ? 0.5 : kTMin + (1.0 - kTMin) * k / (draws_per_example - 1);
      ForwardDraw fd = forward_sample(ex.x0, t, rng);
      std::vector<detail::Draw> d{{t, std::move(fd.x_t), std::move(fd.eps)}};
      sum += detail::batch_loss(net, {&ex}, d, nullptr);
      ++n;
    }
  return sum / n;
}

inline TrainResult train(const std::vector<TrainingExample>& data, const TrainConfig& config) {
  config.validate();
  detail::check_examples(data);
  if (data.front().x0.width() % 4 != 0 || data.front().x0.height() % 4 != 0)
    throw ShapeError("map size must be divisible by 4");

  TrainResult result{CondUNet(NetArch{kNetInputChannels, config.base_channels}, mix_seed(config.seed, 1)), {}};
  CondUNet& net = result.net;
  Rng rng(mix_seed(config.seed, 2));

  auto moment1 = net.zero_like(), moment2 = net.zero_like();
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  int step = 0;

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const TrainingExample*> batch;
      std::vector<detail::Draw> draws;
      for (std::size_t k = start; k < end; ++k) {
        const TrainingExample& ex = data[order[k]];
        const double t = rng.uniform(kTMin, 1.0);
        ForwardDraw fd = forward_sample(ex.x0, t, rng);
        batch.push_back(&ex);
        draws.push_back({t, std::move(fd.x_t), std::move(fd.eps)});
      }
      auto grad = net.zero_like();
      const double loss = detail::batch_loss(net, batch, draws, &grad);
      ++step;
      result.curve.push_back({epoch, step, loss});
      auto& layers = net.layers();
      if (config.optimizer == OptimizerKind::kSgd) {
        const float lr = static_cast<float>(config.learning_rate);
        for (int l = 0; l < CondUNet::kLayers; ++l) {
          layers[l].w -= lr * grad[l].w;
          layers[l].b -= lr * grad[l].b;
        }
      } else {
        const double c1 = 1.0 - std::pow(beta1, step), c2 = 1.0 - std::pow(beta2, step);
        const float lr = static_cast<float>(config.learning_rate * std::sqrt(c2) / c1);
        auto update = [&](Eigen::Ref<Eigen::ArrayXXf> p, const Eigen::ArrayXXf& g, Eigen::Ref<Eigen::ArrayXXf> m,
                          Eigen::Ref<Eigen::ArrayXXf> v) {
          m = float(beta1) * m + float(1.0 - beta1) * g;
          v = float(beta2) * v + float(1.0 - beta2) * g.square();
          p -= lr * m / (v.sqrt() + float(adam_eps));
        };
        for (int l = 0; l < CondUNet::kLayers; ++l) {
          update(layers[l].w.array(), grad[l].w.array(), moment1[l].w.array(), moment2[l].w.array());
          update(layers[l].b.array(), grad[l].b.array(), moment1[l].b.array(), moment2[l].b.array());
        }
      }
    }
  }
  return result;
}

inline std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
  std::ostringstream os;
  os << "epoch,step,loss\n";
  for (const auto& p : curve) os << p.epoch << "," << p.step << "," << format_double(p.loss) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Checkpoint: "IRDNET1\n", u32 LE header length, JSON header, f32 LE blob.

inline constexpr char kCheckpointMagic[] = "IRDNET1\n";

struct Checkpoint {
  CondUNet net;
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline std::string encode_checkpoint(const Checkpoint& ck) {
  nlohmann::ordered_json header;
  header["format"] = 1;
  header["arch"] = {{"name", "cond-unet-3"},
                    {"in_channels", ck.net.arch().in_channels},
                    {"base_channels", ck.net.arch().base_channels},
                    {"out_channels", kNetOutputChannels},
                    {"params", ck.net.param_count()}};
  header["config_hash"] = ck.config_hash;
  header["seed"] = ck.seed;
  const std::string h = header.dump();
  std::string out(kCheckpointMagic);
  detail::put_u32(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  for (float v : ck.net.parameters()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
  using K = ParseError::Kind;
  const std::size_t m = sizeof(kCheckpointMagic) - 1;
  if (bytes.size() < m || bytes.compare(0, m, kCheckpointMagic) != 0) throw ParseError(K::kMalformedHeader, "not an IRDNET1 checkpoint");
  if (bytes.size() < m + 4) throw ParseError(K::kTruncated, "checkpoint header truncated");
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t hl = detail::get_u32(raw + m);
  if (bytes.size() < m + 4 + hl) throw ParseError(K::kTruncated, "checkpoint header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(m + 4, hl));
  } catch (const std::exception& e) {
    throw ParseError(K::kMalformedHeader, std::string("checkpoint header: ") + e.what());
  }
  Checkpoint ck;
  try {
    if (header.at("format").get<int>() != 1) throw ParseError(K::kMalformedHeader, "unsupported checkpoint version");
    const auto& a = header.at("arch");
    ck.net = CondUNet(NetArch{a.at("in_channels").get<int>(), a.at("base_channels").get<int>()}, 0);
    ck.config_hash = header.at("config_hash").get<std::string>();
    ck.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(K::kMalformedHeader, std::string("checkpoint header: ") + e.what());
  }
  const std::size_t n = ck.net.param_count();
  const std::size_t off = m + 4 + hl;
  if (bytes.size() < off + 4 * n) throw ParseError(K::kTruncated, "checkpoint parameters truncated");
  if (bytes.size() > off + 4 * n) throw ParseError(K::kDimensionMismatch, "trailing bytes after parameters");
  std::vector<float> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::bit_cast<float>(detail::get_u32(raw + off + 4 * i));
    if (!std::isfinite(p[i])) throw ParseError(K::kInvalidValue, "non-finite parameter");
  }
  ck.net.set_parameters(p);
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) { write_file_bytes(path, encode_checkpoint(ck)); }

inline Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file_bytes(path)); }

}  // namespace irdkit

#endif  // IRDKIT_UNET_HPP_
