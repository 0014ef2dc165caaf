#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dentobox/errors.hpp"

namespace dentobox {

// Dense (channels, height, width) tensor, row-major within each channel.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0.0) {
    if (c <= 0 || h <= 0 || w <= 0)
      throw invariant_error("tensor: non-positive shape");
  }

  double& at(int c, int i, int j) {
    return data[(static_cast<std::size_t>(c) * height + i) * width + j];
  }
  double at(int c, int i, int j) const {
    return data[(static_cast<std::size_t>(c) * height + i) * width + j];
  }
  bool same_shape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

namespace detail {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
inline double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace detail

// Excitation weights for the squeeze blocks. reduce_w is [reduced][channels],
// expand_w is [channels][reduced], spatial_w one weight per channel.
struct SqueezeParams {
  int channels = 0;
  int reduced = 0;
  std::vector<std::vector<double>> reduce_w;
  std::vector<double> reduce_b;
  std::vector<std::vector<double>> expand_w;
  std::vector<double> expand_b;
  std::vector<double> spatial_w;
  double spatial_b = 0.0;

  static SqueezeParams zeros(int channels, int reduction) {
    if (channels <= 0 || reduction < 1)
      throw invariant_error("squeeze params: bad channels/reduction");
    if (channels % reduction != 0)
      throw invariant_error("squeeze params: reduction " +
                            std::to_string(reduction) + " does not divide " +
                            std::to_string(channels) + " channels");
    SqueezeParams p;
    p.channels = channels;
    p.reduced = channels / reduction;
    p.reduce_w.assign(p.reduced, std::vector<double>(channels, 0.0));
    p.reduce_b.assign(p.reduced, 0.0);
    p.expand_w.assign(channels, std::vector<double>(p.reduced, 0.0));
    p.expand_b.assign(channels, 0.0);
    p.spatial_w.assign(channels, 0.0);
    return p;
  }

  void check(int tensor_channels) const {
    if (tensor_channels != channels ||
        reduce_w.size() != static_cast<std::size_t>(reduced) ||
        expand_w.size() != static_cast<std::size_t>(channels) ||
        spatial_w.size() != static_cast<std::size_t>(channels))
      throw invariant_error("squeeze params: shape mismatch");
  }
};

// Channel squeeze-and-excitation: global average pool per channel, bottleneck
// MLP with relu, sigmoid gate s_c, output u scaled per channel.
inline Tensor cse_forward(const Tensor& u, const SqueezeParams& p) {
  p.check(u.channels);
  const double hw = static_cast<double>(u.height) * u.width;
  std::vector<double> z(u.channels, 0.0);
  for (int c = 0; c < u.channels; ++c) {
    for (int i = 0; i < u.height; ++i)
      for (int j = 0; j < u.width; ++j) z[c] += u.at(c, i, j);
    z[c] /= hw;
  }

  std::vector<double> hidden(p.reduced, 0.0);
  for (int r = 0; r < p.reduced; ++r) {
    double v = p.reduce_b[r];
    for (int c = 0; c < p.channels; ++c) v += p.reduce_w[r][c] * z[c];
    hidden[r] = detail::relu(v);
  }

  Tensor out(u.channels, u.height, u.width);
  for (int c = 0; c < u.channels; ++c) {
    double v = p.expand_b[c];
    for (int r = 0; r < p.reduced; ++r) v += p.expand_w[c][r] * hidden[r];
    const double s = detail::sigmoid(v);
    for (int i = 0; i < u.height; ++i)
      for (int j = 0; j < u.width; ++j) out.at(c, i, j) = s * u.at(c, i, j);
  }
  return out;
}

// Per-channel sigmoid gates of the last cse call, exposed for diagnostics.
inline std::vector<double> cse_gates(const Tensor& u, const SqueezeParams& p) {
  p.check(u.channels);
  const double hw = static_cast<double>(u.height) * u.width;
  std::vector<double> z(u.channels, 0.0);
  for (int c = 0; c < u.channels; ++c) {
    for (int i = 0; i < u.height; ++i)
      for (int j = 0; j < u.width; ++j) z[c] += u.at(c, i, j);
    z[c] /= hw;
  }
  std::vector<double> hidden(p.reduced, 0.0);
  for (int r = 0; r < p.reduced; ++r) {
    double v = p.reduce_b[r];
    for (int c = 0; c < p.channels; ++c) v += p.reduce_w[r][c] * z[c];
    hidden[r] = detail::relu(v);
  }
  std::vector<double> gates(u.channels, 0.0);
  for (int c = 0; c < u.channels; ++c) {
    double v = p.expand_b[c];
    for (int r = 0; r < p.reduced; ++r) v += p.expand_w[c][r] * hidden[r];
    gates[c] = detail::sigmoid(v);
  }
  return gates;
}

// Spatial squeeze-and-excitation: one sigmoid gate per pixel from a 1x1
// projection across channels.
inline Tensor sse_forward(const Tensor& u, const SqueezeParams& p) {
  p.check(u.channels);
  Tensor out(u.channels, u.height, u.width);
  for (int i = 0; i < u.height; ++i) {
    for (int j = 0; j < u.width; ++j) {
      double v = p.spatial_b;
      for (int c = 0; c < u.channels; ++c) v += p.spatial_w[c] * u.at(c, i, j);
      const double q = detail::sigmoid(v);
      for (int c = 0; c < u.channels; ++c) out.at(c, i, j) = q * u.at(c, i, j);
    }
  }
  return out;
}

// Per-pixel gate map of sse_forward.
inline Tensor sse_gates(const Tensor& u, const SqueezeParams& p) {
  p.check(u.channels);
  Tensor gates(1, u.height, u.width);
  for (int i = 0; i < u.height; ++i) {
    for (int j = 0; j < u.width; ++j) {
      double v = p.spatial_b;
      for (int c = 0; c < u.channels; ++c) v += p.spatial_w[c] * u.at(c, i, j);
      gates.at(0, i, j) = detail::sigmoid(v);
    }
  }
  return gates;
}

// Max-out is skipped for narrow feature maps.
inline bool pscse_default_maxout(int channels) { return channels >= 8; }

// Parallel spatial and channel squeeze-excitation: the additive branch
// cse(u) + sse(u), plus an elementwise max-out branch when enabled.
inline Tensor pscse_forward(const Tensor& u, const SqueezeParams& p,
                            bool maxout_enabled) {
  const Tensor c = cse_forward(u, p);
  const Tensor s = sse_forward(u, p);
  Tensor out(u.channels, u.height, u.width);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = c.data[i] + s.data[i];
    if (maxout_enabled) out.data[i] += std::max(c.data[i], s.data[i]);
  }
  return out;
}

inline Tensor pscse_forward(const Tensor& u, const SqueezeParams& p) {
  return pscse_forward(u, p, pscse_default_maxout(u.channels));
}

// 1x1 projections for the grid attention gate. wx is [inter][channels_x],
// wg is [inter][channels_g], psi maps inter -> 1.
struct GateParams {
  int channels_x = 0;
  int channels_g = 0;
  int inter = 0;
  std::vector<std::vector<double>> wx;
  std::vector<double> bx;
  std::vector<std::vector<double>> wg;
  std::vector<double> bg;
  std::vector<double> psi;
  double psi_b = 0.0;

  static GateParams zeros(int channels_x, int channels_g, int inter) {
    if (channels_x <= 0 || channels_g <= 0 || inter <= 0)
      throw invariant_error("gate params: non-positive dimension");
    GateParams p;
    p.channels_x = channels_x;
    p.channels_g = channels_g;
    p.inter = inter;
    p.wx.assign(inter, std::vector<double>(channels_x, 0.0));
    p.bx.assign(inter, 0.0);
    p.wg.assign(inter, std::vector<double>(channels_g, 0.0));
    p.bg.assign(inter, 0.0);
    p.psi.assign(inter, 0.0);
    return p;
  }
};

struct GateResult {
  Tensor alpha;  // (1, H, W) attention coefficients
  Tensor gated;  // alpha applied to x per channel
};

// Additive attention gate: alpha = sigmoid(psi(relu(wx*x + wg*g + biases))),
// then x is attenuated per pixel by alpha.
inline GateResult attention_gate_forward(const Tensor& x, const Tensor& g,
                                         const GateParams& p) {
  if (x.height != g.height || x.width != g.width)
    throw invariant_error("attention gate: spatial mismatch");
  if (x.channels != p.channels_x || g.channels != p.channels_g)
    throw invariant_error("attention gate: channel mismatch");

  GateResult result{Tensor(1, x.height, x.width),
                    Tensor(x.channels, x.height, x.width)};
  std::vector<double> inter(p.inter, 0.0);
  for (int i = 0; i < x.height; ++i) {
    for (int j = 0; j < x.width; ++j) {
      for (int k = 0; k < p.inter; ++k) {
        double v = p.bx[k] + p.bg[k];
        for (int c = 0; c < x.channels; ++c) v += p.wx[k][c] * x.at(c, i, j);
        for (int c = 0; c < g.channels; ++c) v += p.wg[k][c] * g.at(c, i, j);
        inter[k] = detail::relu(v);
      }
      double a = p.psi_b;
      for (int k = 0; k < p.inter; ++k) a += p.psi[k] * inter[k];
      const double alpha = detail::sigmoid(a);
      result.alpha.at(0, i, j) = alpha;
      for (int c = 0; c < x.channels; ++c)
        result.gated.at(c, i, j) = alpha * x.at(c, i, j);
    }
  }
  return result;
}

}  // namespace dentobox
