#pragma once

// Observation encoders shared by the policy network and the RIDE state
// encoder. A frame is the raw byte form of one observation: the compact grid
// (3 bytes per cell) or the RGB raster (3 bytes per pixel), row-major.

#include <string>

#include "fomo/nn/layers.hpp"

namespace fomo::nn {

enum class TorsoKind { kCompact, kConv };

inline TorsoKind parse_torso(const std::string& s) {
  if (s == "compact") return TorsoKind::kCompact;
  if (s == "conv") return TorsoKind::kConv;
  throw std::invalid_argument("unknown torso '" + s + "' (expected compact or conv)");
}

inline std::string torso_name(TorsoKind k) { return k == TorsoKind::kCompact ? "compact" : "conv"; }

struct FrameSpec {
  TorsoKind kind = TorsoKind::kCompact;
  int width = 7;   // cells (compact) or pixels (conv)
  int height = 7;
  size_t bytes() const { return static_cast<size_t>(width) * static_cast<size_t>(height) * 3; }
  friend bool operator==(const FrameSpec&, const FrameSpec&) = default;
};

struct TorsoConfig {
  int hidden = 128;
  int conv_channels[3] = {16, 32, 32};
};

// One-hot slots per compact cell: 11 object ids, 6 colors, 3 door states.
inline constexpr int kCompactSlots = 20;

template <typename S>
class Torso {
 public:
  struct Cache {
    std::vector<int> idx;
    Mat<S> x;
    Mat<S> a[4];
    std::vector<Mat<S>> cols[3];
  };

  Torso() = default;
  Torso(ParamSet<S>& p, FrameSpec spec, TorsoConfig cfg) : spec_(spec), cfg_(cfg) {
    if (spec.kind == TorsoKind::kCompact) {
      const int cells = spec.width * spec.height;
      embed_ = SparseLinear<S>(p, cells * kCompactSlots, cfg.hidden, cells * 3);
      fc_ = Linear<S>(p, cfg.hidden, cfg.hidden);
    } else {
      const int* c = cfg.conv_channels;
      conv_[0] = Conv2d<S>(p, 3, c[0], spec.height, spec.width, 3, 2, 1);
      conv_[1] = Conv2d<S>(p, c[0], c[1], conv_[0].out_h(), conv_[0].out_w(), 3, 2, 1);
      conv_[2] = Conv2d<S>(p, c[1], c[2], conv_[1].out_h(), conv_[1].out_w(), 3, 2, 1);
      fc_ = Linear<S>(p, conv_[2].out_size(), cfg.hidden);
    }
  }

  void init(ParamSet<S>& p, Rng& rng) const {
    if (spec_.kind == TorsoKind::kCompact) {
      embed_.init(p, rng);
    } else {
      for (const auto& c : conv_) c.init(p, rng);
    }
    fc_.init(p, rng);
  }

  int out() const { return cfg_.hidden; }
  const FrameSpec& spec() const { return spec_; }

  Mat<S> forward(const ParamSet<S>& p, const std::vector<const uint8_t*>& frames, Cache* cache) const {
    const int batch = static_cast<int>(frames.size());
    Cache local;
    Cache& k = cache ? *cache : local;
    if (spec_.kind == TorsoKind::kCompact) {
      const int cells = spec_.width * spec_.height;
      k.idx.resize(static_cast<size_t>(batch * cells * 3));
      for (int b = 0; b < batch; ++b) {
        const uint8_t* f = frames[static_cast<size_t>(b)];
        int* out = &k.idx[static_cast<size_t>(b * cells * 3)];
        for (int i = 0; i < cells; ++i) {
          const int base = i * kCompactSlots;
          out[3 * i] = base + std::min<int>(f[3 * i], 10);
          out[3 * i + 1] = base + 11 + std::min<int>(f[3 * i + 1], 5);
          out[3 * i + 2] = base + 17 + std::min<int>(f[3 * i + 2], 2);
        }
      }
      k.a[0] = relu(embed_.forward(p, k.idx, batch));
      k.a[1] = relu(fc_.forward(p, k.a[0]));
      return k.a[1];
    }
    const int hw = spec_.width * spec_.height;
    k.x.resize(batch, 3 * hw);
    for (int b = 0; b < batch; ++b) {
      const uint8_t* f = frames[static_cast<size_t>(b)];
      S* row = k.x.row(b).data();
      for (int i = 0; i < hw; ++i)
        for (int c = 0; c < 3; ++c) row[c * hw + i] = static_cast<S>(f[3 * i + c]) / S(255);
    }
    k.a[0] = relu(conv_[0].forward(p, k.x, &k.cols[0]));
    k.a[1] = relu(conv_[1].forward(p, k.a[0], &k.cols[1]));
    k.a[2] = relu(conv_[2].forward(p, k.a[1], &k.cols[2]));
    k.a[3] = relu(fc_.forward(p, k.a[2]));
    return k.a[3];
  }

  void backward(ParamSet<S>& p, const Cache& k, const Mat<S>& dout) const {
    if (spec_.kind == TorsoKind::kCompact) {
      const Mat<S> d1 = relu_backward(k.a[1], dout);
      const Mat<S> d0 = relu_backward(k.a[0], fc_.backward(p, k.a[0], d1));
      embed_.backward(p, k.idx, d0);
      return;
    }
    Mat<S> d = relu_backward(k.a[3], dout);
    d = relu_backward(k.a[2], fc_.backward(p, k.a[2], d));
    d = relu_backward(k.a[1], conv_[2].backward(p, k.cols[2], d));
    d = relu_backward(k.a[0], conv_[1].backward(p, k.cols[1], d));
    conv_[0].backward(p, k.cols[0], d, false);
  }

 private:
  FrameSpec spec_;
  TorsoConfig cfg_;
  SparseLinear<S> embed_;
  Conv2d<S> conv_[3];
  Linear<S> fc_;
};

}  // namespace fomo::nn
