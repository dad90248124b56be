#pragma once

#include "terragan/core/layers.hpp"

namespace terragan::toy {

/// z [B,dim] -> [B,1,4,4] image through one 4x4 transposed conv and tanh.
class TinyGenerator final : public Network<float> {
 public:
  TinyGenerator(std::int64_t dim, Rng& rng) : dim_(dim), deconv_(dim, 1, 4, {1, 0}, rng) {}

  Var<float> forward(Tape<float>& tape, Var<float> z) override {
    auto x = reshape(z, {z.shape()[0], dim_, 1, 1});
    return activation(deconv_(tape, x), Activation::tanh());
  }
  std::vector<NamedParameter<float>> named_parameters() override {
    std::vector<NamedParameter<float>> out;
    deconv_.collect(out, "deconv");
    return out;
  }

 private:
  std::int64_t dim_;
  ConvTranspose2dLayer<float> deconv_;
};

/// [B,1,4,4] -> [B,1] score through a 4x4 valid conv and sigmoid.
class TinyDiscriminator final : public Network<float> {
 public:
  explicit TinyDiscriminator(Rng& rng) : conv_(1, 1, 4, {1, 0}, rng) {}

  Var<float> forward(Tape<float>& tape, Var<float> x) override {
    auto y = conv_(tape, x);
    return activation(reshape(y, {y.shape()[0], 1}), Activation::sigmoid());
  }
  std::vector<NamedParameter<float>> named_parameters() override {
    std::vector<NamedParameter<float>> out;
    conv_.collect(out, "conv");
    return out;
  }

 private:
  Conv2dLayer<float> conv_;
};

}  // namespace terragan::toy
