#include "terragan/core/layers.hpp"

namespace terragan {

template <typename Real>
Conv2dLayer<Real>::Conv2dLayer(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel_size,
                               ConvGeometry g, Rng& rng)
    : weight(randn<Real>({out_channels, in_channels, kernel_size, kernel_size}, 0.0, kInitStddev, rng)),
      bias(zeros<Real>({out_channels})),
      geometry(g) {}

template <typename Real>
Var<Real> Conv2dLayer<Real>::operator()(Tape<Real>& tape, Var<Real> x) {
  return conv2d(x, tape.parameter(weight), tape.parameter(bias), geometry);
}

template <typename Real>
void Conv2dLayer<Real>::collect(std::vector<NamedParameter<Real>>& out, const std::string& prefix) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

template <typename Real>
ConvTranspose2dLayer<Real>::ConvTranspose2dLayer(std::int64_t in_channels, std::int64_t out_channels,
                                                 std::int64_t kernel_size, ConvGeometry g, Rng& rng)
    : weight(randn<Real>({in_channels, out_channels, kernel_size, kernel_size}, 0.0, kInitStddev, rng)),
      bias(zeros<Real>({out_channels})),
      geometry(g) {}

template <typename Real>
Var<Real> ConvTranspose2dLayer<Real>::operator()(Tape<Real>& tape, Var<Real> x) {
  return conv2d_transpose(x, tape.parameter(weight), tape.parameter(bias), geometry);
}

template <typename Real>
void ConvTranspose2dLayer<Real>::collect(std::vector<NamedParameter<Real>>& out, const std::string& prefix) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

template <typename Real>
std::vector<Parameter<Real>*> Network<Real>::parameters() {
  std::vector<Parameter<Real>*> out;
  for (auto& np : named_parameters()) out.push_back(np.parameter);
  return out;
}

template <typename Real>
std::size_t Network<Real>::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += p->value.numel();
  return n;
}

template <typename Real>
BasicTensor<Real> Network<Real>::infer(const BasicTensor<Real>& input) {
  Tape<Real> tape(false);
  return forward(tape, tape.constant(input)).value();
}

template struct Conv2dLayer<float>;
template struct Conv2dLayer<double>;
template struct ConvTranspose2dLayer<float>;
template struct ConvTranspose2dLayer<double>;
template class Network<float>;
template class Network<double>;

}  // namespace terragan
