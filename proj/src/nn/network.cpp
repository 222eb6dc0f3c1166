#include "colu/nn/network.hpp"

#include "common.hpp"

namespace colu::nn {

namespace {

std::size_t count_recursive(const Layer& layer, LayerKind kind) {
  std::size_t total = layer.kind() == kind ? 1 : 0;
  if (layer.kind() == LayerKind::ResidualGroup) {
    for (const auto& inner : static_cast<const ResidualGroup&>(layer).inner()) total += count_recursive(*inner, kind);
  }
  return total;
}

void freeze_recursive(Layer& layer, bool frozen) {
  if (layer.kind() == LayerKind::Dropout) static_cast<Dropout&>(layer).set_frozen(frozen);
  if (layer.kind() == LayerKind::ResidualGroup) {
    for (const auto& inner : static_cast<ResidualGroup&>(layer).inner()) freeze_recursive(*inner, frozen);
  }
}

}  // namespace

void Network::freeze_dropout(bool frozen) {
  for (auto& layer : layers_) freeze_recursive(*layer, frozen);
}

Tensor Network::forward(const Tensor& input) {
  ForwardContext ctx{mode_, &dropout_rng_};
  Tensor x = input;
  for (auto& layer : layers_) x = layer->forward(x, ctx);
  cached_ = true;
  return x;
}

Tensor Network::backward(const Tensor& grad_output) {
  if (!cached_) throw UsageError("Network: backward called without a cached forward pass");
  Tensor g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Param> Network::parameters() {
  std::vector<Param> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_parameters(out, std::to_string(i) + ".");
  }
  return out;
}

std::vector<Tensor*> Network::buffers() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) layer->collect_buffers(out);
  return out;
}

void Network::zero_grad() {
  for (auto& p : parameters()) p.grad->fill(0.0);
}

std::size_t Network::parameter_count() {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.value->size();
  return total;
}

std::vector<LayerKind> Network::layer_kinds() const {
  std::vector<LayerKind> out;
  out.reserve(layers_.size());
  for (const auto& layer : layers_) out.push_back(layer->kind());
  return out;
}

std::size_t Network::count(LayerKind kind) const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += count_recursive(*layer, kind);
  return total;
}

std::string Network::describe() const {
  std::string out;
  for (const auto& layer : layers_) out += layer->describe() + "\n";
  return out;
}

}  // namespace colu::nn
