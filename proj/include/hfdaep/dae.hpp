#pragma once

#include "hfdaep/rng.hpp"
#include "hfdaep/transform.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hfdaep {

enum class LayerKind : std::uint8_t { conv = 0, tconv = 1 };
enum class Activation : std::uint8_t { linear = 0, relu = 1 };

/// One layer of the encoder-decoder. skip_from indexes the activation whose
/// value is added to this layer's output before the nonlinearity: 0 is the
/// network input, i >= 1 the output of layer i (1-based), -1 none.
struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    int kh = 3, kw = 3;
    int in_ch = 1, out_ch = 1;
    Activation act = Activation::relu;
    int skip_from = -1;
};

/// Contiguous channel-major activation buffer used by the network.
struct Tensor {
    int channels = 0, height = 0, width = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c, int h, int w) : channels(c), height(h), width(w) {
        v.assign(static_cast<std::size_t>(c) * checked_extent(h, w), 0.0);
    }
    double* plane(int c) { return v.data() + static_cast<std::size_t>(c) * height * width; }
    const double* plane(int c) const {
        return v.data() + static_cast<std::size_t>(c) * height * width;
    }
    double& at(int c, int i, int j) {
        return v[(static_cast<std::size_t>(c) * height + i) * width + j];
    }
    double at(int c, int i, int j) const {
        return v[(static_cast<std::size_t>(c) * height + i) * width + j];
    }
    std::size_t size() const { return v.size(); }
};

/// Denoising autoencoder: layer-structured weights plus the noise level the
/// model was trained at. Weights are stored in 32-bit floats (the on-disk
/// format); all arithmetic runs in 64-bit.
struct DaeModel {
    std::vector<LayerSpec> layers;
    std::vector<std::vector<float>> weights;  // per layer: out*in*kh*kw, row-major taps
    std::vector<std::vector<float>> biases;   // per layer: out
    double sigma_eta = 0.0;

    int in_channels() const { return layers.empty() ? 0 : layers.front().in_ch; }
    int out_channels() const { return layers.empty() ? 0 : layers.back().out_ch; }
    void validate() const;
};

/// RED-Net style default: depth conv + depth transposed-conv 3x3 layers,
/// skip connections every 2 decoder layers and a final global residual.
DaeModel make_default_model(int in_channels, int features, std::uint64_t seed, int depth = 5);

/// Identity map (single 1x1 linear layer, weight 1): A(x) = x.
DaeModel make_identity_model(int channels);

/// Zero map (single 1x1 linear layer, weight 0): A(x) = 0.
DaeModel make_zero_model(int channels);

Tensor stack_to_tensor(const ProfileStack& s);
ProfileStack tensor_to_stack(const Tensor& t, const ProfileStack& like);

/// Network forward pass on a tensor or stack of model.in_channels channels.
Tensor dae_forward(const DaeModel& model, const Tensor& x);
ProfileStack dae_forward(const DaeModel& model, const ProfileStack& x);

/// Vector-Jacobian product J(x)^T v by reverse-mode traversal of the layer
/// graph (including skip connections).
Tensor dae_vjp(const DaeModel& model, const Tensor& x, const Tensor& v);
ProfileStack dae_vjp(const DaeModel& model, const ProfileStack& x, const ProfileStack& v);

/// One forward pass with retained intermediates; vjp() reuses them, so a
/// forward value and a J^T v at the same point cost a single forward sweep.
class DaeEvaluation {
  public:
    DaeEvaluation(const DaeModel& model, const Tensor& x);
    ~DaeEvaluation();
    DaeEvaluation(DaeEvaluation&&) noexcept;
    DaeEvaluation& operator=(DaeEvaluation&&) noexcept;

    const Tensor& output() const;
    Tensor vjp(const Tensor& v) const;

  private:
    struct Impl;
    const DaeModel* model_;
    std::unique_ptr<Impl> impl_;
};

struct TrainConfig {
    int patch_size = 40;
    int batch_size = 64;
    int epochs = 20;
    int steps_per_epoch = 0;  // 0 derives a value from the dataset size
    double learning_rate = 1e-3;
    double lr_decay = 1.0;  // multiplicative per-epoch decay
    std::uint64_t seed = 0;
};

struct TrainResult {
    DaeModel model;
    std::vector<double> loss_trace;  // mean batch loss per epoch
};

/// Batch loss 1/(B*E) * sum_b ||clean_b - A(noisy_b)||^2 and its gradient
/// with respect to every weight and bias (accumulated into dw/db, which must
/// be shaped like the model's weight/bias tables).
double dae_loss_gradients(const DaeModel& model, const std::vector<Tensor>& noisy,
                          const std::vector<Tensor>& clean,
                          std::vector<std::vector<double>>& dw,
                          std::vector<std::vector<double>>& db);

/// Trains init on random patches of the dataset stacks, injecting fresh
/// Gaussian noise of standard deviation sigma_eta into the network input each
/// batch; the loss is the mean squared error between the clean patch and the
/// network output on the corrupted patch. Adam steps; deterministic per seed.
TrainResult dae_train(const std::vector<ProfileStack>& dataset, const TrainConfig& cfg,
                      double sigma_eta, DaeModel init);

/// Binary model format "HFDM": header, layer table, then little-endian
/// float32 weight and bias blobs in layer order. load(save(m)) == m bitwise.
void save_model(const DaeModel& model, const std::string& path);
DaeModel load_model(const std::string& path);

}  // namespace hfdaep
