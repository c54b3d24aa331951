#include "hfdaep/dae.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hfdaep {

static_assert(std::endian::native == std::endian::little,
              "model/tensor file formats assume a little-endian host");

namespace {

// out(i,j) += wgt * in(i+dy, j+dx) over the index range where the shifted
// sample exists (zero padding elsewhere).
void accumulate_shifted(double* __restrict out, const double* __restrict in, int h, int w,
                        double wgt, int dy, int dx) {
    const int i0 = std::max(0, -dy), i1 = std::min(h, h - dy);
    const int j0 = std::max(0, -dx), j1 = std::min(w, w - dx);
    for (int i = i0; i < i1; ++i) {
        double* __restrict orow = out + static_cast<std::size_t>(i) * w;
        const double* __restrict irow = in + static_cast<std::size_t>(i + dy) * w + dx;
#pragma omp simd
        for (int j = j0; j < j1; ++j) orow[j] += wgt * irow[j];
    }
}

// sum_{i,j} a(i,j) * b(i+dy, j+dx) over the overlapping range. The simd
// reduction fixes the summation order per binary, keeping runs reproducible.
double shifted_dot(const double* __restrict a, const double* __restrict b, int h, int w, int dy,
                   int dx) {
    const int i0 = std::max(0, -dy), i1 = std::min(h, h - dy);
    const int j0 = std::max(0, -dx), j1 = std::min(w, w - dx);
    double acc = 0.0;
    for (int i = i0; i < i1; ++i) {
        const double* __restrict ar = a + static_cast<std::size_t>(i) * w;
        const double* __restrict br = b + static_cast<std::size_t>(i + dy) * w + dx;
        double row = 0.0;
#pragma omp simd reduction(+ : row)
        for (int j = j0; j < j1; ++j) row += ar[j] * br[j];
        acc += row;
    }
    return acc;
}

// Spatial offset of kernel tap (a,b): correlation for conv layers, flipped
// for transposed-conv layers.
inline void tap_shift(const LayerSpec& l, int a, int b, int& dy, int& dx) {
    const int cy = l.kh / 2, cx = l.kw / 2;
    if (l.kind == LayerKind::conv) {
        dy = a - cy;
        dx = b - cx;
    } else {
        dy = cy - a;
        dx = cx - b;
    }
}

// Fused 3x3 helpers: one pass per input row instead of one per tap.

// orow[j] += e0*irow[j-1] + e1*irow[j] + e2*irow[j+1], zero padded.
inline void row_taps3(double* __restrict orow, const double* __restrict irow, int w, double e0,
                      double e1, double e2) {
    orow[0] += e1 * irow[0] + e2 * irow[1];
#pragma omp simd
    for (int j = 1; j < w - 1; ++j)
        orow[j] += e0 * irow[j - 1] + e1 * irow[j] + e2 * irow[j + 1];
    orow[w - 1] += e0 * irow[w - 2] + e1 * irow[w - 1];
}

// d0 += sum g[j]*in[j-1], d1 += sum g[j]*in[j], d2 += sum g[j]*in[j+1].
inline void row_dots3(const double* __restrict g, const double* __restrict in, int w, double& d0,
                      double& d1, double& d2) {
    double a0 = 0.0, a1 = g[0] * in[0], a2 = g[0] * in[1];
#pragma omp simd reduction(+ : a0, a1, a2)
    for (int j = 1; j < w - 1; ++j) {
        a0 += g[j] * in[j - 1];
        a1 += g[j] * in[j];
        a2 += g[j] * in[j + 1];
    }
    a0 += g[w - 1] * in[w - 2];
    a1 += g[w - 1] * in[w - 1];
    d0 += a0;
    d1 += a1;
    d2 += a2;
}

// Effective tap grid indexed by (dy+1, dx+1); flips for tconv layers.
inline void effective_taps3(const LayerSpec& l, const float* wk, double e[3][3]) {
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (l.kind == LayerKind::conv)
                e[a][b] = wk[a * 3 + b];
            else
                e[2 - a][2 - b] = wk[a * 3 + b];
        }
}

inline bool use_fused3(const LayerSpec& l, int w) { return l.kh == 3 && l.kw == 3 && w >= 2; }

void plane_conv3(double* __restrict out, const double* __restrict in, int h, int w,
                 const double e[3][3]) {
    for (int i = 0; i < h; ++i) {
        double* orow = out + static_cast<std::size_t>(i) * w;
        for (int p = 0; p < 3; ++p) {
            const int ip = i + p - 1;
            if (ip < 0 || ip >= h) continue;
            row_taps3(orow, in + static_cast<std::size_t>(ip) * w, w, e[p][0], e[p][1], e[p][2]);
        }
    }
}

void layer_forward(const LayerSpec& l, const float* wt, const float* bias, const Tensor& in,
                   Tensor& pre) {
    const int h = in.height, w = in.width;
    const std::size_t taps = static_cast<std::size_t>(l.kh) * l.kw;
#pragma omp parallel for schedule(static)
    for (int o = 0; o < l.out_ch; ++o) {
        double* op = pre.plane(o);
        std::fill(op, op + static_cast<std::size_t>(h) * w, static_cast<double>(bias[o]));
        for (int c = 0; c < l.in_ch; ++c) {
            const double* ip = in.plane(c);
            const float* wk = wt + (static_cast<std::size_t>(o) * l.in_ch + c) * taps;
            if (use_fused3(l, w)) {
                double e[3][3];
                effective_taps3(l, wk, e);
                plane_conv3(op, ip, h, w, e);
                continue;
            }
            for (int a = 0; a < l.kh; ++a)
                for (int b = 0; b < l.kw; ++b) {
                    int dy, dx;
                    tap_shift(l, a, b, dy, dx);
                    accumulate_shifted(op, ip, h, w, wk[a * l.kw + b], dy, dx);
                }
        }
    }
}

// Gradient with respect to the layer input given the gradient at the
// pre-activation: the transpose of layer_forward.
void layer_backward_input(const LayerSpec& l, const float* wt, const Tensor& gpre, Tensor& gin) {
    const int h = gpre.height, w = gpre.width;
    const std::size_t taps = static_cast<std::size_t>(l.kh) * l.kw;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < l.in_ch; ++c) {
        double* gp = gin.plane(c);
        for (int o = 0; o < l.out_ch; ++o) {
            const double* gout = gpre.plane(o);
            const float* wk = wt + (static_cast<std::size_t>(o) * l.in_ch + c) * taps;
            if (use_fused3(l, w)) {
                double e[3][3], ef[3][3];
                effective_taps3(l, wk, e);
                for (int p = 0; p < 3; ++p)  // transpose flips the shifts
                    for (int q = 0; q < 3; ++q) ef[p][q] = e[2 - p][2 - q];
                plane_conv3(gp, gout, h, w, ef);
                continue;
            }
            for (int a = 0; a < l.kh; ++a)
                for (int b = 0; b < l.kw; ++b) {
                    int dy, dx;
                    tap_shift(l, a, b, dy, dx);
                    accumulate_shifted(gp, gout, h, w, wk[a * l.kw + b], -dy, -dx);
                }
        }
    }
}

void layer_weight_grads(const LayerSpec& l, const Tensor& in, const Tensor& gpre,
                        std::vector<double>& dw, std::vector<double>& db) {
    const int h = in.height, w = in.width;
    const std::size_t taps = static_cast<std::size_t>(l.kh) * l.kw;
#pragma omp parallel for schedule(static)
    for (int o = 0; o < l.out_ch; ++o) {
        const double* gout = gpre.plane(o);
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        double bsum = 0.0;
#pragma omp simd reduction(+ : bsum)
        for (std::size_t n = 0; n < plane; ++n) bsum += gout[n];
        db[o] += bsum;
        for (int c = 0; c < l.in_ch; ++c) {
            const double* ip = in.plane(c);
            double* dwk = dw.data() + (static_cast<std::size_t>(o) * l.in_ch + c) * taps;
            if (use_fused3(l, w)) {
                double s[3][3] = {};  // s[dy+1][dx+1] = sum g(i,j)*in(i+dy, j+dx)
                for (int i = 0; i < h; ++i) {
                    const double* grow = gout + static_cast<std::size_t>(i) * w;
                    for (int p = 0; p < 3; ++p) {
                        const int ip_row = i + p - 1;
                        if (ip_row < 0 || ip_row >= h) continue;
                        row_dots3(grow, ip + static_cast<std::size_t>(ip_row) * w, w, s[p][0],
                                  s[p][1], s[p][2]);
                    }
                }
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        int dy, dx;
                        tap_shift(l, a, b, dy, dx);
                        dwk[a * 3 + b] += s[dy + 1][dx + 1];
                    }
                continue;
            }
            for (int a = 0; a < l.kh; ++a)
                for (int b = 0; b < l.kw; ++b) {
                    int dy, dx;
                    tap_shift(l, a, b, dy, dx);
                    dwk[a * l.kw + b] += shifted_dot(gout, ip, h, w, dy, dx);
                }
        }
    }
}

int activation_channels(const DaeModel& m, int act_index) {
    return act_index == 0 ? m.in_channels() : m.layers[act_index - 1].out_ch;
}

struct ForwardCache {
    std::vector<Tensor> acts;  // acts[0] = input, acts[i] = output of layer i
    std::vector<Tensor> pres;  // pres[i] = pre-activation of layer i (1-based)
};

ForwardCache forward_with_cache(const DaeModel& m, const Tensor& x) {
    if (x.channels != m.in_channels())
        throw std::invalid_argument("dae_forward: input has " + std::to_string(x.channels) +
                                    " channels, model expects " +
                                    std::to_string(m.in_channels()));
    const int n_layers = static_cast<int>(m.layers.size());
    ForwardCache fc;
    fc.acts.resize(n_layers + 1);
    fc.pres.resize(n_layers + 1);
    fc.acts[0] = x;
    for (int li = 0; li < n_layers; ++li) {
        const LayerSpec& l = m.layers[li];
        Tensor pre(l.out_ch, x.height, x.width);
        layer_forward(l, m.weights[li].data(), m.biases[li].data(), fc.acts[li], pre);
        if (l.skip_from >= 0) {
            const Tensor& src = fc.acts[l.skip_from];
            for (std::size_t n = 0; n < pre.size(); ++n) pre.v[n] += src.v[n];
        }
        Tensor act = pre;
        if (l.act == Activation::relu)
            for (auto& v : act.v) v = v > 0.0 ? v : 0.0;
        fc.pres[li + 1] = std::move(pre);
        fc.acts[li + 1] = std::move(act);
    }
    return fc;
}

}  // namespace

void DaeModel::validate() const {
    if (layers.empty()) throw std::invalid_argument("DaeModel: no layers");
    if (weights.size() != layers.size() || biases.size() != layers.size())
        throw std::invalid_argument("DaeModel: weight table does not match layer table");
    if (!(sigma_eta >= 0.0) || !std::isfinite(sigma_eta))
        throw std::invalid_argument("DaeModel: sigma_eta must be finite and nonnegative");
    int prev = layers.front().in_ch;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.kh % 2 == 0 || l.kw % 2 == 0)
            throw std::invalid_argument("DaeModel: kernel dimensions must be odd");
        if (l.in_ch != prev)
            throw std::invalid_argument("DaeModel: channel chain broken at layer " +
                                        std::to_string(i + 1));
        prev = l.out_ch;
        if (l.skip_from > static_cast<int>(i))
            throw std::invalid_argument("DaeModel: skip source must precede layer");
        if (l.skip_from >= 0) {
            const int src_ch = l.skip_from == 0 ? layers.front().in_ch
                                                : layers[l.skip_from - 1].out_ch;
            if (src_ch != l.out_ch)
                throw std::invalid_argument("DaeModel: skip channel mismatch at layer " +
                                            std::to_string(i + 1));
        }
        const std::size_t wsize =
            static_cast<std::size_t>(l.out_ch) * l.in_ch * l.kh * l.kw;
        if (weights[i].size() != wsize || biases[i].size() != static_cast<std::size_t>(l.out_ch))
            throw std::invalid_argument("DaeModel: blob size mismatch at layer " +
                                        std::to_string(i + 1));
    }
    if (layers.front().in_ch != layers.back().out_ch)
        throw std::invalid_argument("DaeModel: input/output channel counts differ");
}

DaeModel make_default_model(int in_channels, int features, std::uint64_t seed, int depth) {
    if (in_channels < 1 || features < 1 || depth < 2)
        throw std::invalid_argument("make_default_model: bad architecture parameters");
    DaeModel m;
    for (int i = 0; i < depth; ++i) {
        LayerSpec l;
        l.kind = LayerKind::conv;
        l.in_ch = i == 0 ? in_channels : features;
        l.out_ch = features;
        m.layers.push_back(l);
    }
    for (int i = 0; i < depth; ++i) {
        LayerSpec l;
        l.kind = LayerKind::tconv;
        l.in_ch = features;
        l.out_ch = i == depth - 1 ? in_channels : features;
        m.layers.push_back(l);
    }
    // Symmetric skips every 2 layers: encoder act i feeds decoder layer
    // 2*depth - i; the final layer carries the global residual.
    for (int i = depth - 2; i >= 1; i -= 2) {
        const int target = 2 * depth - i;  // 1-based layer index
        if (target <= static_cast<int>(m.layers.size()) - 1)
            m.layers[target - 1].skip_from = i;
    }
    m.layers.back().skip_from = 0;
    m.layers.back().act = Activation::linear;

    Rng rng(seed);
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        const LayerSpec& l = m.layers[li];
        const std::size_t wsize = static_cast<std::size_t>(l.out_ch) * l.in_ch * l.kh * l.kw;
        double stddev = std::sqrt(2.0 / (static_cast<double>(l.in_ch) * l.kh * l.kw));
        // Damp the final layer so the network starts near the identity map
        // (global residual contributes almost nothing at initialization);
        // training then shapes the residual branch instead of first having to
        // silence a random one.
        if (li + 1 == m.layers.size()) stddev *= 0.01;
        std::vector<float> w(wsize);
        for (auto& x : w) x = static_cast<float>(rng.gaussian(0.0, stddev));
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::vector<float>(l.out_ch, 0.0f));
    }
    m.validate();
    return m;
}

static DaeModel one_by_one_model(int channels, float weight) {
    DaeModel m;
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.kh = l.kw = 1;
    l.in_ch = l.out_ch = channels;
    l.act = Activation::linear;
    m.layers.push_back(l);
    std::vector<float> w(static_cast<std::size_t>(channels) * channels, 0.0f);
    for (int c = 0; c < channels; ++c) w[static_cast<std::size_t>(c) * channels + c] = weight;
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::vector<float>(channels, 0.0f));
    m.sigma_eta = 0.0;
    m.validate();
    return m;
}

DaeModel make_identity_model(int channels) { return one_by_one_model(channels, 1.0f); }
DaeModel make_zero_model(int channels) { return one_by_one_model(channels, 0.0f); }

Tensor stack_to_tensor(const ProfileStack& s) {
    if (s.channels.empty()) throw std::invalid_argument("stack_to_tensor: empty stack");
    Tensor t(s.channel_count(), s.height(), s.width());
    for (int c = 0; c < s.channel_count(); ++c) {
        if (!s.channels[c].same_shape(s.channels[0]))
            throw std::invalid_argument("stack_to_tensor: channel shape mismatch");
        std::memcpy(t.plane(c), s.channels[c].values.data(),
                    s.channels[c].size() * sizeof(double));
    }
    return t;
}

ProfileStack tensor_to_stack(const Tensor& t, const ProfileStack& like) {
    if (t.channels != like.channel_count())
        throw std::invalid_argument("tensor_to_stack: channel count mismatch");
    ProfileStack s = like;
    for (int c = 0; c < t.channels; ++c) {
        s.channels[c] = RealGrid(t.height, t.width);
        std::memcpy(s.channels[c].values.data(), t.plane(c),
                    s.channels[c].size() * sizeof(double));
    }
    return s;
}

Tensor dae_forward(const DaeModel& model, const Tensor& x) {
    ForwardCache fc = forward_with_cache(model, x);
    return std::move(fc.acts.back());
}

ProfileStack dae_forward(const DaeModel& model, const ProfileStack& x) {
    return tensor_to_stack(dae_forward(model, stack_to_tensor(x)), x);
}

namespace {

// Reverse-mode pass shared by dae_vjp and training. grads[i] accumulates the
// cotangent of activation i; weight gradients are filled when requested.
Tensor backward_pass(const DaeModel& m, const ForwardCache& fc, const Tensor& v,
                     std::vector<std::vector<double>>* dw, std::vector<std::vector<double>>* db) {
    const int n_layers = static_cast<int>(m.layers.size());
    std::vector<Tensor> grads(n_layers + 1);
    grads[n_layers] = v;
    for (int li = n_layers - 1; li >= 0; --li) {
        const LayerSpec& l = m.layers[li];
        Tensor& gact = grads[li + 1];
        if (gact.v.empty()) gact = Tensor(l.out_ch, v.height, v.width);

        // Through the nonlinearity.
        Tensor gpre = std::move(gact);
        if (l.act == Activation::relu) {
            const Tensor& pre = fc.pres[li + 1];
            for (std::size_t n = 0; n < gpre.size(); ++n)
                if (!(pre.v[n] > 0.0)) gpre.v[n] = 0.0;
        }

        if (l.skip_from >= 0) {
            Tensor& gsrc = grads[l.skip_from];
            if (gsrc.v.empty())
                gsrc = Tensor(activation_channels(m, l.skip_from), v.height, v.width);
            for (std::size_t n = 0; n < gpre.size(); ++n) gsrc.v[n] += gpre.v[n];
        }

        if (dw) layer_weight_grads(l, fc.acts[li], gpre, (*dw)[li], (*db)[li]);

        Tensor& gin = grads[li];
        if (gin.v.empty()) gin = Tensor(l.in_ch, v.height, v.width);
        layer_backward_input(l, m.weights[li].data(), gpre, gin);
    }
    return std::move(grads[0]);
}

}  // namespace

Tensor dae_vjp(const DaeModel& model, const Tensor& x, const Tensor& v) {
    if (v.channels != model.out_channels() || v.height != x.height || v.width != x.width)
        throw std::invalid_argument("dae_vjp: cotangent shape does not match model output");
    ForwardCache fc = forward_with_cache(model, x);
    return backward_pass(model, fc, v, nullptr, nullptr);
}

struct DaeEvaluation::Impl {
    ForwardCache fc;
};

DaeEvaluation::DaeEvaluation(const DaeModel& model, const Tensor& x)
    : model_(&model), impl_(std::make_unique<Impl>()) {
    impl_->fc = forward_with_cache(model, x);
}
DaeEvaluation::~DaeEvaluation() = default;
DaeEvaluation::DaeEvaluation(DaeEvaluation&&) noexcept = default;
DaeEvaluation& DaeEvaluation::operator=(DaeEvaluation&&) noexcept = default;

const Tensor& DaeEvaluation::output() const { return impl_->fc.acts.back(); }

Tensor DaeEvaluation::vjp(const Tensor& v) const {
    const Tensor& out = output();
    if (v.channels != out.channels || v.height != out.height || v.width != out.width)
        throw std::invalid_argument("DaeEvaluation::vjp: cotangent shape mismatch");
    return backward_pass(*model_, impl_->fc, v, nullptr, nullptr);
}

ProfileStack dae_vjp(const DaeModel& model, const ProfileStack& x, const ProfileStack& v) {
    return tensor_to_stack(dae_vjp(model, stack_to_tensor(x), stack_to_tensor(v)), x);
}

double dae_loss_gradients(const DaeModel& model, const std::vector<Tensor>& noisy,
                          const std::vector<Tensor>& clean,
                          std::vector<std::vector<double>>& dw,
                          std::vector<std::vector<double>>& db) {
    if (noisy.empty() || noisy.size() != clean.size())
        throw std::invalid_argument("dae_loss_gradients: batch shape mismatch");
    const std::size_t elems = clean.front().size();
    const double grad_scale = 2.0 / (static_cast<double>(noisy.size()) * elems);
    double loss = 0.0;
    for (std::size_t s = 0; s < noisy.size(); ++s) {
        ForwardCache fc = forward_with_cache(model, noisy[s]);
        const Tensor& out = fc.acts.back();
        Tensor gout(out.channels, out.height, out.width);
        for (std::size_t n = 0; n < out.size(); ++n) {
            const double diff = out.v[n] - clean[s].v[n];
            loss += diff * diff;
            gout.v[n] = grad_scale * diff;
        }
        backward_pass(model, fc, gout, &dw, &db);
    }
    return loss / (static_cast<double>(noisy.size()) * elems);
}

TrainResult dae_train(const std::vector<ProfileStack>& dataset, const TrainConfig& cfg,
                      double sigma_eta, DaeModel init) {
    init.validate();
    if (dataset.empty()) throw std::invalid_argument("dae_train: empty dataset");
    if (cfg.patch_size < 1 || cfg.batch_size < 1 || cfg.epochs < 1 ||
        !(cfg.learning_rate > 0.0))
        throw std::invalid_argument("dae_train: counts and learning rate must be positive");
    if (sigma_eta < 0.0 || !std::isfinite(sigma_eta))
        throw std::invalid_argument("dae_train: sigma_eta must be finite and nonnegative");

    std::vector<Tensor> images;
    images.reserve(dataset.size());
    for (const auto& s : dataset) {
        Tensor t = stack_to_tensor(s);
        if (t.channels != init.in_channels())
            throw std::invalid_argument("dae_train: dataset channel count does not match model");
        if (t.height < cfg.patch_size || t.width < cfg.patch_size)
            throw std::invalid_argument("dae_train: patch size exceeds a training image");
        images.push_back(std::move(t));
    }

    const int n_layers = static_cast<int>(init.layers.size());
    std::vector<std::vector<double>> dw(n_layers), db(n_layers);
    std::vector<std::vector<double>> mw(n_layers), vw(n_layers), mb(n_layers), vb(n_layers);
    for (int li = 0; li < n_layers; ++li) {
        dw[li].assign(init.weights[li].size(), 0.0);
        db[li].assign(init.biases[li].size(), 0.0);
        mw[li].assign(init.weights[li].size(), 0.0);
        vw[li].assign(init.weights[li].size(), 0.0);
        mb[li].assign(init.biases[li].size(), 0.0);
        vb[li].assign(init.biases[li].size(), 0.0);
    }

    const int steps =
        cfg.steps_per_epoch > 0
            ? cfg.steps_per_epoch
            : std::max<int>(1, static_cast<int>(dataset.size() * 8 / cfg.batch_size));
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const int p = cfg.patch_size;

    Rng rng(cfg.seed);
    DaeModel model = std::move(init);
    TrainResult result;
    long adam_t = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        double epoch_loss = 0.0;
        for (int step = 0; step < steps; ++step) {
            for (int li = 0; li < n_layers; ++li) {
                std::fill(dw[li].begin(), dw[li].end(), 0.0);
                std::fill(db[li].begin(), db[li].end(), 0.0);
            }
            std::vector<Tensor> clean_batch, noisy_batch;
            clean_batch.reserve(cfg.batch_size);
            noisy_batch.reserve(cfg.batch_size);
            for (int s = 0; s < cfg.batch_size; ++s) {
                const Tensor& img = images[rng.uniform_index(images.size())];
                const int top = static_cast<int>(rng.uniform_index(img.height - p + 1));
                const int left = static_cast<int>(rng.uniform_index(img.width - p + 1));

                Tensor clean(img.channels, p, p), noisy(img.channels, p, p);
                for (int c = 0; c < img.channels; ++c)
                    for (int i = 0; i < p; ++i)
                        for (int j = 0; j < p; ++j) {
                            const double val = img.at(c, top + i, left + j);
                            clean.at(c, i, j) = val;
                            noisy.at(c, i, j) = val + sigma_eta * rng.gaussian();
                        }
                clean_batch.push_back(std::move(clean));
                noisy_batch.push_back(std::move(noisy));
            }
            const double batch_loss = dae_loss_gradients(model, noisy_batch, clean_batch, dw, db);

            if (!std::isfinite(batch_loss))
                throw std::runtime_error("dae_train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1));
            epoch_loss += batch_loss;

            ++adam_t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
            for (int li = 0; li < n_layers; ++li) {
                auto update = [&](std::vector<float>& w, std::vector<double>& g,
                                  std::vector<double>& m1, std::vector<double>& m2) {
                    for (std::size_t n = 0; n < w.size(); ++n) {
                        m1[n] = beta1 * m1[n] + (1.0 - beta1) * g[n];
                        m2[n] = beta2 * m2[n] + (1.0 - beta2) * g[n] * g[n];
                        const double stepv =
                            lr * (m1[n] / bc1) / (std::sqrt(m2[n] / bc2) + eps);
                        w[n] = static_cast<float>(static_cast<double>(w[n]) - stepv);
                    }
                };
                update(model.weights[li], dw[li], mw[li], vw[li]);
                update(model.biases[li], db[li], mb[li], vb[li]);
            }
        }
        result.loss_trace.push_back(epoch_loss / steps);
    }

    model.sigma_eta = sigma_eta;
    result.model = std::move(model);
    return result;
}

namespace {

template <typename T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
    T v;
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("model file truncated");
    return v;
}

}  // namespace

void save_model(const DaeModel& model, const std::string& path) {
    model.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open model file for writing: " + path);
    f.write("HFDM", 4);
    put<std::uint8_t>(f, 1);  // format version
    put<double>(f, model.sigma_eta);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(model.layers.size()));
    for (const LayerSpec& l : model.layers) {
        put<std::uint8_t>(f, static_cast<std::uint8_t>(l.kind));
        put<std::uint8_t>(f, static_cast<std::uint8_t>(l.act));
        put<std::int32_t>(f, l.skip_from);
        put<std::uint32_t>(f, static_cast<std::uint32_t>(l.kh));
        put<std::uint32_t>(f, static_cast<std::uint32_t>(l.kw));
        put<std::uint32_t>(f, static_cast<std::uint32_t>(l.in_ch));
        put<std::uint32_t>(f, static_cast<std::uint32_t>(l.out_ch));
    }
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        f.write(reinterpret_cast<const char*>(model.weights[i].data()),
                static_cast<std::streamsize>(model.weights[i].size() * sizeof(float)));
        f.write(reinterpret_cast<const char*>(model.biases[i].data()),
                static_cast<std::streamsize>(model.biases[i].size() * sizeof(float)));
    }
    if (!f) throw std::runtime_error("short write to model file: " + path);
}

DaeModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open model file: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "HFDM", 4) != 0)
        throw std::runtime_error("not a model file (bad magic): " + path);
    const auto version = get<std::uint8_t>(f);
    if (version != 1)
        throw std::runtime_error("unsupported model format version " + std::to_string(version));
    DaeModel m;
    m.sigma_eta = get<double>(f);
    const auto n_layers = get<std::uint32_t>(f);
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec l;
        l.kind = static_cast<LayerKind>(get<std::uint8_t>(f));
        l.act = static_cast<Activation>(get<std::uint8_t>(f));
        l.skip_from = get<std::int32_t>(f);
        l.kh = static_cast<int>(get<std::uint32_t>(f));
        l.kw = static_cast<int>(get<std::uint32_t>(f));
        l.in_ch = static_cast<int>(get<std::uint32_t>(f));
        l.out_ch = static_cast<int>(get<std::uint32_t>(f));
        m.layers.push_back(l);
    }
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const LayerSpec& l = m.layers[i];
        std::vector<float> w(static_cast<std::size_t>(l.out_ch) * l.in_ch * l.kh * l.kw);
        std::vector<float> b(static_cast<std::size_t>(l.out_ch));
        f.read(reinterpret_cast<char*>(w.data()),
               static_cast<std::streamsize>(w.size() * sizeof(float)));
        f.read(reinterpret_cast<char*>(b.data()),
               static_cast<std::streamsize>(b.size() * sizeof(float)));
        if (!f) throw std::runtime_error("model file truncated: " + path);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    m.validate();
    return m;
}

}  // namespace hfdaep
