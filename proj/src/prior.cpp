#include "hfdaep/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace hfdaep {

void PriorContext::validate(bool complex_input) const {
    if (!model) throw std::invalid_argument("PriorContext: missing model");
    profile.validate();
    if (model->in_channels() != expected_channels(complex_input))
        throw std::invalid_argument(
            "PriorContext: model expects " + std::to_string(model->in_channels()) +
            " channels but the transform produces " +
            std::to_string(expected_channels(complex_input)));
}

namespace {

double stack_residual_norm2(const PriorContext& ctx, const ProfileStack& stack) {
    const ProfileStack out = dae_forward(*ctx.model, stack);
    double acc = 0.0;
    for (int c = 0; c < stack.channel_count(); ++c)
        for (std::size_t n = 0; n < stack.channels[c].size(); ++n) {
            const double d = stack.channels[c].values[n] - out.channels[c].values[n];
            acc += d * d;
        }
    return acc;
}

// Re-enters one plane's shifted residual into the image domain. Tikhonov
// channels contribute (t_i [+ low_i]) and gradient channels contribute the
// transposed forward difference; everything is averaged over the plane's
// full channel count.
RealGrid reenter_plane(const ProfileStack& t, const LowpassSet& lows, int chan_begin,
                       int chan_count, int low_begin, LowsReentry reentry) {
    const int h = t.height();
    const int w = t.width();
    RealGrid out(h, w);
    int low_index = low_begin;
    for (int c = chan_begin; c < chan_begin + chan_count; ++c) {
        const RealGrid& ch = t.channels[c];
        switch (t.kinds[c]) {
            case ChannelKind::tikhonov_hf: {
                if (reentry == LowsReentry::literal) {
                    const RealGrid& lo = lows.lows[low_index];
                    for (std::size_t n = 0; n < out.size(); ++n)
                        out.values[n] += ch.values[n] + lo.values[n];
                } else {
                    for (std::size_t n = 0; n < out.size(); ++n) out.values[n] += ch.values[n];
                }
                ++low_index;
                break;
            }
            case ChannelKind::gradient_x: {
                const RealGrid gt = forward_diff_x_transpose(ch);
                for (std::size_t n = 0; n < out.size(); ++n) out.values[n] += gt.values[n];
                break;
            }
            case ChannelKind::gradient_y: {
                const RealGrid gt = forward_diff_y_transpose(ch);
                for (std::size_t n = 0; n < out.size(); ++n) out.values[n] += gt.values[n];
                break;
            }
        }
    }
    const double inv = 1.0 / chan_count;
    for (auto& v : out.values) v *= inv;
    return out;
}

}  // namespace

double prior_value(const PriorContext& ctx, const RealGrid& u) {
    ctx.validate(false);
    return stack_residual_norm2(ctx, forward_transform(u, ctx.profile, ctx.include_gradients).stack);
}

double prior_value(const PriorContext& ctx, const ComplexGrid& u) {
    ctx.validate(true);
    return stack_residual_norm2(ctx, forward_transform(u, ctx.profile, ctx.include_gradients).stack);
}

ProfileStack residual_shift(const PriorContext& ctx, const ProfileStack& x) {
    if (!ctx.model) throw std::invalid_argument("residual_shift: missing model");
    const Tensor xt = stack_to_tensor(x);
    const DaeEvaluation eval(*ctx.model, xt);
    Tensor r = xt;
    for (std::size_t n = 0; n < r.size(); ++n) r.v[n] -= eval.output().v[n];
    const Tensor jr = eval.vjp(r);
    for (std::size_t n = 0; n < r.size(); ++n) r.v[n] -= jr.v[n];
    return tensor_to_stack(r, x);
}

RealGrid prior_gradient(const PriorContext& ctx, const RealGrid& u) {
    ctx.validate(false);
    TransformResult tr = forward_transform(u, ctx.profile, ctx.include_gradients);
    const ProfileStack t = residual_shift(ctx, tr.stack);
    return reenter_plane(t, tr.lows, 0, t.channel_count(), 0, ctx.reentry);
}

ComplexGrid prior_gradient(const PriorContext& ctx, const ComplexGrid& u) {
    ctx.validate(true);
    TransformResult tr = forward_transform(u, ctx.profile, ctx.include_gradients);
    const ProfileStack t = residual_shift(ctx, tr.stack);
    const int per = t.per_plane();
    const int tik_per_plane = ctx.profile.count();
    RealGrid re = reenter_plane(t, tr.lows, 0, per, 0, ctx.reentry);
    RealGrid im = reenter_plane(t, tr.lows, per, per, tik_per_plane, ctx.reentry);
    return ComplexGrid::from_planes(re, im);
}

}  // namespace hfdaep
