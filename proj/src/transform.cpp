#include "hfdaep/transform.hpp"

#include "hfdaep/fft.hpp"

#include <cmath>

namespace hfdaep {
namespace {

// Eigenvalues of the periodic forward-difference Laplacian grad^T grad.
std::vector<double> laplacian_symbol(int h, int w) {
    std::vector<double> s(static_cast<std::size_t>(h) * w);
    for (int j = 0; j < h; ++j) {
        const double sy = std::sin(M_PI * j / h);
        for (int k = 0; k < w; ++k) {
            const double sx = std::sin(M_PI * k / w);
            s[static_cast<std::size_t>(j) * w + k] = 4.0 * (sy * sy + sx * sx);
        }
    }
    return s;
}

void check_alpha(double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("lowpass: alpha must be nonnegative");
    if (!std::isfinite(alpha)) throw std::invalid_argument("lowpass: alpha must be finite");
}

TransformResult transform_plane(const RealGrid& u, const AlphaProfile& profile,
                                bool include_gradients) {
    profile.validate();
    TransformResult r;
    r.stack.profile = profile;

    // One forward FFT shared across all profiles.
    const ComplexGrid spectrum = fft2(ComplexGrid::from_real(u));
    const std::vector<double> s = laplacian_symbol(u.height, u.width);

    for (double alpha : profile.alphas) {
        check_alpha(alpha);
        ComplexGrid filtered(u.height, u.width);
        for (std::size_t n = 0; n < spectrum.size(); ++n)
            filtered.values[n] = spectrum.values[n] / (1.0 + alpha * s[n]);
        RealGrid low = ifft2(filtered).real_part();

        RealGrid high(u.height, u.width);
        for (std::size_t n = 0; n < high.size(); ++n)
            high.values[n] = u.values[n] - low.values[n];

        r.stack.channels.push_back(std::move(high));
        r.stack.kinds.push_back(ChannelKind::tikhonov_hf);
        r.lows.lows.push_back(std::move(low));
    }
    if (include_gradients) {
        r.stack.channels.push_back(forward_diff_x(u));
        r.stack.kinds.push_back(ChannelKind::gradient_x);
        r.stack.channels.push_back(forward_diff_y(u));
        r.stack.kinds.push_back(ChannelKind::gradient_y);
    }
    return r;
}

}  // namespace

RealGrid lowpass(const RealGrid& u, double alpha) {
    check_alpha(alpha);
    const ComplexGrid spectrum = fft2(ComplexGrid::from_real(u));
    const std::vector<double> s = laplacian_symbol(u.height, u.width);
    ComplexGrid filtered(u.height, u.width);
    for (std::size_t n = 0; n < spectrum.size(); ++n)
        filtered.values[n] = spectrum.values[n] / (1.0 + alpha * s[n]);
    return ifft2(filtered).real_part();
}

RealGrid forward_diff_x(const RealGrid& u) {
    RealGrid d(u.height, u.width);
    for (int i = 0; i < u.height; ++i)
        for (int j = 0; j < u.width; ++j)
            d.at(i, j) = u.at(i, (j + 1) % u.width) - u.at(i, j);
    return d;
}

RealGrid forward_diff_y(const RealGrid& u) {
    RealGrid d(u.height, u.width);
    for (int i = 0; i < u.height; ++i)
        for (int j = 0; j < u.width; ++j)
            d.at(i, j) = u.at((i + 1) % u.height, j) - u.at(i, j);
    return d;
}

RealGrid forward_diff_x_transpose(const RealGrid& v) {
    RealGrid d(v.height, v.width);
    for (int i = 0; i < v.height; ++i)
        for (int j = 0; j < v.width; ++j)
            d.at(i, j) = v.at(i, (j - 1 + v.width) % v.width) - v.at(i, j);
    return d;
}

RealGrid forward_diff_y_transpose(const RealGrid& v) {
    RealGrid d(v.height, v.width);
    for (int i = 0; i < v.height; ++i)
        for (int j = 0; j < v.width; ++j)
            d.at(i, j) = v.at((i - 1 + v.height) % v.height, j) - v.at(i, j);
    return d;
}

TransformResult forward_transform(const RealGrid& u, const AlphaProfile& profile,
                                  bool include_gradients) {
    return transform_plane(u, profile, include_gradients);
}

TransformResult forward_transform(const ComplexGrid& u, const AlphaProfile& profile,
                                  bool include_gradients) {
    TransformResult re = transform_plane(u.real_part(), profile, include_gradients);
    TransformResult im = transform_plane(u.imag_part(), profile, include_gradients);

    TransformResult r;
    r.stack.profile = profile;
    r.stack.from_complex = true;
    auto append = [&r](TransformResult& part) {
        for (auto& c : part.stack.channels) r.stack.channels.push_back(std::move(c));
        for (auto k : part.stack.kinds) r.stack.kinds.push_back(k);
        for (auto& l : part.lows.lows) r.lows.lows.push_back(std::move(l));
    };
    append(re);
    append(im);
    return r;
}

namespace {

// Mean over Tikhonov channels of (channel + low) for one plane slice.
RealGrid backward_plane(const ProfileStack& stack, const LowpassSet& lows, int chan_begin,
                        int chan_count, int low_begin) {
    const int h = stack.height();
    const int w = stack.width();
    RealGrid out(h, w);
    int tikhonov = 0;
    int low_index = low_begin;
    for (int c = chan_begin; c < chan_begin + chan_count; ++c) {
        if (stack.kinds[c] != ChannelKind::tikhonov_hf) continue;
        if (low_index >= static_cast<int>(lows.lows.size()))
            throw std::invalid_argument("backward_transform: lowpass set shorter than stack");
        const RealGrid& ch = stack.channels[c];
        const RealGrid& lo = lows.lows[low_index++];
        if (!ch.same_shape(lo))
            throw std::invalid_argument("backward_transform: channel/lowpass shape mismatch");
        for (std::size_t n = 0; n < out.size(); ++n)
            out.values[n] += ch.values[n] + lo.values[n];
        ++tikhonov;
    }
    if (tikhonov == 0)
        throw std::invalid_argument("backward_transform: stack has no tikhonov channels");
    const double inv = 1.0 / tikhonov;
    for (auto& v : out.values) v *= inv;
    return out;
}

int count_tikhonov(const ProfileStack& s, int begin, int count) {
    int n = 0;
    for (int c = begin; c < begin + count; ++c)
        if (s.kinds[c] == ChannelKind::tikhonov_hf) ++n;
    return n;
}

}  // namespace

RealGrid backward_transform(const ProfileStack& updated, const LowpassSet& lows) {
    if (updated.from_complex)
        throw std::invalid_argument("backward_transform: complex stack passed to real inverse");
    if (count_tikhonov(updated, 0, updated.channel_count()) != static_cast<int>(lows.lows.size()))
        throw std::invalid_argument("backward_transform: lowpass count does not match stack");
    return backward_plane(updated, lows, 0, updated.channel_count(), 0);
}

ComplexGrid backward_transform_complex(const ProfileStack& updated, const LowpassSet& lows) {
    if (!updated.from_complex)
        throw std::invalid_argument("backward_transform_complex: stack is not complex");
    const int per = updated.per_plane();
    const int tik_per_plane = count_tikhonov(updated, 0, per);
    if (2 * tik_per_plane != static_cast<int>(lows.lows.size()))
        throw std::invalid_argument("backward_transform: lowpass count does not match stack");
    RealGrid re = backward_plane(updated, lows, 0, per, 0);
    RealGrid im = backward_plane(updated, lows, per, per, tik_per_plane);
    return ComplexGrid::from_planes(re, im);
}

}  // namespace hfdaep
