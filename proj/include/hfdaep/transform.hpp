#pragma once

#include "hfdaep/grid.hpp"

#include <vector>

namespace hfdaep {

/// Ordered set of Tikhonov regularization weights, one per profile channel.
/// Larger weights keep more of the image in the high-frequency channel.
struct AlphaProfile {
    std::vector<double> alphas;

    AlphaProfile() = default;
    explicit AlphaProfile(std::vector<double> a) : alphas(std::move(a)) { validate(); }

    void validate() const {
        if (alphas.empty()) throw std::invalid_argument("AlphaProfile: needs at least one alpha");
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!(alphas[i] > 0.0))
                throw std::invalid_argument("AlphaProfile: alphas must be positive");
            if (i > 0 && !(alphas[i] < alphas[i - 1]))
                throw std::invalid_argument("AlphaProfile: alphas must be strictly decreasing");
        }
    }

    int count() const { return static_cast<int>(alphas.size()); }

    static AlphaProfile standard() { return AlphaProfile({1000.0, 800.0, 400.0, 50.0}); }
};

enum class ChannelKind { tikhonov_hf, gradient_x, gradient_y };

/// Channel-wise concatenation of high-frequency components. For complex
/// inputs the real plane's channels come first, then the imaginary plane's,
/// each in AlphaProfile order (gradient channels, when enabled, follow the
/// Tikhonov channels of their plane).
struct ProfileStack {
    std::vector<RealGrid> channels;
    std::vector<ChannelKind> kinds;
    AlphaProfile profile;
    bool from_complex = false;

    int channel_count() const { return static_cast<int>(channels.size()); }
    int per_plane() const { return from_complex ? channel_count() / 2 : channel_count(); }
    int height() const { return channels.empty() ? 0 : channels.front().height; }
    int width() const { return channels.empty() ? 0 : channels.front().width; }

    bool same_shape(const ProfileStack& o) const {
        return channel_count() == o.channel_count() && height() == o.height() &&
               width() == o.width();
    }
};

/// Low-frequency complements retained alongside a ProfileStack; same order as
/// the stack's Tikhonov channels (per plane for complex inputs).
struct LowpassSet {
    std::vector<RealGrid> lows;
};

/// Tikhonov lowpass: solves (I + alpha * grad^T grad) u_l = u with periodic
/// forward differences, as an exact pointwise division in the Fourier domain
/// by 1 + alpha * (4 sin^2(pi j/H) + 4 sin^2(pi k/W)).
RealGrid lowpass(const RealGrid& u, double alpha);

/// Forward differences with periodic wrap, and their transposes.
RealGrid forward_diff_x(const RealGrid& u);
RealGrid forward_diff_y(const RealGrid& u);
RealGrid forward_diff_x_transpose(const RealGrid& v);
RealGrid forward_diff_y_transpose(const RealGrid& v);

struct TransformResult {
    ProfileStack stack;
    LowpassSet lows;
};

/// Multi-profile high-frequency decomposition: channel i = u - lowpass(u,
/// alpha_i); optional extra channels carry the forward differences. The
/// returned LowpassSet holds each lowpass(u, alpha_i).
TransformResult forward_transform(const RealGrid& u, const AlphaProfile& profile,
                                  bool include_gradients = false);

/// Complex input: real and imaginary planes are transformed independently and
/// concatenated (real plane first).
TransformResult forward_transform(const ComplexGrid& u, const AlphaProfile& profile,
                                  bool include_gradients = false);

/// Per-channel re-addition of the retained lowpass components followed by the
/// channel mean. Exact inverse of forward_transform on unmodified stacks.
/// Gradient channels are excluded (they have no lowpass complement).
RealGrid backward_transform(const ProfileStack& updated, const LowpassSet& lows);
ComplexGrid backward_transform_complex(const ProfileStack& updated, const LowpassSet& lows);

}  // namespace hfdaep
