#pragma once

#include "hfdaep/dae.hpp"
#include "hfdaep/transform.hpp"

namespace hfdaep {

/// How the retained lowpass components re-enter the image domain inside
/// prior_gradient. `descend` performs the descent step in stack space and
/// inverts the descended stack (the lowpass terms cancel, so a zero residual
/// yields a zero gradient); `literal` applies the channel-mean inverse with
/// the lowpass components added directly to the shifted residual.
enum class LowsReentry { descend, literal };

struct PriorContext {
    const DaeModel* model = nullptr;
    AlphaProfile profile = AlphaProfile::standard();
    bool include_gradients = false;
    LowsReentry reentry = LowsReentry::descend;

    int expected_channels(bool complex_input) const {
        const int per_plane = profile.count() + (include_gradients ? 2 : 0);
        return complex_input ? 2 * per_plane : per_plane;
    }
    void validate(bool complex_input) const;
};

/// Squared Frobenius norm of the stack residual W(u) - A(W(u)).
double prior_value(const PriorContext& ctx, const RealGrid& u);
double prior_value(const PriorContext& ctx, const ComplexGrid& u);

/// r - J(x)^T r with r = x - A(x): the bracketed term of the prior gradient.
ProfileStack residual_shift(const PriorContext& ctx, const ProfileStack& x);

/// Prior gradient surrogate: the shifted residual mapped back to the image
/// domain. Tikhonov channels re-enter through the channel mean (with the
/// lowpass handling selected by ctx.reentry); gradient channels re-enter
/// through the transpose of the forward difference. All channels share the
/// same 1/N weighting.
RealGrid prior_gradient(const PriorContext& ctx, const RealGrid& u);
ComplexGrid prior_gradient(const PriorContext& ctx, const ComplexGrid& u);

}  // namespace hfdaep
