#include <cmath>
#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/numerics.hpp"

namespace wavefuse::numerics {

AdamState::AdamState(const Shape& param_shape, AdamHyperparameters h)
    : first_moment(param_shape), second_moment(param_shape), hyper(h) {}

void adam_update(Tensor& params, const Tensor& grads, AdamState& state, std::string_view block) {
  require_same_shape(params, grads, "adam_step grads");
  require_same_shape(params, state.first_moment, "adam_step first moment");
  require_same_shape(params, state.second_moment, "adam_step second moment");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("non-finite gradient in parameter block '" + std::string(block) +
                         "' at index " + std::to_string(i));
    }
  }

  const auto& h = state.hyper;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = h.beta1 * m + (1.0 - h.beta1) * g;
    v = h.beta2 * v + (1.0 - h.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

AdamResult adam_step(const Tensor& params, const Tensor& grads, const AdamState& state,
                     std::string_view block) {
  AdamResult r{params, state};
  adam_update(r.params, grads, r.state, block);
  return r;
}

}  // namespace wavefuse::numerics
