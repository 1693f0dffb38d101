#include "incsub/step_schedule.hpp"

#include <cmath>

#include "incsub/errors.hpp"

namespace incsub {

StepSchedule StepSchedule::constant(double alpha) {
    // alpha = 0 is admitted and freezes the iterate.
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("constant step: alpha must be >= 0");
    return StepSchedule(ConstantStep{alpha});
}

StepSchedule StepSchedule::power_law(double a, double p) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("power-law step: a must be > 0");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("power-law step: p must lie in (0, 1]");
    return StepSchedule(PowerLawStep{a, p});
}

double StepSchedule::at(std::uint64_t k) const {
    if (k == 0) throw InvalidArgument("step size index must be >= 1");
    if (const auto* c = std::get_if<ConstantStep>(&kind_)) return c->alpha;
    const auto& pl = std::get<PowerLawStep>(kind_);
    if (pl.p == 1.0) return pl.a / static_cast<double>(k);
    return pl.a / std::pow(static_cast<double>(k), pl.p);
}

bool StepSchedule::square_summable() const {
    const auto* pl = std::get_if<PowerLawStep>(&kind_);
    return pl != nullptr && pl->p > 0.5;
}

bool StepSchedule::markov_valid() const {
    const auto* pl = std::get_if<PowerLawStep>(&kind_);
    return pl != nullptr && pl->p > 2.0 / 3.0 && pl->p <= 1.0;
}

}  // namespace incsub
