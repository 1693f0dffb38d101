#pragma once

#include <cstdint>
#include <variant>

namespace incsub {

struct ConstantStep {
    double alpha;
};

/// alpha_k = a / k^p
struct PowerLawStep {
    double a;
    double p;
};

class StepSchedule {
public:
    static StepSchedule constant(double alpha);
    static StepSchedule power_law(double a, double p);

    /// alpha_k for k >= 1.
    double at(std::uint64_t k) const;

    bool is_constant() const { return std::holds_alternative<ConstantStep>(kind_); }

    /// sum alpha_k^2 < inf
    bool square_summable() const;
    /// 2/3 < p <= 1, the window for the diminishing-step Markov method.
    bool markov_valid() const;

    const std::variant<ConstantStep, PowerLawStep>& kind() const { return kind_; }

private:
    explicit StepSchedule(std::variant<ConstantStep, PowerLawStep> k) : kind_(k) {}
    std::variant<ConstantStep, PowerLawStep> kind_;
};

inline double step_size(const StepSchedule& s, std::uint64_t k) { return s.at(k); }

}  // namespace incsub
