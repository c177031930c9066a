#include "gasp/reward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gasp {

void RewardSpec::validate() const {
    if (!(peak > 0.0 && peak < 1.0))
        throw std::invalid_argument("reward peak must lie in (0,1)");
    if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi <= 1.0))
        throw std::invalid_argument("reward band must satisfy 0 <= lo < hi <= 1");
}

RewardSpec RewardSpec::lemma() { return {0.5, 5.0, 0.3, 0.7}; }
RewardSpec RewardSpec::lift() { return {0.1, 1.0, 0.1, 0.5}; }
RewardSpec RewardSpec::one_step_medium() { return {0.3, 5.0, 0.1, 0.5}; }
RewardSpec RewardSpec::one_step_hard() { return {0.1, 1.0, 0.1, 0.5}; }

double generalized_reward(double p, double a, double b) {
    if (!(a > 0.0 && a < 1.0))
        throw std::domain_error("generalized_reward: a must lie in (0,1)");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("generalized_reward: p must lie in [0,1]");
    // p == a gives base (a/a)*1^e == 1 exactly, so the peak value is 1 by
    // construction with no clamping.
    const double base = (p / a) * std::pow((1.0 - p) / (1.0 - a), (1.0 - a) / a);
    if (base == 0.0 && b <= 0.0)
        throw std::domain_error("generalized_reward: undefined at p endpoint for b <= 0");
    return std::pow(base, b);
}

RewardOutcome banded_reward(double p, const RewardSpec& spec) {
    spec.validate();
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("banded_reward: p must lie in [0,1]");
    if (p < spec.band_lo || p > spec.band_hi)
        return {spec.out_of_band_penalty, RewardRegion::out_of_band};
    return {generalized_reward(p, spec.peak, spec.sharpness), RewardRegion::in_band};
}

RewardOutcome lemma_reward(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("lemma_reward: p must lie in [0,1]");
    if (p < 0.3 || p > 0.7) return {-0.5, RewardRegion::out_of_band};
    return {std::pow(4.0 * p * (1.0 - p), 5.0), RewardRegion::in_band};
}

RewardOutcome lift_reward(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("lift_reward: p must lie in [0,1]");
    if (p < 0.1 || p > 0.5) return {-0.5, RewardRegion::out_of_band};
    return {10.0 * p * std::pow((1.0 - p) / 0.9, 9.0), RewardRegion::in_band};
}

RewardOutcome one_step_reward(double p, OneStepVariant variant) {
    switch (variant) {
        case OneStepVariant::medium:
            return banded_reward(p, RewardSpec::one_step_medium());
        case OneStepVariant::hard:
            return banded_reward(p, RewardSpec::one_step_hard());
    }
    throw std::invalid_argument("one_step_reward: unknown variant");
}

RewardOutcome apply_format_penalty(bool malformed, std::optional<double> p,
                                   const RewardSpec& spec) {
    if (malformed) return {spec.format_penalty, RewardRegion::format_error};
    if (!p.has_value())
        throw std::invalid_argument("apply_format_penalty: well-formed proposal needs a pass rate");
    return banded_reward(*p, spec);
}

}  // namespace gasp
