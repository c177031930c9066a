#pragma once

#include <optional>

namespace gasp {

// Learnability reward family.
//
// The in-band curve is R(p; a, b) = [ (p/a) * ((1-p)/(1-a))^((1-a)/a) ]^b:
// the learnability score p*(1-p)^alpha with alpha = (1-a)/a, rescaled so the
// maximum over p is exactly 1 and relocated by `a`. `a` is the pass rate the
// reward peaks at, `b` sharpens the peak. Outside the acceptance band a flat
// penalty applies; structurally broken proposals get the (larger) format
// penalty before any pass rate is even estimated.

enum class RewardRegion { in_band, out_of_band, format_error };

struct RewardOutcome {
    double value = 0.0;
    RewardRegion region = RewardRegion::in_band;
};

struct RewardSpec {
    double peak;       // a, in (0,1)
    double sharpness;  // b
    double band_lo;
    double band_hi;
    double out_of_band_penalty = -0.5;
    double format_penalty = -1.0;

    // Throws std::invalid_argument on a malformed spec.
    void validate() const;

    static RewardSpec lemma();            // a=0.5, b=5, band [0.3, 0.7]
    static RewardSpec lift();             // a=0.1, b=1, band [0.1, 0.5]
    static RewardSpec one_step_medium();  // a=0.3, b=5, band [0.1, 0.5]
    static RewardSpec one_step_hard();    // a=0.1, b=1, band [0.1, 0.5]
};

enum class OneStepVariant { medium, hard };

// R(p; a, b). Equals 1 exactly at p = a and 0 at the endpoints for b > 0.
// Throws std::domain_error when a is outside (0,1), p outside [0,1], or the
// value is undefined (p at an endpoint with b <= 0).
double generalized_reward(double p, double a, double b);

// Band gate around generalized_reward; both band endpoints are inclusive.
RewardOutcome banded_reward(double p, const RewardSpec& spec);

// [4p(1-p)]^5 on [0.3, 0.7], else -0.5.
RewardOutcome lemma_reward(double p);

// 10p((1-p)/0.9)^9 on [0.1, 0.5], else -0.5.
RewardOutcome lift_reward(double p);

// medium: R(p; 0.3, 5) on [0.1, 0.5]; hard: R(p; 0.1, 1) on [0.1, 0.5].
RewardOutcome one_step_reward(double p, OneStepVariant variant);

// Format gate: a malformed proposal earns the format penalty and its pass
// rate (if one was somehow supplied) is ignored; a well-formed proposal
// passes through to the band reward, which then requires p.
RewardOutcome apply_format_penalty(bool malformed, std::optional<double> p,
                                   const RewardSpec& spec);

}  // namespace gasp
