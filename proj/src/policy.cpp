#include "gasp/policy.hpp"

namespace gasp {

const char* to_string(PolicyRole r) {
    return r == PolicyRole::teacher ? "teacher" : "student";
}

const char* to_string(TrainPhase p) {
    switch (p) {
        case TrainPhase::lemma: return "lemma";
        case TrainPhase::lift: return "lift";
        case TrainPhase::solver: return "solver";
    }
    return "?";
}

nlohmann::json GenerateRequest::to_json() const {
    return {{"version", "v1"},
            {"role", to_string(role)},
            {"template_id", template_id},
            {"variables", variables},
            {"sampling", {{"temperature", sampling.temperature}, {"seed", sampling.seed}}}};
}

}  // namespace gasp
