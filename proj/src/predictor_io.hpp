#pragma once

#include "json.hpp"

#include "generation.hpp"

namespace kbfg {

using ordered_json = nlohmann::ordered_json;

ordered_json learner_spec_to_json(const LearnerSpec& spec);
LearnerSpec learner_spec_from_json(const ordered_json& j);

ordered_json feature_kind_to_json(const FeatureKind& k);
FeatureKind feature_kind_from_json(const ordered_json& j);

ordered_json predictor_to_json(const Predictor& p);
Predictor predictor_from_json(const ordered_json& j);

// versioned container for the generated features of a run
ordered_json generated_features_to_json(const std::vector<GeneratedFeature>& features);
std::vector<GeneratedFeature> generated_features_from_json(const ordered_json& j);

}  // namespace kbfg
