#pragma once

#include "surreal/training.hpp"

#include "json.hpp"

#include <initializer_list>
#include <string>

namespace surreal {

using Json = nlohmann::json;

// Throws ArgumentError when obj has a key outside `allowed`.
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& context);

Json to_json(const loss::LossWeights& weights);
Json to_json(const loss::LossReport& report);
Json to_json(const TrainConfig& config);
Json to_json(const nn::Params& params);

// Missing keys keep their defaults; unknown keys are rejected.
loss::LossWeights loss_weights_from_json(const Json& j, loss::LossWeights base = {});
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});
loss::LossReport loss_report_from_json(const Json& j);
nn::Params params_from_json(const Json& j, const std::string& name);

Json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const Json& j);

}  // namespace surreal
