#ifndef RSTR_SERIALIZATION_HPP
#define RSTR_SERIALIZATION_HPP

#include "rstr/baseline.hpp"
#include "rstr/model.hpp"

#include "json.hpp"

#include <string>

namespace rstr {

// Models are stored as a JSON envelope:
//   {"format": "cdmer-model v1", "method": "rstr" | "baseline", ...}
// RSTR artifacts carry P, w, the kernel configuration, class names and a hash
// of the training source/target features; the features themselves must be
// supplied again at load time and are checked against the hash.

nlohmann::json kernel_to_json(const KernelConfig& cfg);
KernelConfig kernel_from_json(const nlohmann::json& j);

nlohmann::json hyperparams_to_json(const RstrHyperparams& hp);
/// Fields absent from `j` keep their value in `base`.
RstrHyperparams hyperparams_from_json(const nlohmann::json& j, RstrHyperparams base = {});

std::string serialize_model(const RstrModel& model);
std::string serialize_model(const BaselineModel& model);

/// "rstr" or "baseline"; throws DataError on an unknown envelope.
std::string model_method(const std::string& text);

RstrModel deserialize_rstr_model(const std::string& text, const BlockedFeatureSet& source,
                                 const BlockedFeatureSet& target);
BaselineModel deserialize_baseline_model(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rstr

#endif  // RSTR_SERIALIZATION_HPP
