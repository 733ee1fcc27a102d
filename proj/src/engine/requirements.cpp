#include "quicheck/engine/requirements.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "quicheck/errors.hpp"
#include "quicheck/wire/error_codes.hpp"

namespace quicheck {

namespace embedded {
extern const std::string_view requirements_json;
}

RequirementRegistry RequirementRegistry::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("requirement registry: ") + e.what());
  }
  if (!doc.contains("requirements") || !doc["requirements"].is_array()) {
    throw InputError("requirement registry: missing 'requirements' array");
  }
  RequirementRegistry reg;
  for (const auto& rec : doc["requirements"]) {
    Requirement r;
    try {
      r.id = rec.at("id").get<std::string>();
      r.clause = rec.at("clause").get<std::string>();
      r.description = rec.value("description", "");
      const auto sev = rec.value("severity", "required");
      if (sev == "required") {
        r.severity = Severity::kRequired;
      } else if (sev == "advisory") {
        r.severity = Severity::kAdvisory;
      } else {
        throw InputError("requirement " + r.id + ": unknown severity '" + sev + "'");
      }
      const auto code_name = rec.value("error_code", "NO_ERROR");
      auto code = error_code_from_name(code_name);
      if (!code) throw InputError("requirement " + r.id + ": unknown error code " + code_name);
      r.error_code = *code;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("requirement registry record: ") + e.what());
    }
    if (reg.index_.contains(r.id)) throw InputError("duplicate requirement id " + r.id);
    reg.index_.emplace(r.id, reg.records_.size());
    reg.records_.push_back(std::move(r));
  }
  return reg;
}

RequirementRegistry RequirementRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open requirement registry " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool RequirementRegistry::contains(std::string_view id) const {
  return index_.find(id) != index_.end();
}

const Requirement& RequirementRegistry::at(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unregistered requirement " + std::string(id));
  return records_[it->second];
}

const RequirementRegistry& default_registry() {
  static const RequirementRegistry reg = RequirementRegistry::parse(embedded::requirements_json);
  return reg;
}

}  // namespace quicheck
