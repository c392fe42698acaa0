#pragma once

// JSON encodings of measures, catalog functions, outer maps and functionals.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dk/functional.hpp"
#include "dk/measure.hpp"
#include "dk/smooth_function.hpp"

namespace dk::io {

using nlohmann::json;

/// Invalid configuration content; `pointer` is the JSON pointer of the
/// offending value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

// Typed field access; missing or mistyped fields raise ConfigError.
const json& field(const json& j, const std::string& key, const std::string& ptr);
double number(const json& j, const std::string& ptr);
double number_field(const json& j, const std::string& key, const std::string& ptr);
double number_field(const json& j, const std::string& key, const std::string& ptr, double fallback);
long long integer(const json& j, const std::string& ptr);
Vec vector(const json& j, const std::string& ptr);

/// {"dimension": d, "atoms": [{"x": [...], "w": w}, ...]}
AtomicMeasure measure_from_json(const json& j, const std::string& ptr);
json to_json(const AtomicMeasure& mu);

/// {"kind": "gaussian_bump", "center": [...], "width": w, "amplitude": a}, etc.
SmoothFunction function_from_json(const json& j, const std::string& ptr, int dimension);
json to_json(const SmoothFunction& phi);

OuterMap outer_from_json(const json& j, const std::string& ptr, int arity);
json to_json(const OuterMap& f);

/// {"family": "zero" | "constant" | "interaction" | "cylindrical", ...}
FunctionalPtr functional_from_json(const json& j, const std::string& ptr, int dimension);

}  // namespace dk::io
