#ifndef WHITNEY_IO_HPP
#define WHITNEY_IO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "whitney/degree.hpp"
#include "whitney/family.hpp"
#include "whitney/immersion.hpp"
#include "whitney/polynomial.hpp"
#include "whitney/selfint.hpp"

namespace whitney {

/// Input-document or schema violation; `where` is a JSON-pointer-ish field
/// location ("components[2][0].coef").
struct ParseError : std::runtime_error {
  std::string where;
  ParseError(std::string location, const std::string& msg)
      : std::runtime_error(location + ": " + msg), where(std::move(location)) {}
};

/// The on-disk map format: named variables (optionally trailing family
/// parameters) and per-component term lists with exact rational coefficients.
/// Unknown fields are rejected.
struct MapDocument {
  std::string format_version = "1";
  std::vector<std::string> vars;
  std::vector<std::string> lambda_vars;
  PolynomialMap map;  // over vars + lambda_vars

  bool is_family() const { return !lambda_vars.empty(); }
  FamilySpec to_family() const;
};

MapDocument parse_map_document(const std::string& text);
std::string emit_map_document(const MapDocument& doc);

MapDocument document_from_map(const PolynomialMap& map, std::vector<std::string> vars,
                              std::vector<std::string> lambda_vars = {});

// report fragments (machine-readable evidence blocks)
nlohmann::ordered_json to_json(const ImmersionCertificate& cert);
nlohmann::ordered_json to_json(const DegreeResult& r);
nlohmann::ordered_json to_json(const LocalDegreeResult& r);
nlohmann::ordered_json to_json(const IntersectionViaDegree& r);
nlohmann::ordered_json to_json(const SelfIntersectionPair& p);
nlohmann::ordered_json to_json(const IntersectionReport& r);
nlohmann::ordered_json to_json(const FamilyReport& r);

}  // namespace whitney

#endif
