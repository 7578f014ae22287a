#include "whitney/io.hpp"

#include <algorithm>

namespace whitney {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown_fields(const json& obj, const std::vector<std::string>& allowed,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ParseError(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
}

std::vector<std::string> parse_name_list(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty())
    throw ParseError(where, "expected a non-empty array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string())
      throw ParseError(where + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

}  // namespace

FamilySpec MapDocument::to_family() const {
  return make_family(map, static_cast<int>(lambda_vars.size()), lambda_vars);
}

MapDocument parse_map_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("document", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("document", "expected a JSON object");
  reject_unknown_fields(doc, {"format_version", "vars", "lambda_vars", "components"}, "");

  MapDocument out;
  if (!doc.contains("format_version") || !doc["format_version"].is_string())
    throw ParseError("format_version", "missing or not a string");
  out.format_version = doc["format_version"].get<std::string>();
  if (out.format_version != "1")
    throw ParseError("format_version", "unsupported version '" + out.format_version + "'");

  if (!doc.contains("vars")) throw ParseError("vars", "missing");
  out.vars = parse_name_list(doc["vars"], "vars");
  if (doc.contains("lambda_vars"))
    out.lambda_vars = parse_name_list(doc["lambda_vars"], "lambda_vars");

  const int nv = static_cast<int>(out.vars.size() + out.lambda_vars.size());

  if (!doc.contains("components") || !doc["components"].is_array() ||
      doc["components"].empty())
    throw ParseError("components", "expected a non-empty array");

  std::vector<Polynomial> comps;
  for (std::size_t ci = 0; ci < doc["components"].size(); ++ci) {
    const std::string cwhere = "components[" + std::to_string(ci) + "]";
    const json& terms = doc["components"][ci];
    if (!terms.is_array()) throw ParseError(cwhere, "expected an array of terms");
    Polynomial poly(nv);
    std::vector<Exponents> seen;
    for (std::size_t ti = 0; ti < terms.size(); ++ti) {
      const std::string twhere = cwhere + "[" + std::to_string(ti) + "]";
      const json& term = terms[ti];
      if (!term.is_object()) throw ParseError(twhere, "expected a term object");
      reject_unknown_fields(term, {"coef", "exps"}, twhere);
      if (!term.contains("coef") || !term["coef"].is_string())
        throw ParseError(twhere + ".coef", "missing or not a string");
      if (!term.contains("exps") || !term["exps"].is_array())
        throw ParseError(twhere + ".exps", "missing or not an array");

      Rational coef;
      try {
        coef = Rational::from_string(term["coef"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ParseError(twhere + ".coef", e.what());
      }
      if (coef.is_zero()) throw ParseError(twhere + ".coef", "zero coefficient");

      const json& exps = term["exps"];
      if (static_cast<int>(exps.size()) != nv)
        throw ParseError(twhere + ".exps",
                         "expected " + std::to_string(nv) + " exponents, got " +
                             std::to_string(exps.size()));
      Exponents e(nv);
      for (int k = 0; k < nv; ++k) {
        if (!exps[k].is_number_unsigned())
          throw ParseError(twhere + ".exps[" + std::to_string(k) + "]",
                           "expected a non-negative integer");
        e[k] = exps[k].get<std::uint32_t>();
      }
      if (std::find(seen.begin(), seen.end(), e) != seen.end())
        throw ParseError(twhere + ".exps", "duplicate monomial in component");
      seen.push_back(e);
      poly.add_term(e, coef);
    }
    comps.push_back(std::move(poly));
  }
  out.map = PolynomialMap(nv, std::move(comps));
  return out;
}

MapDocument document_from_map(const PolynomialMap& map, std::vector<std::string> vars,
                              std::vector<std::string> lambda_vars) {
  if (static_cast<int>(vars.size() + lambda_vars.size()) != map.domain_dim)
    throw std::invalid_argument("document_from_map: name count mismatch");
  MapDocument doc;
  doc.vars = std::move(vars);
  doc.lambda_vars = std::move(lambda_vars);
  doc.map = map;
  return doc;
}

std::string emit_map_document(const MapDocument& doc) {
  ordered_json out;
  out["format_version"] = doc.format_version;
  out["vars"] = doc.vars;
  if (!doc.lambda_vars.empty()) out["lambda_vars"] = doc.lambda_vars;
  ordered_json comps = ordered_json::array();
  for (const auto& poly : doc.map.components) {
    ordered_json terms = ordered_json::array();
    for (const auto& [e, c] : poly.terms()) {
      ordered_json term;
      term["coef"] = c.to_string();
      term["exps"] = e;
      terms.push_back(std::move(term));
    }
    comps.push_back(std::move(terms));
  }
  out["components"] = std::move(comps);
  return out.dump(2) + "\n";
}

namespace {

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (double c : v) a.push_back(c);
  return a;
}

ordered_json rational_vec_json(const std::vector<Rational>& v) {
  ordered_json a = ordered_json::array();
  for (const auto& c : v) a.push_back(c.to_string());
  return a;
}

}  // namespace

ordered_json to_json(const ImmersionCertificate& cert) {
  ordered_json j;
  j["verdict"] = to_string(cert.verdict);
  j["r0_estimate"] = cert.r0_estimate;
  j["radii_checked"] = cert.radii_checked;
  j["min_minor_norm_profile"] = cert.min_minor_norm_profile;
  if (cert.witness) {
    j["witness"] = vec_json(*cert.witness);
    j["witness_sigma"] = cert.witness_sigma;
  }
  if (!cert.note.empty()) j["note"] = cert.note;
  return j;
}

ordered_json to_json(const DegreeResult& r) {
  ordered_json j;
  j["ok"] = r.ok;
  j["method"] = to_string(r.method);
  j["radius"] = r.radius;
  j["min_norm_on_sphere"] = r.min_norm_on_sphere;
  if (r.ok) j["value"] = r.value;
  if (!r.error.empty()) j["error"] = r.error;
  if (r.method == DegreeMethod::preimage_count) {
    if (r.ok) {
      j["regular_value"] = vec_json(r.regular_value);
      ordered_json roots = ordered_json::array();
      for (const auto& root : r.preimages) {
        ordered_json rj;
        rj["point"] = vec_json(root.x);
        rj["sign"] = root.sign;
        rj["det"] = root.det;
        rj["residual"] = root.residual;
        roots.push_back(std::move(rj));
      }
      j["preimages"] = std::move(roots);
    }
    j["starts"] = r.starts_used;
    j["converged"] = r.converged;
  } else {
    j["quadrature_estimate"] = r.quadrature_estimate;
    j["snap_distance"] = r.snap_distance;
    if (r.samples) j["samples"] = r.samples;
  }
  return j;
}

ordered_json to_json(const LocalDegreeResult& r) {
  ordered_json j;
  j["ok"] = r.ok;
  if (r.ok) j["value"] = r.value;
  if (!r.error.empty()) j["error"] = r.error;
  j["anchor_radius"] = r.anchor_radius;
  ordered_json stages = ordered_json::array();
  for (const auto& st : r.stages) {
    ordered_json sj;
    sj["radius"] = st.radius;
    sj["preimage_count"] = to_json(st.preimage);
    sj["kronecker_integral"] = to_json(st.kronecker);
    stages.push_back(std::move(sj));
  }
  j["stages"] = std::move(stages);
  return j;
}

ordered_json to_json(const IntersectionViaDegree& r) {
  ordered_json j;
  j["ok"] = r.ok;
  if (r.ok) j["value"] = r.value;
  if (!r.error.empty()) j["error"] = r.error;
  ordered_json ev = ordered_json::array();
  for (const auto& e : r.evidence) {
    ordered_json ej;
    ej["t"] = e.t;
    ej["alpha"] = e.alpha;
    ej["degree_pos_t"] = e.degree_pos;
    ej["degree_neg_t"] = e.degree_neg;
    ev.push_back(std::move(ej));
  }
  j["evidence"] = std::move(ev);
  return j;
}

ordered_json to_json(const SelfIntersectionPair& p) {
  ordered_json j;
  j["p"] = vec_json(p.p);
  j["q"] = vec_json(p.q);
  j["residual"] = p.residual;
  j["regular"] = p.regular;
  if (p.regular) j["sign"] = p.sign;
  j["condition"] = p.condition;
  j["det"] = p.det;
  return j;
}

ordered_json to_json(const IntersectionReport& r) {
  ordered_json j;
  j["radius"] = r.radius;
  j["complete_regular"] = r.complete_regular;
  if (r.intersection_number_valid) j["intersection_number"] = r.intersection_number;
  ordered_json pairs = ordered_json::array();
  for (const auto& p : r.pairs) pairs.push_back(to_json(p));
  j["pairs"] = std::move(pairs);
  ordered_json st;
  st["starts"] = r.stats.starts;
  st["converged"] = r.stats.converged;
  st["deduped"] = r.stats.deduped;
  st["diagonal_hits"] = r.stats.diagonal_hits;
  st["near_diagonal_suspicious"] = r.stats.near_diagonal_suspicious;
  st["complete"] = r.stats.complete;
  j["solver_stats"] = std::move(st);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

ordered_json to_json(const FamilyReport& r) {
  ordered_json j;
  j["n"] = r.n;
  j["p"] = r.p;
  ordered_json values = ordered_json::array();
  for (const auto& v : r.values) {
    ordered_json vj;
    vj["lambda"] = rational_vec_json(v.lambda);
    vj["status"] = to_string(v.status);
    if (v.status == PointStatus::ok) {
      vj["intersection_number"] = v.value;
      vj["radius"] = v.radius;
      vj["pair_value"] = v.pair_value;
      vj["degree_value"] = v.degree_value;
      vj["methods_agree"] = v.methods_agree;
    }
    vj["immersion_verdict"] = to_string(v.immersion_verdict);
    if (!v.note.empty()) vj["note"] = v.note;
    values.push_back(std::move(vj));
  }
  j["values"] = std::move(values);
  j["strata"] = r.strata;
  ordered_json m2;
  m2["defined"] = r.mod2.defined;
  if (r.mod2.defined) {
    m2["generic"] = r.mod2.generic;
    m2["exceptional"] = r.mod2.exceptional;
  }
  j["mod2_generic"] = std::move(m2);
  if (r.sign_fit) {
    ordered_json f;
    ordered_json terms = ordered_json::array();
    for (const auto& [e, c] : r.sign_fit->h.terms()) {
      ordered_json t;
      t["coef"] = c.to_string();
      t["exps"] = e;
      terms.push_back(std::move(t));
    }
    f["h"] = std::move(terms);
    f["c"] = r.sign_fit->c;
    f["mismatches"] = r.sign_fit->mismatches;
    j["sign_fit"] = std::move(f);
  }
  return j;
}

}  // namespace whitney
