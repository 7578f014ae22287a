// whitney: certify small-sphere immersions of polynomial maps, compute the
// Whitney intersection number by independent routes, and scan polynomial
// families over parameter grids.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "whitney/io.hpp"

using namespace whitney;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitDisagreement = 2;
constexpr int kExitInconclusive = 3;

struct CommonOpts {
  std::string input_path;
  std::string out_path;
  std::uint64_t seed = 0x5eed;
  int threads = 0;  // 0: WHITNEY_THREADS or hardware
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("input", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int emit_report(const ordered_json& report, const std::string& out_path, int code) {
  std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write report to '" << out_path << "'\n";
      return kExitInputError;
    }
    out << text;
  }
  return code;
}

ordered_json report_skeleton(const std::string& command, const CommonOpts& opts) {
  ordered_json rep;
  rep["schema_version"] = "1";
  rep["command"] = command;
  rep["seed"] = opts.seed;
  rep["threads"] = opts.threads;
  rep["results"] = ordered_json::object();
  rep["errors"] = ordered_json::array();
  return rep;
}

MapDocument load_document(const CommonOpts& opts, ordered_json& rep) {
  MapDocument doc = parse_map_document(slurp(opts.input_path));
  // canonicalized echo of the input
  rep["input"] = ordered_json::parse(emit_map_document(doc));
  return doc;
}

void apply_common(ImmersionConfig& cfg, const CommonOpts& o) {
  cfg.seed = o.seed;
  cfg.threads = o.threads;
}
void apply_common(SelfIntersectConfig& cfg, const CommonOpts& o) {
  cfg.seed = o.seed;
  cfg.threads = o.threads;
}
void apply_common(DegreeConfig& cfg, const CommonOpts& o) {
  cfg.seed = o.seed;
  cfg.threads = o.threads;
}

// radius selection: an explicit radius anchors the certified schedule at the
// requested sphere, "auto" works below the certified estimate
struct RadiusPlan {
  bool is_auto = true;
  double value = 0.0;
};

RadiusPlan parse_radius(const std::string& s) {
  RadiusPlan plan;
  if (s == "auto") return plan;
  plan.is_auto = false;
  try {
    std::size_t pos = 0;
    plan.value = std::stod(s, &pos);
    if (pos != s.size() || !(plan.value > 0)) throw std::invalid_argument("");
  } catch (...) {
    throw ParseError("--radius", "expected a positive number or 'auto'");
  }
  return plan;
}

Rational parse_rational_token(const std::string& tok, const std::string& where) {
  try {
    return Rational::from_string(tok);
  } catch (const std::invalid_argument& e) {
    throw ParseError(where, e.what());
  }
}

// grid spec: semicolon-separated axes "name=v1,v2,..." or "name=from:to:count",
// axis order matching the document's lambda_vars
LambdaGrid parse_grid_spec(const std::string& spec, const std::vector<std::string>& names) {
  std::vector<std::vector<Rational>> axes;
  std::vector<std::string> seen;
  std::stringstream ss(spec);
  std::string axis;
  while (std::getline(ss, axis, ';')) {
    auto eq = axis.find('=');
    if (eq == std::string::npos) throw ParseError("--grid", "axis needs 'name=values'");
    std::string name = axis.substr(0, eq);
    std::string vals = axis.substr(eq + 1);
    seen.push_back(name);
    std::vector<Rational> axis_vals;
    if (vals.find(':') != std::string::npos) {
      std::stringstream vs(vals);
      std::string from_s, to_s, count_s;
      if (!std::getline(vs, from_s, ':') || !std::getline(vs, to_s, ':') ||
          !std::getline(vs, count_s))
        throw ParseError("--grid", "range axis needs from:to:count");
      Rational from = parse_rational_token(from_s, "--grid");
      Rational to = parse_rational_token(to_s, "--grid");
      long count = std::strtol(count_s.c_str(), nullptr, 10);
      if (count < 2) throw ParseError("--grid", "range axis needs count >= 2");
      Rational step = (to - from) / Rational(count - 1);
      for (long k = 0; k < count; ++k) axis_vals.push_back(from + step * Rational(k));
    } else {
      std::stringstream vs(vals);
      std::string tok;
      while (std::getline(vs, tok, ','))
        axis_vals.push_back(parse_rational_token(tok, "--grid"));
      if (axis_vals.empty()) throw ParseError("--grid", "empty axis");
    }
    axes.push_back(std::move(axis_vals));
  }
  if (seen != names)
    throw ParseError("--grid", "axes must match the document's lambda_vars in order");
  return tensor_grid(axes);
}

// ---------------------------------------------------------------------------
// subcommand drivers
// ---------------------------------------------------------------------------

int run_check_immersion(const CommonOpts& opts, double radius_scale) {
  ordered_json rep = report_skeleton("check-immersion", opts);
  MapDocument doc = load_document(opts, rep);
  if (doc.is_family())
    throw ParseError("input", "check-immersion expects a plain map; use scan for families");

  ImmersionConfig cfg;
  apply_common(cfg, opts);
  cfg.radius_scale = radius_scale;
  ImmersionCertificate cert = certify_small_sphere_immersion(doc.map, cfg);
  rep["results"]["immersion"] = to_json(cert);
  int code = cert.verdict == Verdict::pass ? kExitOk : kExitInconclusive;
  return emit_report(rep, opts.out_path, code);
}

// certificate anchored so the requested radius is the top of the schedule
ImmersionCertificate certify_for_radius(const PolynomialMap& map, const CommonOpts& opts,
                                        const RadiusPlan& plan, double& working_radius) {
  ImmersionConfig cfg;
  apply_common(cfg, opts);
  if (!plan.is_auto) cfg.radius_scale = 10.0 * plan.value;
  ImmersionCertificate cert = certify_small_sphere_immersion(map, cfg);
  working_radius = plan.is_auto ? 0.5 * cert.r0_estimate : plan.value;
  return cert;
}

int run_intersection(const CommonOpts& opts, const std::string& method,
                     const std::string& radius_str, const std::string& command) {
  ordered_json rep = report_skeleton(command, opts);
  MapDocument doc = load_document(opts, rep);
  if (doc.is_family())
    throw ParseError("input", "intersection expects a plain map; use scan for families");
  RadiusPlan plan = parse_radius(radius_str);

  double radius = 0;
  ImmersionCertificate cert = certify_for_radius(doc.map, opts, plan, radius);
  rep["results"]["immersion"] = to_json(cert);
  if (cert.verdict != Verdict::pass) {
    rep["errors"].push_back({{"where", "immersion"},
                             {"message", "immersion certificate is " + to_string(cert.verdict)}});
    return emit_report(rep, opts.out_path, kExitInconclusive);
  }
  rep["results"]["radius"] = radius;

  bool want_pairs = method == "pairs" || method == "both";
  bool want_degree = method == "degree" || method == "both";

  bool pairs_valid = false, degree_valid = false;
  int pairs_value = 0, degree_value = 0;

  if (want_pairs) {
    SelfIntersectConfig cfg;
    apply_common(cfg, opts);
    IntersectionReport pr = intersection_number_via_pairs(doc.map, radius, cfg);
    rep["results"]["pairs"] = to_json(pr);
    pairs_valid = pr.intersection_number_valid;
    pairs_value = pr.intersection_number;
    if (!pairs_valid)
      rep["errors"].push_back({{"where", "pairs"},
                               {"message", pr.note.empty() ? "pair route failed" : pr.note}});
  }
  if (want_degree) {
    DegreeConfig cfg;
    apply_common(cfg, opts);
    IntersectionViaDegree dr = intersection_number_via_degree(doc.map, cfg);
    rep["results"]["degree"] = to_json(dr);
    degree_valid = dr.ok;
    degree_value = dr.value;
    if (!degree_valid) rep["errors"].push_back({{"where", "degree"}, {"message", dr.error}});
  }

  int code = kExitOk;
  if (method == "both") {
    bool agree = pairs_valid && degree_valid && pairs_value == degree_value;
    ordered_json cmp;
    cmp["pairs_valid"] = pairs_valid;
    cmp["degree_valid"] = degree_valid;
    if (pairs_valid) cmp["pairs"] = pairs_value;
    if (degree_valid) cmp["degree"] = degree_value;
    cmp["agreement"] = agree;
    rep["results"]["cross_validation"] = std::move(cmp);
    if (!pairs_valid || !degree_valid)
      code = kExitInconclusive;
    else if (!agree)
      code = kExitDisagreement;
    else
      rep["results"]["intersection_number"] = pairs_value;
  } else if (method == "pairs") {
    if (pairs_valid)
      rep["results"]["intersection_number"] = pairs_value;
    else
      code = kExitInconclusive;
  } else {
    if (degree_valid)
      rep["results"]["intersection_number"] = degree_value;
    else
      code = kExitInconclusive;
  }
  return emit_report(rep, opts.out_path, code);
}

int run_degree(const CommonOpts& opts, const std::string& method,
               const std::string& radius_str) {
  ordered_json rep = report_skeleton("degree", opts);
  MapDocument doc = load_document(opts, rep);
  if (doc.is_family()) throw ParseError("input", "degree expects a plain square map");
  if (static_cast<int>(doc.map.components.size()) != doc.map.domain_dim)
    throw ParseError("input", "degree expects a square map (m components over m variables)");
  RadiusPlan plan = parse_radius(radius_str);

  DegreeConfig cfg;
  apply_common(cfg, opts);

  int code = kExitOk;
  if (plan.is_auto) {
    LocalDegreeResult lr = local_degree_at_origin(doc.map, cfg);
    rep["results"]["local_degree"] = to_json(lr);
    if (lr.ok)
      rep["results"]["degree"] = lr.value;
    else {
      rep["errors"].push_back({{"where", "local_degree"}, {"message", lr.error}});
      code = kExitInconclusive;
    }
  } else {
    bool want_pre = method == "preimage" || method == "both";
    bool want_kron = method == "kronecker" || method == "both";
    DegreeResult pre, kron;
    if (want_pre) {
      pre = degree_on_sphere(doc.map, plan.value, DegreeMethod::preimage_count, cfg);
      rep["results"]["preimage_count"] = to_json(pre);
      if (!pre.ok) rep["errors"].push_back({{"where", "preimage_count"}, {"message", pre.error}});
    }
    if (want_kron) {
      kron = degree_on_sphere(doc.map, plan.value, DegreeMethod::kronecker_integral, cfg);
      rep["results"]["kronecker_integral"] = to_json(kron);
      if (!kron.ok)
        rep["errors"].push_back({{"where", "kronecker_integral"}, {"message", kron.error}});
    }
    if (method == "both") {
      bool agree = pre.ok && kron.ok && pre.value == kron.value;
      rep["results"]["agreement"] = agree;
      if (!pre.ok || !kron.ok)
        code = kExitInconclusive;
      else if (!agree)
        code = kExitDisagreement;
      else
        rep["results"]["degree"] = pre.value;
    } else {
      const DegreeResult& r = want_pre ? pre : kron;
      if (r.ok)
        rep["results"]["degree"] = r.value;
      else
        code = kExitInconclusive;
    }
  }
  return emit_report(rep, opts.out_path, code);
}

int run_scan(const CommonOpts& opts, const std::string& grid_spec, int fit_degree) {
  ordered_json rep = report_skeleton("scan", opts);
  MapDocument doc = load_document(opts, rep);
  if (!doc.is_family()) throw ParseError("input", "scan expects a family (lambda_vars)");
  FamilySpec fam = doc.to_family();
  LambdaGrid grid = parse_grid_spec(grid_spec, doc.lambda_vars);

  FamilyConfig cfg;
  apply_common(cfg.immersion, opts);
  apply_common(cfg.selfint, opts);
  apply_common(cfg.degree, opts);
  cfg.fit_degree_bound = fit_degree;

  FamilyReport fr = scan_family(fam, grid, cfg);
  rep["results"]["scan"] = to_json(fr);

  bool any_failed = false;
  for (const auto& v : fr.values) any_failed |= v.status != PointStatus::ok;
  int code = any_failed ? kExitInconclusive : kExitOk;
  return emit_report(rep, opts.out_path, code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whitney intersection numbers of polynomial maps on small spheres"};
  app.require_subcommand(1);

  CommonOpts opts;
  opts.threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("input", opts.input_path, "map document (JSON)")->required();
    cmd->add_option("--out", opts.out_path, "write the report to this file (default stdout)");
    cmd->add_option("--seed", opts.seed, "PRNG seed for all samplers");
    cmd->add_option("--threads", opts.threads,
                    "worker threads (0 = WHITNEY_THREADS or hardware)");
  };

  double radius_scale = 1.0;
  CLI::App* ci = app.add_subcommand("check-immersion",
                                    "certify the small-sphere immersion property");
  add_common(ci);
  ci->add_option("--radius-scale", radius_scale, "top of the checked radius schedule");

  std::string method = "both", radius = "auto";
  CLI::App* in = app.add_subcommand("intersection", "Whitney intersection number");
  add_common(in);
  in->add_option("--method", method, "pairs | degree | both")
      ->check(CLI::IsMember({"pairs", "degree", "both"}));
  in->add_option("--radius", radius, "sphere radius or 'auto'");

  std::string xmethod = "both", xradius = "auto";
  CLI::App* cv = app.add_subcommand("cross-validate",
                                    "run both intersection routes and compare");
  add_common(cv);
  cv->add_option("--radius", xradius, "sphere radius or 'auto'");

  std::string dmethod = "both", dradius = "auto";
  CLI::App* dg = app.add_subcommand("degree", "topological degree of a square map");
  add_common(dg);
  dg->add_option("--method", dmethod, "preimage | kronecker | both")
      ->check(CLI::IsMember({"preimage", "kronecker", "both"}));
  dg->add_option("--radius", dradius, "sphere radius, or 'auto' for the local degree");

  std::string grid_spec;
  int fit_degree = 3;
  CLI::App* sc = app.add_subcommand("scan", "scan a family over a parameter grid");
  add_common(sc);
  sc->add_option("--grid", grid_spec, "axes: \"s=-2,-1,1,2\" or \"s=-1:1:5\"; ';' separated")
      ->required();
  sc->add_option("--fit-degree", fit_degree, "degree bound for the sign-representation fit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(ci)) return run_check_immersion(opts, radius_scale);
    if (app.got_subcommand(in)) return run_intersection(opts, method, radius, "intersection");
    if (app.got_subcommand(cv)) return run_intersection(opts, "both", xradius, "cross-validate");
    if (app.got_subcommand(dg)) return run_degree(opts, dmethod, dradius);
    if (app.got_subcommand(sc)) return run_scan(opts, grid_spec, fit_degree);
  } catch (const ParseError& e) {
    ordered_json rep = report_skeleton("error", opts);
    rep["errors"].push_back({{"where", e.where}, {"message", e.what()}});
    return emit_report(rep, opts.out_path, kExitInputError);
  } catch (const std::exception& e) {
    ordered_json rep = report_skeleton("error", opts);
    rep["errors"].push_back({{"where", "internal"}, {"message", e.what()}});
    return emit_report(rep, opts.out_path, kExitInputError);
  }
  return kExitInputError;
}
