#include "iapi/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace iapi {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {}) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) fail(join(where, key), "unknown key");
  }
  for (const auto& key : required) {
    if (!j.contains(key)) fail(join(where, key), "missing required key");
  }
}

double number(const json& j, const std::string& where) {
  if (j.is_string() && (j == "inf" || j == "infinity")) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) fail(where, "must be positive");
  return v;
}

std::size_t count(const json& j, const std::string& where, std::size_t min = 1) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(min)) {
    fail(where, "expected an integer >= " + std::to_string(min));
  }
  return j.get<std::size_t>();
}

Eigen::VectorXd vector(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n) fail(where, "expected an array of " + std::to_string(n) + " numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

expr::Ast expression(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_string()) fail(where, "expected an expression string");
  const std::string text = j.get<std::string>();
  try {
    return expr::parse(text, n);
  } catch (const Error& e) {
    fail(where, e.kind() + " in '" + text + "': " + e.what());
  }
}

std::vector<expr::Ast> expressions(const json& j, std::size_t count, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != count) {
    fail(where, "expected an array of " + std::to_string(count) + " expression strings");
  }
  std::vector<expr::Ast> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(expression(j[i], n, where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string::npos) line_end = text.size();
  std::ostringstream os;
  os << "line " << line << ", column " << (byte >= line_start ? byte - line_start + 1 : 1) << ": "
     << text.substr(line_start, line_end - line_start);
  return os.str();
}

RegionMode region_mode(const json& j, const std::string& where) {
  if (j == "standard") return RegionMode::kStandard;
  if (j == "enlarge") return RegionMode::kEnlarge;
  if (j == "frozen") return RegionMode::kFrozen;
  fail(where, "expected \"standard\", \"enlarge\" or \"frozen\"");
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

Region parse_region(const json& j, std::size_t n, const std::string& where) {
  require_keys(j, where, {"box", "ball"});
  if (j.size() != 1) fail(where, "expected exactly one of \"box\" or \"ball\"");
  try {
    if (j.contains("box")) {
      const json& b = j["box"];
      require_keys(b, join(where, "box"), {"lower", "upper"}, {"lower", "upper"});
      return make_box(vector(b["lower"], n, join(where, "box.lower")), vector(b["upper"], n, join(where, "box.upper")));
    }
    const json& b = j["ball"];
    require_keys(b, join(where, "ball"), {"radius", "norm"}, {"radius"});
    Norm norm = Norm::kInfinity;
    if (b.contains("norm")) {
      if (b["norm"] == "inf") {
        norm = Norm::kInfinity;
      } else if (b["norm"] == "2") {
        norm = Norm::kEuclidean;
      } else {
        fail(join(where, "ball.norm"), "expected \"inf\" or \"2\"");
      }
    }
    return Region(Ball{n, positive(b["radius"], join(where, "ball.radius")), norm});
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

ProblemConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON at " + line_context(text, e.byte > 0 ? e.byte - 1 : 0) +
                      " (" + e.what() + ")");
  }

  ProblemConfig cfg;
  cfg.document = doc;
  cfg.fingerprint = fnv1a_hex(doc.dump());
  try {
    require_keys(doc, "", {"state_dim", "input_dim", "f", "g", "Q", "R", "mu0", "omega0", "domain", "basis", "pi",
                           "integrator", "tolerances", "verify", "description"},
                 {"state_dim", "input_dim", "f", "g", "Q", "R", "mu0", "omega0"});
    const std::size_t n = count(doc["state_dim"], "state_dim");
    const std::size_t m = count(doc["input_dim"], "input_dim");

    // Dynamics.
    std::vector<expr::Ast> f = expressions(doc["f"], n, n, "f");
    const json& gj = doc["g"];
    if (!gj.is_array() || gj.size() != n) fail("g", "expected " + std::to_string(n) + " rows");
    std::vector<expr::Ast> g;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = expressions(gj[i], m, n, "g[" + std::to_string(i) + "]");
      g.insert(g.end(), row.begin(), row.end());
    }
    std::shared_ptr<const Region> domain;
    if (doc.contains("domain")) domain = std::make_shared<const Region>(parse_region(doc["domain"], n, "domain"));
    try {
      cfg.pi.model = std::make_shared<const DynamicsModel>(n, m, expression_field(std::move(f)),
                                                          expression_matrix_field(std::move(g), n, m), domain);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail("f", e.what());
    }

    // Cost.
    const json& rj = doc["R"];
    if (!rj.is_array() || rj.size() != m) fail("R", "expected a " + std::to_string(m) + "x" + std::to_string(m) + " matrix");
    Matrix r(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      r.row(static_cast<Eigen::Index>(i)) = vector(rj[i], m, "R[" + std::to_string(i) + "]").transpose();
    }
    try {
      cfg.pi.cost = std::make_shared<const CostSpec>(expression_scalar(expression(doc["Q"], n, "Q")), r);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail("R", e.what());
    }

    // Regions.
    cfg.pi.omega0 = std::make_shared<const Region>(parse_region(doc["omega0"], n, "omega0"));

    // Basis.
    unsigned dmin = 2, dmax = 2;
    if (doc.contains("basis")) {
      require_keys(doc["basis"], "basis", {"monomials"}, {"monomials"});
      const json& mono = doc["basis"]["monomials"];
      require_keys(mono, "basis.monomials", {"min_degree", "max_degree"});
      if (mono.contains("min_degree")) dmin = static_cast<unsigned>(count(mono["min_degree"], "basis.monomials.min_degree", 2));
      if (mono.contains("max_degree")) dmax = static_cast<unsigned>(count(mono["max_degree"], "basis.monomials.max_degree", 2));
      if (dmax < dmin) fail("basis.monomials", "max_degree < min_degree");
    }
    cfg.pi.basis = std::make_shared<const BasisSet>(BasisSet::monomials(n, dmin, dmax));

    // Initial policy: explicit expressions or the improvement of given weights.
    const json& mj = doc["mu0"];
    try {
      if (mj.is_object()) {
        require_keys(mj, "mu0", {"from_weights"}, {"from_weights"});
        ValueFunctionEstimate v0(cfg.pi.basis, vector(mj["from_weights"], cfg.pi.basis->size(), "mu0.from_weights"));
        cfg.pi.mu0 = std::make_shared<const Policy>(improve_policy(cfg.pi.model, *cfg.pi.cost, v0));
      } else {
        cfg.pi.mu0 = std::make_shared<const Policy>(ExplicitPolicy{expressions(mj, m, n, "mu0")});
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail("mu0", e.what());
    }

    // Iteration settings.
    if (doc.contains("pi")) {
      const json& p = doc["pi"];
      require_keys(p, "pi", {"epsilon", "max_iterations", "spacing", "region_mode", "upsilon", "boundary_rays",
                             "gate_samples", "gate_interior_per_axis", "gate"});
      if (p.contains("epsilon")) cfg.pi.epsilon = positive(p["epsilon"], "pi.epsilon");
      if (p.contains("max_iterations")) cfg.pi.max_iterations = count(p["max_iterations"], "pi.max_iterations");
      if (p.contains("spacing")) cfg.pi.spacing = positive(p["spacing"], "pi.spacing");
      if (p.contains("region_mode")) cfg.pi.mode = region_mode(p["region_mode"], "pi.region_mode");
      if (p.contains("upsilon")) cfg.pi.upsilon = std::make_shared<const Region>(parse_region(p["upsilon"], n, "pi.upsilon"));
      if (p.contains("boundary_rays")) cfg.pi.boundary.rays = count(p["boundary_rays"], "pi.boundary_rays", 8);
      if (p.contains("gate")) {
        if (!p["gate"].is_boolean()) fail("pi.gate", "expected true or false");
        cfg.pi.gate.enabled = p["gate"].get<bool>();
      }
      if (p.contains("gate_samples")) cfg.pi.gate.boundary_samples = count(p["gate_samples"], "pi.gate_samples");
      if (p.contains("gate_interior_per_axis")) {
        cfg.pi.gate.interior_per_axis = count(p["gate_interior_per_axis"], "pi.gate_interior_per_axis", 2);
      }
    }
    if (cfg.pi.mode == RegionMode::kEnlarge && !cfg.pi.upsilon) fail("pi.upsilon", "required when region_mode is \"enlarge\"");

    if (doc.contains("integrator")) {
      const json& ij = doc["integrator"];
      require_keys(ij, "integrator", {"h", "t_max", "delta_origin", "divergence_bound"});
      if (ij.contains("h")) cfg.pi.integrator.h = positive(ij["h"], "integrator.h");
      if (ij.contains("t_max")) cfg.pi.integrator.t_max = positive(ij["t_max"], "integrator.t_max");
      if (ij.contains("delta_origin")) cfg.pi.integrator.delta_origin = positive(ij["delta_origin"], "integrator.delta_origin");
      if (ij.contains("divergence_bound")) {
        cfg.pi.integrator.divergence_bound = positive(ij["divergence_bound"], "integrator.divergence_bound");
      }
    }

    if (doc.contains("tolerances")) {
      const json& tj = doc["tolerances"];
      require_keys(tj, "tolerances", {"tau_inv", "tau_lyap", "tau_mono", "tau_val", "tau_hjb", "tail_rel", "tail_abs",
                                      "tol_boundary", "c_floor", "golden_tol"});
      Tolerances& t = cfg.pi.tolerances;
      BoundarySettings& b = cfg.pi.boundary;
      const auto set = [&](const char* key, double& slot) {
        if (tj.contains(key)) slot = positive(tj[key], std::string("tolerances.") + key);
      };
      set("tau_inv", t.tau_inv);
      set("tau_lyap", t.tau_lyap);
      set("tau_mono", t.tau_mono);
      set("tau_val", t.tau_val);
      set("tau_hjb", t.tau_hjb);
      set("tail_rel", t.tail_rel);
      set("tail_abs", t.tail_abs);
      set("tol_boundary", b.tol_boundary);
      set("c_floor", b.c_floor);
      set("golden_tol", b.golden_tol);
    }

    if (doc.contains("verify")) {
      const json& vj = doc["verify"];
      require_keys(vj, "verify", {"admissible_samples", "invariance_samples", "value_probes", "interior_per_axis",
                                  "polyline_points"});
      if (vj.contains("admissible_samples")) cfg.plan.admissible_samples = count(vj["admissible_samples"], "verify.admissible_samples");
      if (vj.contains("invariance_samples")) cfg.plan.invariance_samples = count(vj["invariance_samples"], "verify.invariance_samples", 8);
      if (vj.contains("value_probes")) cfg.plan.value_probes = count(vj["value_probes"], "verify.value_probes");
      if (vj.contains("polyline_points")) cfg.plan.polyline_points = count(vj["polyline_points"], "verify.polyline_points", 8);
      if (vj.contains("interior_per_axis")) cfg.verify.interior_per_axis = count(vj["interior_per_axis"], "verify.interior_per_axis", 2);
    }

    cfg.verify.integrator = cfg.pi.integrator;
    cfg.verify.tolerances = cfg.pi.tolerances;
    cfg.verify.boundary = cfg.pi.boundary;

    // Q must vanish at the origin and be positive on a coarse lattice of omega0.
    try {
      const Box bbox = cfg.pi.omega0->bounding_box();
      auto samples = grid_sample(cfg.pi.omega0, ((bbox.upper - bbox.lower) / 10.0).eval()).points;
      cfg.pi.cost->check_positive_definite(samples);
    } catch (const Error& e) {
      fail("Q", e.what());
    }
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace iapi
