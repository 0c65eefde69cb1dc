#include "incsyn/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace incsyn {

using nlohmann::json;

namespace {

void requireKeys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

json matrixToJson(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrixFromJson(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a matrix");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw ConfigError(where + ": ragged matrix");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json affineToJson(const AffineMatrixFunction& f) {
  json out;
  out["constant"] = matrixToJson(f.constant());
  json coeffs = json::array();
  for (const Matrix& c : f.coefficients()) coeffs.push_back(matrixToJson(c));
  out["coefficients"] = coeffs;
  return out;
}

AffineMatrixFunction affineFromJson(const json& j, const std::string& where) {
  requireKeys(j, {"constant", "coefficients"}, where);
  Matrix c = matrixFromJson(j.at("constant"), where + ".constant");
  std::vector<Matrix> coeffs;
  for (const auto& cj : j.at("coefficients"))
    coeffs.push_back(matrixFromJson(cj, where + ".coefficients"));
  return AffineMatrixFunction(c, coeffs);
}

ReferenceGenerator referenceFromJson(const json& j, const std::string& where) {
  requireKeys(j, {"kind", "level", "amplitude", "angular_freq", "offset", "phase", "sequence"},
              where);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ReferenceGenerator::constant(j.at("level").get<double>());
  if (kind == "sinusoid")
    return ReferenceGenerator::sinusoid(
        j.value("amplitude", 1.0), j.at("angular_freq").get<double>(), j.value("offset", 0.0),
        j.value("phase", 0.0));
  if (kind == "sequence")
    return ReferenceGenerator::fromSequence(j.at("sequence").get<std::vector<double>>());
  throw ConfigError(where + ": unknown reference kind '" + kind + "'");
}

json referenceToJson(const ReferenceGenerator& r) {
  json out;
  switch (r.kind) {
    case ReferenceGenerator::Kind::Constant:
      out["kind"] = "constant";
      out["level"] = r.level;
      break;
    case ReferenceGenerator::Kind::Sinusoid:
      out["kind"] = "sinusoid";
      out["amplitude"] = r.amplitude;
      out["angular_freq"] = r.angular_freq;
      out["offset"] = r.offset;
      out["phase"] = r.phase;
      break;
    case ReferenceGenerator::Kind::Sequence:
      out["kind"] = "sequence";
      out["sequence"] = r.sequence;
      break;
  }
  return out;
}

}  // namespace

SynthesisOptions ExperimentConfig::synthesisOptions() const {
  SynthesisOptions opts;
  opts.sdp.delta_feas = delta_feas;
  opts.gamma_relax = gamma_relax;
  opts.variable_bound = variable_bound;
  if (factorization == "identity")
    opts.factorization = Factorization::Identity;
  else if (factorization == "lu")
    opts.factorization = Factorization::Lu;
  else
    throw ConfigError("synthesis.factorization must be 'identity' or 'lu'");
  return opts;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.scenarios.push_back({"step-r1", ReferenceGenerator::constant(1.0), 400, std::nullopt});
  c.scenarios.push_back({"step-r2", ReferenceGenerator::constant(2.0), 400, std::nullopt});
  c.scenarios.push_back(
      {"sinusoid", ReferenceGenerator::sinusoid(1.0, M_PI / 8.0, 2.5), 800, std::nullopt});
  return c;
}

std::string ExperimentConfig::toJson() const {
  json j;
  j["plant"] = plant;
  if (inline_lpv) {
    json m;
    m["A"] = affineToJson(inline_lpv->A);
    m["B"] = affineToJson(inline_lpv->B);
    m["C"] = affineToJson(inline_lpv->C);
    m["D"] = affineToJson(inline_lpv->D);
    json verts = json::array();
    for (const auto& v : inline_lpv->polytope.vertices())
      verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    m["polytope"] = verts;
    json ch;
    ch["w"] = inline_lpv->inputs.size("w");
    ch["u"] = inline_lpv->inputs.size("u");
    ch["z"] = inline_lpv->outputs.size("z");
    ch["y"] = inline_lpv->outputs.size("y");
    m["channels"] = ch;
    j["lpv"] = m;
  }
  j["weights"] = {{"alpha", alpha},
                  {"error_gain", error_gain},
                  {"error_zero", error_zero},
                  {"control_gain", control_gain},
                  {"eps_pole", eps_pole}};
  j["synthesis"] = {{"delta_feas", delta_feas},
                    {"factorization", factorization},
                    {"gamma_relax", gamma_relax},
                    {"variable_bound", variable_bound}};
  j["controllers"] = controllers;
  json scen = json::array();
  for (const auto& s : scenarios) {
    json sj;
    sj["name"] = s.name;
    sj["reference"] = referenceToJson(s.reference);
    sj["horizon"] = s.horizon;
    if (s.x0) sj["x0"] = *s.x0;
    scen.push_back(sj);
  }
  j["scenarios"] = scen;
  j["quadrature_order"] = quadrature_order;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::fromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  requireKeys(j,
              {"plant", "lpv", "weights", "synthesis", "controllers", "scenarios",
               "quadrature_order", "seed", "out_dir"},
              "config");
  ExperimentConfig c;
  c.scenarios.clear();
  if (j.contains("plant")) c.plant = j.at("plant").get<std::string>();
  if (j.contains("lpv")) {
    const json& m = j.at("lpv");
    requireKeys(m, {"A", "B", "C", "D", "polytope", "channels"}, "config.lpv");
    AffineLpvStateSpace sys;
    sys.A = affineFromJson(m.at("A"), "lpv.A");
    sys.B = affineFromJson(m.at("B"), "lpv.B");
    sys.C = affineFromJson(m.at("C"), "lpv.C");
    sys.D = affineFromJson(m.at("D"), "lpv.D");
    std::vector<Vector> verts;
    for (const auto& vj : m.at("polytope")) {
      Vector v(vj.size());
      for (std::size_t i = 0; i < vj.size(); ++i) v[i] = vj[i].get<double>();
      verts.push_back(v);
    }
    sys.polytope = SchedulingPolytope(static_cast<int>(verts[0].size()), verts);
    const json& ch = m.at("channels");
    requireKeys(ch, {"w", "u", "z", "y"}, "config.lpv.channels");
    sys.inputs = ChannelLayout({{"w", ch.at("w").get<int>()}, {"u", ch.at("u").get<int>()}});
    sys.outputs = ChannelLayout({{"z", ch.at("z").get<int>()}, {"y", ch.at("y").get<int>()}});
    sys.validate();
    c.inline_lpv = sys;
    c.plant = "inline";
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    requireKeys(w, {"alpha", "error_gain", "error_zero", "control_gain", "eps_pole"},
                "config.weights");
    c.alpha = w.value("alpha", c.alpha);
    c.error_gain = w.value("error_gain", c.error_gain);
    c.error_zero = w.value("error_zero", c.error_zero);
    c.control_gain = w.value("control_gain", c.control_gain);
    c.eps_pole = w.value("eps_pole", c.eps_pole);
  }
  if (j.contains("synthesis")) {
    const json& s = j.at("synthesis");
    requireKeys(s, {"delta_feas", "factorization", "gamma_relax", "variable_bound"},
                "config.synthesis");
    c.delta_feas = s.value("delta_feas", c.delta_feas);
    c.factorization = s.value("factorization", c.factorization);
    c.gamma_relax = s.value("gamma_relax", c.gamma_relax);
    c.variable_bound = s.value("variable_bound", c.variable_bound);
  }
  if (j.contains("controllers"))
    c.controllers = j.at("controllers").get<std::vector<std::string>>();
  for (const std::string& k : c.controllers)
    if (k != "incremental" && k != "standard")
      throw ConfigError("config.controllers: unknown controller kind '" + k + "'");
  if (j.contains("scenarios")) {
    for (const auto& sj : j.at("scenarios")) {
      requireKeys(sj, {"name", "reference", "horizon", "x0"}, "config.scenarios[]");
      ScenarioConfig s;
      s.name = sj.at("name").get<std::string>();
      s.reference = referenceFromJson(sj.at("reference"), "scenario '" + s.name + "'");
      s.horizon = sj.value("horizon", 400);
      if (s.horizon < 1) throw ConfigError("scenario '" + s.name + "': horizon must be >= 1");
      if (sj.contains("x0")) s.x0 = sj.at("x0").get<std::vector<double>>();
      c.scenarios.push_back(s);
    }
  }
  if (c.scenarios.empty()) c.scenarios = defaults().scenarios;
  c.quadrature_order = j.value("quadrature_order", c.quadrature_order);
  if (c.quadrature_order < 1) throw ConfigError("quadrature_order must be >= 1");
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  if (c.plant != "paper-example" && c.plant != "inline")
    throw ConfigError("config.plant must be \"paper-example\" or an inline lpv model");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return fromJson(ss.str());
}

}  // namespace incsyn
