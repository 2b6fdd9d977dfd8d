#include "kokonet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kokonet/error.hpp"
#include "kokonet/units.hpp"

namespace kokonet {
namespace {

Json arr4(const std::array<double, 4>& a, double scale = 1.0, int sig = 0) {
  Json j = Json::array();
  for (double v : a) j.push_back(sig > 0 ? round_sig(v * scale, sig) : v * scale);
  return j;
}

std::array<double, 4> get4(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Schema, std::string("missing field \"") + key + "\"");
  const Json& a = j.at(key);
  if (!a.is_array() || a.size() != 4) {
    throw Error(ErrorCode::Schema, std::string("field \"") + key + "\" must be an array of 4 numbers");
  }
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!a[i].is_number()) throw Error(ErrorCode::Schema, std::string("field \"") + key + "\" must hold numbers");
    out[i] = a[i].get<double>();
  }
  return out;
}

AngleUnit unit_of(const Json& j, AngleUnit fallback) {
  if (!j.contains("unit")) return fallback;
  const std::string u = j.at("unit").get<std::string>();
  if (u == "deg") return AngleUnit::Degrees;
  if (u == "rad") return AngleUnit::Radians;
  throw Error(ErrorCode::Schema, "unit must be \"deg\" or \"rad\"");
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Schema, std::string("field \"") + key + "\" has the wrong type");
  }
}

Json vec3(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

Json phase_to_json(const PhaseShift& p) { return Json{{"m", p.m}, {"v", p.v}}; }

}  // namespace

double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

Json net_to_json(const NetAngles& net, AngleUnit unit) {
  const double k = unit == AngleUnit::Degrees ? 180.0 / pi : 1.0;
  std::array<double, 4> a{}, b{}, g{}, d{};
  for (int i = 0; i < 4; ++i) {
    const auto s = static_cast<std::size_t>(i);
    a[s] = net[i].alpha;
    b[s] = net[i].beta;
    g[s] = net[i].gamma;
    d[s] = net[i].delta;
  }
  return Json{{"unit", unit == AngleUnit::Degrees ? "deg" : "rad"},
              {"alpha", arr4(a, k)},
              {"beta", arr4(b, k)},
              {"gamma", arr4(g, k)},
              {"delta", arr4(d, k)}};
}

NetAngles net_from_json(const Json& j, AngleUnit fallback) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "net must be a JSON object");
  const double k = unit_of(j, fallback) == AngleUnit::Degrees ? pi / 180.0 : 1.0;
  const auto a = get4(j, "alpha"), b = get4(j, "beta"), g = get4(j, "gamma"), d = get4(j, "delta");
  NetAngles net;
  for (int i = 0; i < 4; ++i) {
    const auto s = static_cast<std::size_t>(i);
    net[i] = {a[s] * k, b[s] * k, g[s] * k, d[s] * k};
  }
  return net;
}

Json state_to_json(const DihedralState& s) { return arr4(s.theta); }

DihedralState state_from_json(const Json& j, AngleUnit unit) {
  const double k = unit == AngleUnit::Degrees ? pi / 180.0 : 1.0;
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::Schema, "state must be an array of 4 angles");
  DihedralState s;
  for (int i = 0; i < 4; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw Error(ErrorCode::Schema, "state entries must be numbers");
    s[i] = j[static_cast<std::size_t>(i)].get<double>() * k;
  }
  return s;
}

Json report_to_json(const ClassificationReport& r) {
  Json j;
  j["verdict"] = r.verdict;
  j["elliptic"] = r.elliptic;
  j["moduliEqual"] = r.moduliEqual;
  j["moduliDeviation"] = r.moduliDeviation;
  j["amplitudesMatch"] = r.amplitudesMatch;
  j["amplitudesDeviation"] = r.amplitudesDeviation;
  j["M"] = r.M;
  j["moduli"] = arr4(r.moduli);
  j["phaseShiftsValid"] = r.phaseShiftsValid;
  Json ps = Json::array();
  if (r.phaseShiftsValid)
    for (const auto& p : r.phaseShifts) ps.push_back(phase_to_json(p));
  j["phaseShifts"] = ps;
  j["periodSigns"] = r.periodSigns ? Json(*r.periodSigns) : Json(nullptr);
  j["periodResidual"] = std::isfinite(r.periodResidual) ? Json(r.periodResidual) : Json(nullptr);
  j["diagnostic"] = r.diagnostic;
  return j;
}

Json exclusivity_to_json(const ExclusivityReport& r) {
  return Json{{"orthodiagonalRuledOut", r.orthodiagonalRuledOut},
              {"conjugateModularRuledOut", r.conjugateModularRuledOut},
              {"trivialRuledOut", r.trivialRuledOut},
              {"linearCompoundRuledOut", r.linearCompoundRuledOut},
              {"stripVariantsChecked", r.stripVariantsChecked},
              {"margins",
               {{"orthodiagonal", r.orthodiagonalMargin},
                {"conjugateModular", r.conjugateModularMargin},
                {"trivial", r.trivialMargin},
                {"linearCompound", r.linearCompoundMargin}}}};
}

Json rigidity_to_json(const RigidityReport& r) {
  return Json{{"verdict", to_string(r.verdict)}, {"driver", r.driver + 1},  {"samples", r.samples},
              {"closing", r.closing},           {"minResidual", r.minResidual}, {"maxResidual", r.maxResidual}};
}

Json lengths_to_json(const EdgeLengths& l) {
  return Json{{"a1a2", l.a1a2}, {"a2a3", l.a2a3}, {"ab", arr4(l.ab)}, {"ac", arr4(l.ac)}};
}

EdgeLengths lengths_from_json(const Json& j) {
  EdgeLengths l;
  if (!j.is_object()) throw Error(ErrorCode::Schema, "lengths must be a JSON object");
  l.a1a2 = get_or(j, "a1a2", l.a1a2);
  l.a2a3 = get_or(j, "a2a3", l.a2a3);
  if (j.contains("ab")) l.ab = get4(j, "ab");
  if (j.contains("ac")) l.ac = get4(j, "ac");
  return l;
}

Json params_to_json(const SearchParameters& p) {
  auto r = [](double v) { return round_sig(v, 15); };
  return Json{{"u", r(p.u)},   {"x1", r(p.x1)}, {"x3", r(p.x3)}, {"y1", r(p.y1)},
              {"y2", r(p.y2)}, {"z", arr4(p.z, 1.0, 15)}};
}

Json solution_to_json(const VerifiedSolution& s) {
  Json j;
  j["seedIndex"] = s.seedIndex;
  j["M"] = round_sig(s.report.M, 15);
  j["residualMax"] = s.residualMax;
  j["params"] = params_to_json(s.params);
  j["epsilons"] = s.epsilons;
  Json net;
  for (const auto& [name, unit] : {std::pair{"radians", AngleUnit::Radians}, std::pair{"degrees", AngleUnit::Degrees}}) {
    Json n = net_to_json(s.net, unit);
    for (auto& [k, v] : n.items())
      if (v.is_array())
        for (auto& x : v) x = round_sig(x.get<double>(), 15);
    net[name] = n;
  }
  j["net"] = net;
  j["report"] = report_to_json(s.report);
  return j;
}

Json search_result_to_json(const SearchResult& r) {
  const SearchStats& s = r.stats;
  Json stats{{"seeds", s.seeds},
             {"samplerAttempts", s.samplerAttempts},
             {"converged", s.converged},
             {"nonPhysical", s.nonPhysical},
             {"duplicates", s.duplicates},
             {"signInconsistent", s.signInconsistent},
             {"ambiguousSigns", s.ambiguousSigns},
             {"residualRejected", s.residualRejected},
             {"nonReal", s.nonReal},
             {"nonElliptic", s.nonElliptic},
             {"periodRejected", s.periodRejected},
             {"classifyRejected", s.classifyRejected},
             {"verified", s.verified}};
  Json sols = Json::array();
  for (const auto& v : r.solutions) sols.push_back(solution_to_json(v));
  return Json{{"stats", stats}, {"solutions", sols}};
}

SearchConfig search_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "search config must be a JSON object");
  SearchConfig c;
  const double k = unit_of(j, AngleUnit::Degrees) == AngleUnit::Degrees ? pi / 180.0 : 1.0;
  const auto d = get4(j, "deltas"), t = get4(j, "thetas");
  for (std::size_t i = 0; i < 4; ++i) {
    c.deltas[i] = d[i] * k;
    c.thetas[i] = t[i] * k;
  }
  c.seedCount = get_or(j, "seedCount", c.seedCount);
  c.rngSeed = get_or(j, "rngSeed", c.rngSeed);
  c.solverMaxIter = get_or(j, "solverMaxIter", c.solverMaxIter);
  c.dedupeRadius = get_or(j, "dedupeRadius", c.dedupeRadius);
  c.guardMargin = get_or(j, "guardMargin", c.guardMargin);
  c.threads = get_or(j, "threads", c.threads);
  if (j.contains("tolerances")) {
    const Json& t2 = j.at("tolerances");
    c.tolerances.converge = get_or(t2, "converge", c.tolerances.converge);
    c.tolerances.validate = get_or(t2, "validate", c.tolerances.validate);
    c.tolerances.signReject = get_or(t2, "signReject", c.tolerances.signReject);
  }
  if (j.contains("bounds")) {
    const Json& b = j.at("bounds");
    c.bounds.uMin = get_or(b, "uMin", c.bounds.uMin);
    c.bounds.absMax = get_or(b, "absMax", c.bounds.absMax);
    c.bounds.exclusion = get_or(b, "exclusion", c.bounds.exclusion);
  }
  return c;
}

Json search_config_to_json(const SearchConfig& c) {
  return Json{{"unit", "rad"},
              {"deltas", arr4(c.deltas)},
              {"thetas", arr4(c.thetas)},
              {"seedCount", c.seedCount},
              {"rngSeed", c.rngSeed},
              {"solverMaxIter", c.solverMaxIter},
              {"dedupeRadius", c.dedupeRadius},
              {"guardMargin", c.guardMargin},
              {"threads", c.threads},
              {"tolerances",
               {{"converge", c.tolerances.converge},
                {"validate", c.tolerances.validate},
                {"signReject", c.tolerances.signReject}}},
              {"bounds", {{"uMin", c.bounds.uMin}, {"absMax", c.bounds.absMax}, {"exclusion", c.bounds.exclusion}}}};
}

Json bundle_to_json(const FlexionBundle& b) {
  Json j;
  j["schema"] = kBundleSchema;
  j["net"] = net_to_json(b.net, AngleUnit::Radians);
  j["lengths"] = lengths_to_json(b.lengths);
  j["branch"] = b.branch < 0 ? "-" : "+";
  Json samples = Json::array();
  for (const auto& s : b.samples) {
    Json verts;
    for (std::size_t v = 0; v < 12; ++v) verts[kVertexLabels[v]] = vec3(s.embedded.vertices[v]);
    samples.push_back(Json{{"t", s.t}, {"theta", state_to_json(s.theta)}, {"vertices", verts}});
  }
  j["samples"] = samples;
  j["provenance"] = b.provenance;
  return j;
}

FlexionBundle bundle_from_json(const Json& j) {
  try {
    if (!j.is_object() || get_or<std::string>(j, "schema", "") != kBundleSchema) {
      throw Error(ErrorCode::Schema, std::string("expected schema \"") + kBundleSchema + "\"");
    }
    FlexionBundle b;
    b.net = net_from_json(j.at("net"), AngleUnit::Radians);
    b.lengths = lengths_from_json(j.at("lengths"));
    const std::string br = j.at("branch").get<std::string>();
    if (br != "+" && br != "-") throw Error(ErrorCode::Schema, "branch must be \"+\" or \"-\"");
    b.branch = br == "-" ? -1 : 1;
    b.provenance = get_or<std::string>(j, "provenance", "closed-form");
    for (const Json& s : j.at("samples")) {
      BundleSample bs;
      bs.t = s.at("t").get<double>();
      bs.theta = state_from_json(s.at("theta"), AngleUnit::Radians);
      bs.embedded.faces = net_faces();
      bs.embedded.lengths = b.lengths;
      const Json& v = s.at("vertices");
      for (std::size_t k = 0; k < 12; ++k) {
        const Json& p = v.at(kVertexLabels[k]);
        if (!p.is_array() || p.size() != 3) throw Error(ErrorCode::Schema, "vertex must be [x, y, z]");
        bs.embedded.vertices[k] = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      }
      b.samples.push_back(std::move(bs));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("malformed bundle: ") + e.what());
  }
}

Json bundle_check_to_json(const BundleCheck& c) {
  std::size_t n = 0;
  for (bool b : c.selfIntersecting) n += b ? 1 : 0;
  return Json{{"consistent", c.consistent},
              {"maxFlatAngleError", c.maxFlatAngleError},
              {"maxDihedralError", c.maxDihedralError},
              {"maxCongruenceError", c.maxCongruenceError},
              {"samples", c.selfIntersecting.size()},
              {"selfIntersectingSamples", n},
              {"selfIntersecting", c.selfIntersecting}};
}

std::string obj_text(const EmbeddedNet& e, const NetAngles& net, const DihedralState& state) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "# kokonet flat-angles-deg:";
  for (int i = 0; i < 4; ++i) {
    os << " A" << i + 1 << "(" << to_deg(net[i].alpha) << " " << to_deg(net[i].beta) << " "
       << to_deg(net[i].gamma) << " " << to_deg(net[i].delta) << ")";
  }
  os << "\n# kokonet dihedral-deg:";
  for (int i = 0; i < 4; ++i) os << " " << to_deg(state[i]);
  os << "\n# vertices: A1..A4 B1..B4 C1..C4\n";
  os << std::setprecision(17);
  for (const auto& v : e.vertices) os << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& f : e.faces) {
    os << "f";
    for (int i : f) os << " " << i + 1;
    os << "\n";
  }
  return os.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failure on " + path);
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failure on " + path);
}

Json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Schema, path + ": " + e.what());
  }
}

void export_obj(const EmbeddedNet& e, const NetAngles& net, const DihedralState& state,
                const std::string& path) {
  write_text(path, obj_text(e, net, state));
}

void export_bundle(const FlexionBundle& b, const std::string& path) {
  write_text(path, bundle_to_json(b).dump(2) + "\n");
}

FlexionBundle import_bundle(const std::string& path) { return bundle_from_json(read_json(path)); }

}  // namespace kokonet
