#include "app.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <httplib.h>

#include "kokonet/classify.hpp"
#include "kokonet/geometry.hpp"
#include "kokonet/kinematics.hpp"
#include "kokonet/qsnet.hpp"
#include "kokonet/search.hpp"
#include "kokonet/units.hpp"

namespace kokonet::app {
namespace {

double unit_scale(const Json& req) {
  const std::string u = req.contains("unit") ? req.at("unit").get<std::string>() : "deg";
  if (u == "deg") return pi / 180.0;
  if (u == "rad") return 1.0;
  throw Error(ErrorCode::Schema, "unit must be \"deg\" or \"rad\"");
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, std::string(what) + " must be a JSON object");
}

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::Schema, std::string("field \"") + key + "\" must be a number");
  }
  return j.at(key).get<double>();
}

int branch_of(const Json& j) {
  const std::string b = j.contains("branch") ? j.at("branch").get<std::string>() : "+";
  if (b == "+") return 1;
  if (b == "-") return -1;
  throw Error(ErrorCode::Schema, "branch must be \"+\" or \"-\"");
}

Json bound(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// Nets may arrive bare, in degrees by default, or as a search solution's net block.
NetAngles net_of(const Json& j) {
  require_object(j, "net");
  if (j.contains("radians")) return net_from_json(j.at("radians"), AngleUnit::Radians);
  return net_from_json(j, AngleUnit::Degrees);
}

EdgeLengths lengths_of(const Json& req, const NetAngles& net) {
  return req.contains("lengths") ? lengths_from_json(req.at("lengths")) : default_lengths(net);
}

FlexionBundle make_bundle(const NetAngles& net, const EdgeLengths& lengths, int branch,
                          const std::string& provenance, const std::vector<double>& t,
                          const std::vector<DihedralState>& states) {
  FlexionBundle b;
  b.net = net;
  b.lengths = lengths;
  b.branch = branch;
  b.provenance = provenance;
  for (std::size_t i = 0; i < t.size(); ++i) {
    b.samples.push_back({t[i], states[i], embed(net, states[i], lengths)});
  }
  return b;
}

Json error_body(std::string_view name, const std::string& message) {
  return Json{{"error", std::string(name)}, {"message", message}};
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string s = text;
  double scale = pi / 180.0;
  auto ends_with = [&](const char* suf) {
    const std::string x(suf);
    return s.size() >= x.size() && s.compare(s.size() - x.size(), x.size(), x) == 0;
  };
  if (ends_with("deg")) {
    s.resize(s.size() - 3);
  } else if (ends_with("rad")) {
    s.resize(s.size() - 3);
    scale = 1.0;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::Schema, "cannot parse angle \"" + text + "\"");
  }
  return v * scale;
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io:
      return 4;
    case ErrorCode::PhaseShiftInconsistent:
    case ErrorCode::Overflow:
    case ErrorCode::PropagationDead:
    case ErrorCode::EmbedInconsistent:
    case ErrorCode::TooFewSamples:
      return 3;
    default:
      return 2;
  }
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Schema:
      return 400;
    case ErrorCode::Io:
      return 500;
    default:
      return 422;
  }
}

EdgeLengths default_lengths(const NetAngles& net) { return convex_wing_lengths(net, EdgeLengths{}); }

std::string bundle_id(const std::string& bundleText) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(std::hash<std::string>{}(bundleText)));
  return buf;
}

Json run_qs(const Json& req) {
  require_object(req, "qs request");
  const double k = unit_scale(req);
  const QsSeed seed{number(req, "alpha") * k, number(req, "beta") * k, number(req, "gamma") * k};
  const int branch = branch_of(req);
  const int n = req.value("samples", 25);
  if (n < 1 || n > 100000) throw Error(ErrorCode::Schema, "samples must lie in [1, 100000]");

  const NetAngles net = build_qs_net(seed);
  const QsFlexion fl = qs_flexion(seed, branch);
  const ClassificationReport report = classify(net);
  const EdgeLengths lengths = lengths_of(req, net);

  std::vector<double> grid;
  if (req.contains("tMin") || req.contains("tMax")) {
    const double lo = number(req, "tMin"), hi = number(req, "tMax");
    if (!(lo < hi)) throw Error(ErrorCode::Schema, "tMin must be below tMax");
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1.0);
      if (fl.in_domain(t)) grid.push_back(t);
    }
  } else {
    for (const Interval& iv : fl.validIntervals)
      for (double t : sample_interval(iv, n)) grid.push_back(t);
  }
  std::vector<DihedralState> states;
  for (double t : grid) states.push_back(eval_flexion(fl, t));

  Json intervals = Json::array();
  for (const Interval& iv : fl.validIntervals) intervals.push_back(Json::array({bound(iv.lo), bound(iv.hi)}));
  return Json{{"report", report_to_json(report)},
              {"flexion", {{"M", fl.M}, {"validIntervals", intervals}}},
              {"bundle", bundle_to_json(make_bundle(net, lengths, branch, "closed-form", grid, states))}};
}

Json run_classify(const Json& req) {
  require_object(req, "classify request");
  const Json& netJson = req.contains("net") ? req.at("net") : req;
  const NetAngles net = net_of(netJson);
  const double tol = req.value("tol", kClassifyTol);
  if (!(tol > 0)) throw Error(ErrorCode::Schema, "tol must be positive");
  Json out{{"report", report_to_json(classify(net, tol))}};
  if (req.contains("state")) {
    const double k = unit_scale(req);
    const DihedralState s = state_from_json(req.at("state"), k == 1.0 ? AngleUnit::Radians : AngleUnit::Degrees);
    out["rigidity"] = rigidity_to_json(rigidity_probe(net, s));
  }
  return out;
}

Json run_search(const Json& req) {
  const SearchConfig cfg = search_config_from_json(req);
  cfg.validate();
  const SearchResult r = kokonet::run_search(cfg);
  Json out{{"config", search_config_to_json(cfg)}};
  for (auto& [key, v] : search_result_to_json(r).items()) out[key] = v;
  return out;
}

Json run_flex(const Json& req) {
  require_object(req, "flex request");
  if (!req.contains("net")) throw Error(ErrorCode::Schema, "missing field \"net\"");
  const NetAngles net = net_of(req.at("net"));
  const double k = unit_scale(req);
  if (!req.contains("start")) throw Error(ErrorCode::Schema, "missing field \"start\"");
  const DihedralState hint =
      state_from_json(req.at("start"), k == 1.0 ? AngleUnit::Radians : AngleUnit::Degrees);
  const int driver = req.value("driver", 1) - 1;
  if (driver < 0 || driver > 3) throw Error(ErrorCode::Schema, "driver must be 1..4");
  const int steps = req.value("steps", 41);
  if (steps < 2 || steps > 100000) throw Error(ErrorCode::Schema, "steps must lie in [2, 100000]");

  // The start state is only a hint: snap to the nearest closing state at the same driver angle.
  const auto closing = closing_states_from(net, driver, hint[driver], 1e-10);
  if (closing.empty()) throw Error(ErrorCode::Domain, "no state closes to 1e-10 at the given driver angle");
  const Propagation* best = &closing.front();
  for (const auto& c : closing)
    if (state_distance(c.state, hint) < state_distance(best->state, hint)) best = &c;
  const double snapTol = req.value("snapTol", 1e-3);
  if (const double gap = state_distance(best->state, hint); gap > snapTol) {
    std::ostringstream os;
    os << "start state is " << gap << " rad from the nearest closing state (snapTol " << snapTol << ")";
    throw Error(ErrorCode::Domain, os.str());
  }

  const double t0 = cot_half(best->state[driver]);
  const double tMin = req.contains("tMin") ? number(req, "tMin") : t0 - 0.5;
  const double tMax = req.contains("tMax") ? number(req, "tMax") : t0 + 0.5;
  if (!(tMin < tMax)) throw Error(ErrorCode::Schema, "tMin must be below tMax");
  const FlexionTrace tr = flexion_trace(net, best->state, tMin, tMax, steps, driver);
  const EdgeLengths lengths = lengths_of(req, net);
  return Json{{"truncated", tr.truncated},
              {"diagnostic", tr.diagnostic},
              {"bundle", bundle_to_json(make_bundle(net, lengths, 1, "traced", tr.t, tr.states))}};
}

Json run_check(const Json& req) { return bundle_check_to_json(check_bundle(bundle_from_json(req))); }

HttpReply Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  HttpReply reply;
  try {
    if (method == "GET" && path.rfind("/bundle/", 0) == 0) {
      const std::string id = path.substr(8);
      std::lock_guard lock(mu_);
      const auto it = bundles_.find(id);
      if (it == bundles_.end()) {
        reply.status = 404;
        reply.body = error_body("NotFound", "no bundle with id " + id).dump(2) + "\n";
      } else {
        reply.body = it->second;
        reply.headers["X-Bundle-Id"] = id;
      }
      return reply;
    }
    if (method == "POST") return post(path, body);
    reply.status = 405;
    reply.body = error_body("MethodNotAllowed", method + " " + path).dump(2) + "\n";
  } catch (const Error& e) {
    reply.status = http_status(e.code());
    reply.body = error_body(e.name(), e.what()).dump(2) + "\n";
  } catch (const nlohmann::json::exception& e) {
    reply.status = 400;
    reply.body = error_body("Schema", e.what()).dump(2) + "\n";
  } catch (const std::exception& e) {
    reply.status = 500;
    reply.body = error_body("Internal", e.what()).dump(2) + "\n";
  }
  return reply;
}

HttpReply Service::post(const std::string& path, const std::string& body) {
  Json req;
  try {
    req = Json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Schema, std::string("request body is not JSON: ") + e.what());
  }
  HttpReply reply;
  Json res;
  if (path == "/search") {
    res = run_search(req);
  } else if (path == "/classify") {
    res = run_classify(req);
  } else if (path == "/qs") {
    res = run_qs(req);
  } else if (path == "/flex") {
    res = run_flex(req);
  } else if (path == "/check") {
    res = run_check(req);
  } else {
    reply.status = 404;
    reply.body = error_body("NotFound", path).dump(2) + "\n";
    return reply;
  }
  remember(res, reply);
  reply.body = res.dump(2) + "\n";
  return reply;
}

void Service::remember(Json& response, HttpReply& reply) {
  if (!response.contains("bundle")) return;
  std::string text = response.at("bundle").dump(2) + "\n";
  const std::string id = bundle_id(text);
  reply.headers["X-Bundle-Id"] = id;
  std::lock_guard lock(mu_);
  bundles_.emplace(id, std::move(text));
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server svr;
  explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpReply r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Expose-Headers", "X-Bundle-Id");
    res.set_content(r.body, r.contentType);
  };
  impl_->svr.Get(".*", route);
  impl_->svr.Post(".*", route);
  impl_->svr.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->svr.bind_to_any_port(host);
  return impl_->svr.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->svr.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->svr.stop();
}

}  // namespace kokonet::app
