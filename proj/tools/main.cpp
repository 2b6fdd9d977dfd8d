#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "app.hpp"

namespace fs = std::filesystem;
using kokonet::Json;
namespace app = kokonet::app;

namespace {

Json wing_lengths(double L) {
  return Json{{"ab", {L, L, L, L}}, {"ac", {L, L, L, L}}};
}

Json angles_rad(const std::vector<std::string>& in) {
  Json a = Json::array();
  for (const auto& s : in) a.push_back(app::parse_angle(s));
  return a;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::string obj_name(const fs::path& dir, const std::string& stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03zu.obj", i);
  return (dir / (stem + buf)).string();
}

void write_objs(const Json& bundleJson, const fs::path& dir, const std::string& stem) {
  const kokonet::FlexionBundle b = kokonet::bundle_from_json(bundleJson);
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    kokonet::export_obj(b.samples[i].embedded, b.net, b.samples[i].theta, obj_name(dir, stem, i));
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw kokonet::Error(kokonet::ErrorCode::Io, "cannot create directory " + dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"kokonet: equimodular elliptic Kokotsakis nets: construct, classify, search, flex, check"};
  cli.require_subcommand(1);

  // qs
  auto* qs = cli.add_subcommand("qs", "Build a quasi-symmetric net from a seed vertex and sample its closed-form flexion");
  std::string qsAlpha, qsBeta, qsGamma, qsBranch = "+", qsOut = ".", qsStem = "qs";
  int qsSamples = 25;
  std::optional<double> qsTMin, qsTMax, qsWing;
  bool qsNoObj = false;
  qs->add_option("--alpha", qsAlpha, "Seed angle alpha1 (suffix deg or rad; degrees by default)")->required();
  qs->add_option("--beta", qsBeta, "Seed angle beta1")->required();
  qs->add_option("--gamma", qsGamma, "Seed angle gamma1")->required();
  qs->add_option("--branch", qsBranch, "Sign branch of the flexion")->check(CLI::IsMember({"+", "-"}))->capture_default_str();
  qs->add_option("--samples", qsSamples, "Samples per valid interval, or over [t-min, t-max]")->capture_default_str();
  qs->add_option("--t-min", qsTMin, "Lower end of the t = cot(theta2/2) grid");
  qs->add_option("--t-max", qsTMax, "Upper end of the t grid");
  qs->add_option("--wing-length", qsWing, "Uniform wing edge length (default: 1, shortened where a side quad would not be convex)");
  qs->add_option("--out", qsOut, "Output directory")->capture_default_str();
  qs->add_option("--name", qsStem, "File name stem")->capture_default_str();
  qs->add_flag("--no-obj", qsNoObj, "Skip the per-sample OBJ files");

  // classify
  auto* cls = cli.add_subcommand("classify", "Equimodular elliptic classification of a net");
  std::string clsNet;
  std::optional<double> clsTol;
  std::vector<std::string> clsState;
  cls->add_option("net", clsNet, "Net JSON file")->required();
  cls->add_option("--tol", clsTol, "Equality tolerance for moduli, amplitudes and the period residual");
  cls->add_option("--state", clsState, "Dihedral state (4 angles) for a rigidity probe")->expected(4);

  // search
  auto* sea = cli.add_subcommand("search", "Multi-start search for nets with prescribed deltas and dihedral state");
  std::string seaConfig, seaOut;
  std::optional<int> seaSeeds, seaThreads, seaMaxIter;
  std::optional<std::uint64_t> seaRng;
  std::optional<double> tolConverge, tolValidate, tolSign;
  sea->add_option("config", seaConfig, "Search config JSON file")->required();
  sea->add_option("--out", seaOut, "Solutions file (default: standard output)");
  sea->add_option("--seeds", seaSeeds, "Override seedCount");
  sea->add_option("--rng-seed", seaRng, "Override rngSeed");
  sea->add_option("--threads", seaThreads, "Override threads (0: all cores)");
  sea->add_option("--max-iter", seaMaxIter, "Override solverMaxIter");
  sea->add_option("--tol-converge", tolConverge, "Override the solver convergence tolerance");
  sea->add_option("--tol-validate", tolValidate, "Override the validation tolerance");
  sea->add_option("--tol-sign", tolSign, "Override the sign-rejection margin");

  // flex
  auto* flx = cli.add_subcommand("flex", "Trace the flexion of a net from a start state");
  std::string flxNet, flxOut, flxObjDir;
  std::vector<std::string> flxStart;
  int flxDriver = 1, flxSteps = 41;
  std::optional<double> flxTMin, flxTMax, flxWing;
  flx->add_option("net", flxNet, "Net JSON file")->required();
  flx->add_option("--start", flxStart, "Start state (4 angles); snapped to the nearest closing state")->expected(4)->required();
  flx->add_option("--driver", flxDriver, "Dihedral angle used as parameter, t = cot(theta_driver/2)")->check(CLI::Range(1, 4))->capture_default_str();
  flx->add_option("--t-min", flxTMin, "Lower end of the t range (default: start - 0.5)");
  flx->add_option("--t-max", flxTMax, "Upper end of the t range (default: start + 0.5)");
  flx->add_option("--steps", flxSteps, "Grid points including both ends")->capture_default_str();
  flx->add_option("--wing-length", flxWing, "Uniform wing edge length");
  flx->add_option("--out", flxOut, "Bundle file")->required();
  flx->add_option("--obj-dir", flxObjDir, "Also write one OBJ per sample here");

  // check
  auto* chk = cli.add_subcommand("check", "Re-measure a bundle and test every sample for self-intersection");
  std::string chkBundle;
  chk->add_option("bundle", chkBundle, "Bundle JSON file")->required();

  // serve
  auto* srv = cli.add_subcommand("serve", "JSON-over-HTTP service");
  std::string srvHost = "127.0.0.1";
  int srvPort = 8080;
  srv->add_option("--host", srvHost, "Bind address")->capture_default_str();
  srv->add_option("--port", srvPort, "Port")->check(CLI::Range(0, 65535))->capture_default_str();

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*qs) {
      Json req{{"unit", "rad"},
               {"alpha", app::parse_angle(qsAlpha)},
               {"beta", app::parse_angle(qsBeta)},
               {"gamma", app::parse_angle(qsGamma)},
               {"branch", qsBranch},
               {"samples", qsSamples}};
      if (qsTMin) req["tMin"] = *qsTMin;
      if (qsTMax) req["tMax"] = *qsTMax;
      if (qsWing) req["lengths"] = wing_lengths(*qsWing);
      const Json res = app::run_qs(req);
      const fs::path dir(qsOut);
      ensure_dir(dir);
      const std::string bundlePath = (dir / (qsStem + ".bundle.json")).string();
      kokonet::write_text(bundlePath, res.at("bundle").dump(2) + "\n");
      if (!qsNoObj) write_objs(res.at("bundle"), dir, qsStem);
      print(Json{{"report", res.at("report")}, {"flexion", res.at("flexion")}, {"bundle", bundlePath}});
    } else if (*cls) {
      Json req{{"net", kokonet::read_json(clsNet)}};
      if (clsTol) req["tol"] = *clsTol;
      if (!clsState.empty()) {
        req["unit"] = "rad";
        req["state"] = angles_rad(clsState);
      }
      print(app::run_classify(req));
    } else if (*sea) {
      Json req = kokonet::read_json(seaConfig);
      if (!req.is_object()) throw kokonet::Error(kokonet::ErrorCode::Schema, "search config must be a JSON object");
      if (seaSeeds) req["seedCount"] = *seaSeeds;
      if (seaRng) req["rngSeed"] = *seaRng;
      if (seaThreads) req["threads"] = *seaThreads;
      if (seaMaxIter) req["solverMaxIter"] = *seaMaxIter;
      if (tolConverge) req["tolerances"]["converge"] = *tolConverge;
      if (tolValidate) req["tolerances"]["validate"] = *tolValidate;
      if (tolSign) req["tolerances"]["signReject"] = *tolSign;
      const Json res = app::run_search(req);
      if (seaOut.empty()) {
        print(res);
      } else {
        kokonet::write_text(seaOut, res.dump(2) + "\n");
        std::cerr << "verified " << res.at("stats").at("verified") << " of " << res.at("stats").at("seeds")
                  << " seeds; written to " << seaOut << "\n";
      }
    } else if (*flx) {
      Json req{{"net", kokonet::read_json(flxNet)},
               {"unit", "rad"},
               {"start", angles_rad(flxStart)},
               {"driver", flxDriver},
               {"steps", flxSteps}};
      if (req["net"].contains("net")) req["net"] = Json(req["net"]["net"]);
      if (flxTMin) req["tMin"] = *flxTMin;
      if (flxTMax) req["tMax"] = *flxTMax;
      if (flxWing) req["lengths"] = wing_lengths(*flxWing);
      const Json res = app::run_flex(req);
      kokonet::write_text(flxOut, res.at("bundle").dump(2) + "\n");
      if (!flxObjDir.empty()) {
        ensure_dir(flxObjDir);
        write_objs(res.at("bundle"), flxObjDir, fs::path(flxOut).stem().string());
      }
      print(Json{{"truncated", res.at("truncated")},
                 {"diagnostic", res.at("diagnostic")},
                 {"samples", res.at("bundle").at("samples").size()},
                 {"bundle", flxOut}});
      if (res.at("truncated").get<bool>()) return 3;
    } else if (*chk) {
      const Json res = app::run_check(kokonet::read_json(chkBundle));
      print(res);
      if (!res.at("consistent").get<bool>()) return 3;
    } else if (*srv) {
      app::Service service;
      app::HttpServer server(service);
      const int port = server.bind(srvHost, srvPort);
      if (port < 0) throw kokonet::Error(kokonet::ErrorCode::Io, "cannot bind " + srvHost + ":" + std::to_string(srvPort));
      std::cerr << "listening on http://" << srvHost << ":" << port << "\n";
      server.listen();
    }
  } catch (const kokonet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: Schema: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
