#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "kokonet/error.hpp"
#include "kokonet/io.hpp"

namespace kokonet::app {

// "105deg", "1.2rad" or a bare number in degrees; returns radians.
double parse_angle(const std::string& text);

// Exit code for a library error: 2 domain rejection, 3 numeric failure, 4 I/O.
int exit_code(ErrorCode code) noexcept;
// 400 for schema errors, 422 for domain and numeric errors, 500 for I/O.
int http_status(ErrorCode code) noexcept;

// Each command takes a request object and returns a response object. Requests accept
// a "unit" field ("deg" default, or "rad") for angle inputs.
//
// qs:       {alpha, beta, gamma, branch "+"|"-", samples, tMin?, tMax?, lengths?}
//           -> {report, flexion, bundle}
// classify: {net, tol?, state?} or a bare net -> {report, rigidity?}
// search:   SearchConfig -> {stats, solutions}
// flex:     {net, start[4], driver (1..4), tMin, tMax, steps, snapTol?, lengths?}
//           -> {truncated, diagnostic, bundle}
// check:    bundle -> check report
Json run_qs(const Json& req);
Json run_classify(const Json& req);
Json run_search(const Json& req);
Json run_flex(const Json& req);
Json run_check(const Json& req);

// Lengths used when a request gives none: unit lengths, shortened per side quad
// only as far as convexity requires.
EdgeLengths default_lengths(const NetAngles& net);

std::string bundle_id(const std::string& bundleText);

struct HttpReply {
  int status = 200;
  std::string body;
  std::string contentType = "application/json";
  std::map<std::string, std::string> headers;
};

// Stateless apart from a cache of produced bundles keyed by content hash.
class Service {
 public:
  HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

 private:
  HttpReply post(const std::string& path, const std::string& body);
  void remember(Json& response, HttpReply& reply);

  std::mutex mu_;
  std::map<std::string, std::string> bundles_;
};

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kokonet::app
