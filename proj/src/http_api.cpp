#include "idoe/http_api.hpp"

#include <charconv>
#include <functional>
#include <limits>
#include <thread>

#include <httplib.h>

#include "idoe/error.hpp"
#include "idoe/json_io.hpp"

namespace idoe {

using nlohmann::json;

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::JobAlreadyRunning:
    case ErrorKind::NotTrained: return 409;
    case ErrorKind::DatasetTooSmall:
    case ErrorKind::InfeasibleSpec:
    case ErrorKind::EmptySelection: return 422;
    case ErrorKind::Io: return 500;
    default: return 400;
  }
}

namespace {

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send(res, status, {{"error", kind}, {"message", message}});
}

/// Wraps a handler so library errors map onto HTTP statuses.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "SchemaMismatch", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("request body is not JSON: ") + e.what());
  }
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be a non-negative integer, got '" +
                                                std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, const char* what) {
  const auto v = parse_u64(s, what);
  if (v > 1'000'000'000ULL) throw Error(ErrorKind::InvalidArgument, std::string(what) + " is out of range");
  return static_cast<int>(v);
}

std::vector<std::uint64_t> parse_ids(const std::string& csv) {
  std::vector<std::uint64_t> ids;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto end = std::min(csv.find(',', start), csv.size());
    if (end > start) ids.push_back(parse_u64(std::string_view(csv).substr(start, end - start), "run id"));
    start = end + 1;
  }
  return ids;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(ErrorKind::InvalidArgument, "expected true or false, got '" + s + "'");
}

/// Query filter for GET /runs: provenance, iteration, valid, ids, offset,
/// limit.
json runs_json(const SessionState& s, const httplib::Request& req) {
  std::optional<Provenance> provenance;
  std::optional<int> iteration;
  std::optional<bool> valid;
  std::vector<std::uint64_t> ids;
  std::size_t offset = 0;
  std::size_t limit = std::numeric_limits<std::size_t>::max();
  if (req.has_param("provenance")) {
    try {
      provenance = provenance_from_string(req.get_param_value("provenance"));
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidArgument, e.what());
    }
  }
  if (req.has_param("iteration")) iteration = parse_int(req.get_param_value("iteration"), "iteration");
  if (req.has_param("valid")) valid = parse_bool(req.get_param_value("valid"));
  if (req.has_param("ids")) ids = parse_ids(req.get_param_value("ids"));
  if (req.has_param("offset")) offset = parse_u64(req.get_param_value("offset"), "offset");
  if (req.has_param("limit")) limit = parse_u64(req.get_param_value("limit"), "limit");

  json rows = json::array();
  std::size_t matched = 0;
  auto consider = [&](const Run& r) {
    if (provenance && r.provenance != *provenance) return;
    if (iteration && r.iteration != *iteration) return;
    if (valid && r.result.valid != *valid) return;
    if (matched++ < offset) return;
    if (rows.size() < limit) rows.push_back(api::run_json(r));
  };
  if (!ids.empty()) {
    for (const auto id : ids) {
      const Run* r = s.ensemble.find(id);
      if (!r) throw Error(ErrorKind::NotFound, "no run " + std::to_string(id));
      consider(*r);
    }
  } else {
    for (const auto& r : s.ensemble.runs()) consider(r);
  }
  return {{"total", matched}, {"runs", rows}};
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Workbench& w) : wb(w) {}
  Workbench& wb;
  httplib::Server server;
  std::thread thread;
  bool bound = false;
};

HttpServer::HttpServer(Workbench& wb) : impl_(std::make_unique<Impl>(wb)) {
  auto& svr = impl_->server;
  Workbench& w = wb;

  svr.Post("/sessions", guarded([&w](const httplib::Request& req, httplib::Response& res) {
             const auto opts = session_options_from_json(body_of(req));
             const auto id = w.create_session(opts);
             send(res, 201, w.session(id)->read([](const SessionState& s) { return session_summary_json(s); }));
           }));

  svr.Get("/sessions", guarded([&w](const httplib::Request&, httplib::Response& res) {
            send(res, 200, {{"sessions", w.session_ids()}});
          }));

  svr.Get(R"(/sessions/([^/]+))", guarded([&w](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, w.session(req.matches[1])->read([](const SessionState& s) { return session_summary_json(s); }));
          }));

  svr.Get(R"(/sessions/([^/]+)/diagram)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
            auto session = w.session(req.matches[1]);
            json out = api::diagram_json(w.diagram());
            session->read([&](const SessionState& s) {
              json hulls = json::array();
              for (const auto& h : s.hulls) hulls.push_back(h ? api::polygon_json(*h) : json(nullptr));
              out["hulls"] = hulls;
              json reference = nullptr;
              if (s.baseline && s.baseline->result.valid) {
                reference = json::array();
                for (const auto& p : s.baseline->result.points) reference.push_back(api::point_json(p));
              }
              out["reference"] = reference;
            });
            send(res, 200, out);
          }));

  svr.Get(R"(/sessions/([^/]+)/runs)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, w.session(req.matches[1])->read([&](const SessionState& s) { return runs_json(s, req); }));
          }));

  svr.Post(R"(/sessions/([^/]+)/propose)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
             const auto spec = api::spec_from(body_of(req));
             const auto out = w.propose(req.matches[1], spec);
             send(res, 201,
                  {{"iteration", api::iteration_json(out.record)},
                   {"geometry", api::geometry_json(out.geometry)},
                   {"inside_hull", out.inside_hull},
                   {"center", api::result_json(out.center)}});
           }));

  svr.Post(R"(/sessions/([^/]+)/refine)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
             const json body = body_of(req);
             if (!body.contains("iteration") || !body.at("iteration").is_number_integer()) {
               throw Error(ErrorKind::SchemaMismatch, "refine needs an integer 'iteration'");
             }
             std::size_t runs = 20;
             if (body.contains("runs")) {
               const auto& r = body.at("runs");
               if (!r.is_number_integer() || (!r.is_number_unsigned() && r.get<std::int64_t>() < 0)) {
                 throw Error(ErrorKind::SchemaMismatch, "'runs' must be a non-negative integer");
               }
               runs = body.at("runs").get<std::size_t>();
             }
             const double fraction = api::field(body, "fraction", 0.05);
             const auto id = w.refine(req.matches[1], body.at("iteration").get<int>(), runs, fraction);
             send(res, 202, job_json(w.job(id)));
           }));

  svr.Get(R"(/jobs/(\d+))", guarded([&w](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, job_json(w.job(parse_u64(req.matches[1].str(), "job id"))));
          }));

  svr.Get(R"(/sessions/([^/]+)/statistics)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
            std::optional<int> iteration;
            if (req.has_param("iteration")) iteration = parse_int(req.get_param_value("iteration"), "iteration");
            json out = {{"iteration", iteration ? json(*iteration) : json(nullptr)},
                        {"outputs", api::statistics_json(w.statistics(req.matches[1], iteration))}};
            send(res, 200, out);
          }));

  svr.Post(R"(/sessions/([^/]+)/findings)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
             const auto f = w.add_finding(req.matches[1], api::finding_from(body_of(req)));
             send(res, 201, api::finding_json(f));
           }));

  svr.Get(R"(/sessions/([^/]+)/export\.csv)", guarded([&w](const httplib::Request& req, httplib::Response& res) {
            const std::string sid = req.matches[1];
            std::vector<std::uint64_t> ids;
            if (req.has_param("ids")) {
              ids = parse_ids(req.get_param_value("ids"));
            } else if (req.has_param("finding")) {
              const auto name = req.get_param_value("finding");
              ids = w.session(sid)->read([&](const SessionState& s) {
                for (const auto& f : s.findings) {
                  if (f.name == name) return f.case_ids;
                }
                throw Error(ErrorKind::NotFound, "no finding '" + name + "'");
              });
              if (ids.empty()) throw Error(ErrorKind::EmptySelection, "finding '" + name + "' has no cases");
            } else if (req.has_param("iteration")) {
              const int k = parse_int(req.get_param_value("iteration"), "iteration");
              ids = w.session(sid)->read([&](const SessionState& s) {
                if (k < 1 || static_cast<std::size_t>(k) > s.iterations.size()) {
                  throw Error(ErrorKind::NotFound, "no iteration " + std::to_string(k));
                }
                std::vector<std::uint64_t> out;
                for (const auto& r : s.ensemble.runs()) {
                  if (r.iteration == k) out.push_back(r.id);
                }
                return out;
              });
            }
            res.status = 200;
            res.set_header("Content-Disposition", "attachment; filename=\"" + sid + ".csv\"");
            res.set_content(w.export_csv(sid, ids), "text/csv");
          }));

  svr.Patch(R"(/sessions/([^/]+)/iterations/(\d+))", guarded([&w](const httplib::Request& req, httplib::Response& res) {
              const json body = body_of(req);
              IterationPatch patch;
              if (body.contains("name")) patch.name = body.at("name").get<std::string>();
              if (body.contains("notes")) patch.notes = body.at("notes").get<std::string>();
              if (body.contains("visible")) patch.visible = body.at("visible").get<bool>();
              const auto rec = w.patch_iteration(req.matches[1], parse_int(req.matches[2].str(), "iteration"), patch);
              send(res, 200, api::iteration_json(rec));
            }));

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError", "no such route");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  int bound = port == 0 ? svr.bind_to_any_port(host) : (svr.bind_to_port(host, port) ? port : -1);
  impl_->bound = bound > 0;
  return bound;
}

void HttpServer::listen() {
  if (!impl_->bound) throw Error(ErrorKind::InvalidArgument, "bind() before listen()");
  impl_->server.listen_after_bind();
}

void HttpServer::start() {
  if (!impl_->bound) throw Error(ErrorKind::InvalidArgument, "bind() before start()");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace idoe
