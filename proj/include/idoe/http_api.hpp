#pragma once

#include <memory>
#include <string>

#include "idoe/error.hpp"
#include "idoe/workbench.hpp"

namespace idoe {

/// HTTP status for a library error kind.
int http_status(ErrorKind kind);

/// JSON endpoints over a Workbench. Request bodies and responses use the
/// service units (bar, C, kJ/kg, kW).
class HttpServer {
 public:
  explicit HttpServer(Workbench& workbench);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires bind().
  void listen();
  /// listen() on a background thread; returns once the server accepts.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace idoe
