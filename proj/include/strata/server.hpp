#pragma once

// HTTP and WebSocket front end for a SessionService.
//
//   POST /session                     multipart (data, descriptor) or raw CSV body
//   GET  /session/{id}/state          state document
//   POST /session/{id}/export.csv     CSV export
//   GET  /session/{id}/scene?first=&last=
//   POST /session/{id}/command        one Command, answered with Delta or Rejection
//   GET  /session/{id}/ws             WebSocket: Command in, Delta/Rejection out

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "strata/session.hpp"

namespace strata {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::chrono::seconds heartbeat{15};
  std::size_t body_limit = 512U * 1024U * 1024U;
  std::optional<std::string> bearer_token;  // required on every request when set
  bool handle_signals = false;              // SIGINT/SIGTERM stop run()
};

// Parts of a multipart/form-data body keyed by field name. Throws
// ValidationError for a malformed body or a missing boundary.
std::map<std::string, std::string> parse_multipart(std::string_view body, std::string_view content_type);

class Server {
 public:
  Server(SessionService& service, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the listening socket. Throws Error when the address is unusable.
  void listen();
  unsigned short port() const;

  // Serves until stop(). run() blocks; start() serves on a background thread.
  void run();
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace strata
