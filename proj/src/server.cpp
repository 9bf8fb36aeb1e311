#include "strata/server.hpp"

#include <algorithm>
#include <charconv>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "strata/error.hpp"

namespace strata {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

// --- multipart -------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// Value of `key` in a header parameter list such as `form-data; name="x"`.
std::optional<std::string> header_param(std::string_view header, std::string_view key) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    std::size_t semi = header.find(';', pos);
    if (semi == std::string_view::npos) semi = header.size();
    std::string_view item = trim(header.substr(pos, semi - pos));
    pos = semi + 1;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || !iequals(trim(item.substr(0, eq)), key)) continue;
    std::string_view v = trim(item.substr(eq + 1));
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return std::string(v);
  }
  return std::nullopt;
}

}  // namespace

std::map<std::string, std::string> parse_multipart(std::string_view body, std::string_view content_type) {
  const auto boundary = header_param(content_type, "boundary");
  if (!boundary || boundary->empty()) throw ValidationError("multipart body without a boundary");
  const std::string delim = "--" + *boundary;
  std::map<std::string, std::string> parts;

  std::size_t pos = body.find(delim);
  if (pos == std::string_view::npos) throw ValidationError("multipart boundary not found in body");
  pos += delim.size();
  while (true) {
    if (body.substr(pos, 2) == "--") return parts;  // closing delimiter
    if (body.substr(pos, 2) != "\r\n") throw ValidationError("malformed multipart delimiter line");
    pos += 2;
    const std::size_t header_end = body.find("\r\n\r\n", pos);
    if (header_end == std::string_view::npos) throw ValidationError("multipart part without headers");
    std::optional<std::string> name;
    std::string_view headers = body.substr(pos, header_end - pos);
    while (!headers.empty()) {
      std::size_t eol = headers.find("\r\n");
      std::string_view line = headers.substr(0, eol);
      headers = eol == std::string_view::npos ? std::string_view{} : headers.substr(eol + 2);
      const auto colon = line.find(':');
      if (colon != std::string_view::npos && iequals(trim(line.substr(0, colon)), "content-disposition")) {
        name = header_param(line.substr(colon + 1), "name");
      }
    }
    const std::size_t content = header_end + 4;
    const std::size_t next = body.find("\r\n" + delim, content);
    if (next == std::string_view::npos) throw ValidationError("unterminated multipart part");
    if (!name) throw ValidationError("multipart part without a field name");
    parts[*name] = std::string(body.substr(content, next - content));
    pos = next + 2 + delim.size();
  }
}

// --- request handling --------------------------------------------------------------

namespace {

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response make_response(const Request& req, http::status status, std::string body, std::string_view type) {
  Response res{status, req.version()};
  res.set(http::field::server, "strata");
  res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(const Request& req, http::status status, const json& j) {
  return make_response(req, status, j.dump(), "application/json");
}

Response error_response(const Request& req, http::status status, const std::string& message) {
  return json_response(req, status, json{{"type", "error"}, {"protocol_version", kProtocolVersion}, {"message", message}});
}

// Splits "/session/{id}/{rest}" into id and rest.
struct Route {
  std::string id;
  std::string rest;
};

std::optional<Route> session_route(std::string_view path) {
  constexpr std::string_view prefix = "/session/";
  if (!path.starts_with(prefix)) return std::nullopt;
  path.remove_prefix(prefix.size());
  const auto slash = path.find('/');
  if (slash == std::string_view::npos || slash == 0) return std::nullopt;
  return Route{std::string(path.substr(0, slash)), std::string(path.substr(slash + 1))};
}

std::map<std::string, std::string> query_params(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view item = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    auto eq = item.find('=');
    out[std::string(item.substr(0, eq))] = eq == std::string_view::npos ? "" : std::string(item.substr(eq + 1));
  }
  return out;
}

std::optional<std::size_t> parse_index(const std::string& s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

http::status status_for(const Outcome& o) {
  if (std::holds_alternative<Delta>(o)) return http::status::ok;
  return std::get<Rejection>(o).reason == Rejection::Reason::version_conflict ? http::status::conflict
                                                                              : http::status::bad_request;
}

bool authorized(const Request& req, const ServerOptions& options) {
  if (!options.bearer_token) return true;
  const auto it = req.find(http::field::authorization);
  return it != req.end() && sv(it->value()) == "Bearer " + *options.bearer_token;
}

Response handle(SessionService& service, const ServerOptions& options, const Request& req) {
  if (req.method() == http::verb::options) {
    Response res = make_response(req, http::status::no_content, "", "text/plain");
    res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
    res.set(http::field::access_control_allow_headers, "Content-Type, Authorization");
    return res;
  }
  if (!authorized(req, options)) return error_response(req, http::status::unauthorized, "missing or invalid bearer token");

  std::string_view target = sv(req.target());
  std::string_view query;
  if (auto q = target.find('?'); q != std::string_view::npos) {
    query = target.substr(q + 1);
    target = target.substr(0, q);
  }
  try {
    if (target == "/session" || target == "/session/") {
      if (req.method() != http::verb::post) return error_response(req, http::status::method_not_allowed, "use POST");
      std::string data;
      std::optional<std::string> descriptor;
      const std::string type(sv(req[http::field::content_type]));
      if (type.find("multipart/form-data") != std::string::npos) {
        auto parts = parse_multipart(req.body(), type);
        auto d = parts.find("data");
        if (d == parts.end()) return error_response(req, http::status::bad_request, "multipart body lacks a 'data' part");
        data = std::move(d->second);
        if (auto desc = parts.find("descriptor"); desc != parts.end() && !desc->second.empty()) {
          descriptor = std::move(desc->second);
        }
      } else {
        data = req.body();
      }
      const std::string id = descriptor ? service.create(data, std::string_view(*descriptor)) : service.create(data);
      const auto session = service.find(id);
      return json_response(req, http::status::created,
                           json{{"protocol_version", kProtocolVersion},
                                {"session", id},
                                {"version", session->version()},
                                {"rows", session->table().dataset().row_count()}});
    }
    const auto route = session_route(target);
    if (!route) return error_response(req, http::status::not_found, "no route for " + std::string(target));
    const auto session = service.find(route->id);
    if (!session) return error_response(req, http::status::not_found, "unknown session '" + route->id + "'");

    if (route->rest == "state" && req.method() == http::verb::get) {
      return json_response(req, http::status::ok, session->snapshot());
    }
    if (route->rest == "export.csv" && req.method() == http::verb::post) {
      return make_response(req, http::status::ok, session->export_csv(), "text/csv; charset=utf-8");
    }
    if (route->rest == "scene" && req.method() == http::verb::get) {
      auto params = query_params(query);
      std::size_t first = 0;
      std::size_t last = 50;
      if (params.count("first")) {
        auto v = parse_index(params["first"]);
        if (!v) return error_response(req, http::status::bad_request, "first must be a row index");
        first = *v;
      }
      if (params.count("last")) {
        auto v = parse_index(params["last"]);
        if (!v) return error_response(req, http::status::bad_request, "last must be a row index");
        last = *v;
      }
      if (last < first) return error_response(req, http::status::bad_request, "first must not exceed last");
      json j = scene_to_json(session->scene(first, last));
      j["protocol_version"] = kProtocolVersion;
      return json_response(req, http::status::ok, j);
    }
    if (route->rest == "command" && req.method() == http::verb::post) {
      Command c = parse_command(json::parse(req.body()));
      if (c.session.empty()) c.session = route->id;
      if (c.session != route->id) return error_response(req, http::status::bad_request, "command names another session");
      const Outcome o = session->apply(c);
      return json_response(req, status_for(o), to_json(o));
    }
    return error_response(req, http::status::not_found, "no route for " + std::string(target));
  } catch (const json::exception& e) {
    return error_response(req, http::status::bad_request, std::string("invalid JSON: ") + e.what());
  } catch (const Error& e) {
    return error_response(req, http::status::bad_request, e.what());
  }
}

// --- connections -------------------------------------------------------------------

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, SessionService& service, const ServerOptions& options, std::string session_id)
      : ws_(std::move(socket)), service_(service), options_(options), session_id_(std::move(session_id)) {}

  void run(Request req) {
    websocket::stream_base::timeout t{};
    t.handshake_timeout = std::chrono::seconds(30);
    // Beast pings after half the idle timeout without traffic.
    t.idle_timeout = options_.heartbeat * 2;
    t.keep_alive_pings = true;
    ws_.set_option(t);
    ws_.set_option(websocket::stream_base::decorator(
        [](websocket::response_type& res) { res.set(http::field::server, "strata"); }));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    read();
  }

  void read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    out_ = reply(text).dump();
    ws_.text(true);
    ws_.async_write(asio::buffer(out_), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  json reply(const std::string& text) {
    auto session = service_.find(session_id_);
    if (!session) return to_json(Rejection{Rejection::Reason::invalid, 0, "unknown session '" + session_id_ + "'"});
    try {
      Command c = parse_command(json::parse(text));
      if (c.session.empty()) c.session = session_id_;
      if (c.session != session_id_) {
        return to_json(Rejection{Rejection::Reason::invalid, session->version(), "command names another session"});
      }
      return to_json(session->apply(c));
    } catch (const json::exception& e) {
      return to_json(Rejection{Rejection::Reason::invalid, session->version(), std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      return to_json(Rejection{Rejection::Reason::invalid, session->version(), e.what()});
    }
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    read();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::string out_;
  SessionService& service_;
  const ServerOptions& options_;
  std::string session_id_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, SessionService& service, const ServerOptions& options)
      : stream_(std::move(socket)), service_(service), options_(options) {}

  void run() { read(); }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(options_.body_limit);
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec) return;
    Request req = parser_->release();
    if (websocket::is_upgrade(req)) {
      std::string_view target = sv(req.target());
      const auto route = session_route(target.substr(0, target.find('?')));
      if (route && route->rest == "ws" && service_.find(route->id) && authorized(req, options_)) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), service_, options_, route->id)->run(std::move(req));
        return;
      }
      res_ = error_response(req, http::status::not_found, "no WebSocket endpoint at " + std::string(target));
    } else {
      res_ = handle(service_, options_, req);
    }
    http::async_write(stream_, res_, beast::bind_front_handler(&HttpSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (!res_.keep_alive()) return close();
    read();
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  Response res_;
  SessionService& service_;
  const ServerOptions& options_;
};

}  // namespace

// --- Server --------------------------------------------------------------------------

struct Server::Impl {
  SessionService& service;
  ServerOptions options;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  bool listening = false;

  Impl(SessionService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  void accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec == asio::error::operation_aborted) return;
      if (!ec) std::make_shared<HttpSession>(std::move(socket), service, options)->run();
      accept();
    });
  }
};

Server::Server(SessionService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

Server::~Server() { stop(); }

void Server::listen() {
  if (impl_->listening) return;
  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->options.address, ec);
  if (ec) throw Error("invalid listen address '" + impl_->options.address + "'");
  const tcp::endpoint endpoint{address, impl_->options.port};
  auto& a = impl_->acceptor;
  a.open(endpoint.protocol(), ec);
  if (!ec) a.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(endpoint, ec);
  if (!ec) a.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error("cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port) + ": " + ec.message());
  impl_->listening = true;
  impl_->accept();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  listen();
  std::optional<asio::signal_set> signals;
  if (impl_->options.handle_signals) {
    signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code, int) { impl_->ioc.stop(); });
  }
  impl_->ioc.run();
}

void Server::start() {
  listen();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_) return;
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace strata
