#include <gtest/gtest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

#include "strata/error.hpp"
#include "strata/server.hpp"

using namespace strata;
using nlohmann::json;

namespace {

const char* kCsv = "country,continent,gdp\nA,Asia,100\nB,Europe,\nC,Asia,300\nD,Africa,50\n";

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override { start({}); }
  void TearDown() override { server_->stop(); }

  void start(ServerOptions opt) {
    if (server_) server_->stop();
    opt.port = 0;
    opt.heartbeat = std::chrono::seconds(1);
    server_ = std::make_unique<Server>(service_, opt);
    server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", server_->port());
  }

  std::string create() {
    auto res = client_->Post("/session", kCsv, "text/csv");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body)["session"].get<std::string>();
  }

  SessionService service_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST(Multipart, ParsesParts) {
  const std::string body =
      "--XyZ\r\nContent-Disposition: form-data; name=\"data\"; filename=\"t.csv\"\r\n"
      "Content-Type: text/csv\r\n\r\na,b\r\n1,2\r\n\r\n--XyZ\r\n"
      "Content-Disposition: form-data; name=\"descriptor\"\r\n\r\n{}\r\n--XyZ--\r\n";
  const auto parts = parse_multipart(body, "multipart/form-data; boundary=XyZ");
  ASSERT_EQ(parts.size(), 2U);
  EXPECT_EQ(parts.at("data"), "a,b\r\n1,2\r\n");
  EXPECT_EQ(parts.at("descriptor"), "{}");
  EXPECT_THROW(parse_multipart(body, "multipart/form-data"), ValidationError);
  EXPECT_THROW(parse_multipart("garbage", "multipart/form-data; boundary=XyZ"), ValidationError);
}

TEST_F(ServerTest, CreateFromMultipart) {
  httplib::MultipartFormDataItems items = {
      {"data", kCsv, "table.csv", "text/csv"},
      {"descriptor", R"({"columns":[{"id":"country","kind":"text"},{"id":"gdp","kind":"numerical"}]})", "",
       "application/json"},
  };
  auto res = client_->Post("/session", items);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  const auto j = json::parse(res->body);
  EXPECT_EQ(j["protocol_version"], kProtocolVersion);
  EXPECT_EQ(j["rows"], 4);
  const auto id = j["session"].get<std::string>();
  auto state = client_->Get("/session/" + id + "/state");
  ASSERT_EQ(state->status, 200);
  EXPECT_EQ(json::parse(state->body)["columns"], (json{"country", "gdp"}));
}

TEST_F(ServerTest, BadUploadIs400) {
  auto res = client_->Post("/session", "a,b\n1\n", "text/csv");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["type"], "error");
}

TEST_F(ServerTest, StateSceneExportAndCommand) {
  const auto id = create();
  auto scene = client_->Get("/session/" + id + "/scene?first=1&last=3");
  ASSERT_EQ(scene->status, 200);
  const auto sj = json::parse(scene->body);
  EXPECT_EQ(sj["rows"].size(), 2U);
  EXPECT_EQ(sj["protocol_version"], kProtocolVersion);
  EXPECT_EQ(client_->Get("/session/" + id + "/scene?first=x")->status, 400);

  const json command{{"expected_version", 0},
                     {"op", "set_filters"},
                     {"payload", {{"filters", {{{"column", "gdp"}, {"type", "require_present"}}}}}}};
  auto res = client_->Post("/session/" + id + "/command", command.dump(), "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  const auto dj = json::parse(res->body);
  EXPECT_EQ(dj["type"], "delta");
  EXPECT_EQ(dj["version"], 1);
  EXPECT_EQ(dj["panel"]["rows_filtered"], 3);

  auto stale = client_->Post("/session/" + id + "/command", command.dump(), "application/json");
  EXPECT_EQ(stale->status, 409);
  EXPECT_EQ(json::parse(stale->body)["current_version"], 1);

  auto bad = client_->Post("/session/" + id + "/command", R"({"expected_version":1,"op":"nope"})", "application/json");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(client_->Post("/session/" + id + "/command", "{not json", "application/json")->status, 400);

  auto csv = client_->Post("/session/" + id + "/export.csv", "", "text/plain");
  ASSERT_EQ(csv->status, 200);
  EXPECT_EQ(csv->body, "country,continent,gdp\r\nA,Asia,100\r\nC,Asia,300\r\nD,Africa,50\r\n");

  EXPECT_EQ(client_->Get("/session/nope/state")->status, 404);
  EXPECT_EQ(client_->Get("/elsewhere")->status, 404);
}

TEST_F(ServerTest, BearerToken) {
  ServerOptions opt;
  opt.bearer_token = "s3cret";
  start(opt);
  EXPECT_EQ(client_->Post("/session", kCsv, "text/csv")->status, 401);
  client_->set_bearer_token_auth("s3cret");
  EXPECT_EQ(client_->Post("/session", kCsv, "text/csv")->status, 201);
}

TEST_F(ServerTest, WebSocketCommands) {
  namespace beast = boost::beast;
  namespace asio = boost::asio;
  const auto id = create();
  asio::io_context ioc;
  asio::ip::tcp::resolver resolver(ioc);
  beast::websocket::stream<asio::ip::tcp::socket> ws(ioc);
  asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server_->port())));
  ws.handshake("127.0.0.1", "/session/" + id + "/ws");

  auto roundtrip = [&](const json& msg) {
    ws.write(asio::buffer(msg.dump()));
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  };

  const auto d = roundtrip({{"expected_version", 0}, {"op", "set_sort"},
                            {"payload", {{"criteria", {{{"column", "gdp"}, {"direction", "desc"}}}}}}});
  EXPECT_EQ(d["type"], "delta");
  EXPECT_EQ(d["version"], 1);
  ASSERT_TRUE(d.contains("scene"));
  EXPECT_EQ(d["scene"]["rows"][0]["row"], 2);

  const auto r = roundtrip({{"expected_version", 0}, {"op", "set_mode"}, {"payload", {{"mode", "overview"}}}});
  EXPECT_EQ(r["type"], "rejection");
  EXPECT_EQ(r["reason"], "version_conflict");

  const auto s = roundtrip({{"expected_version", 1}, {"op", "request_scene"}, {"payload", {{"first", 0}, {"last", 2}}}});
  EXPECT_EQ(s["version"], 1);
  EXPECT_EQ(s["scene"]["rows"].size(), 2U);

  const auto junk = roundtrip(json("not an object"));
  EXPECT_EQ(junk["type"], "rejection");

  // An idle client that keeps reading is pinged and stays connected.
  int pings = 0;
  ws.control_callback([&](beast::websocket::frame_type kind, beast::string_view) {
    if (kind == beast::websocket::frame_type::ping) ++pings;
  });
  beast::flat_buffer buf;
  bool got = false;
  ws.async_read(buf, [&](beast::error_code ec, std::size_t) { got = !ec; });
  ioc.run_for(std::chrono::milliseconds(2500));
  EXPECT_GE(pings, 1);
  EXPECT_FALSE(got);
  ws.write(asio::buffer(json{{"expected_version", 1}, {"op", "snapshot"}}.dump()));
  ioc.restart();
  ioc.run_for(std::chrono::seconds(2));
  ASSERT_TRUE(got);
  EXPECT_EQ(json::parse(beast::buffers_to_string(buf.data()))["type"], "delta");
  ws.close(beast::websocket::close_code::normal);
}
