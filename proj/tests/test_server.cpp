#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "voyager/server.hpp"

using namespace voyager;
using json = nlohmann::json;

namespace {

class Client {
 public:
  explicit Client(int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) throw std::runtime_error("connect");
  }
  ~Client() { ::close(fd_); }

  void send_raw(const std::string& text) {
    std::size_t off = 0;
    while (off < text.size()) off += static_cast<std::size_t>(::send(fd_, text.data() + off, text.size() - off, 0));
  }
  void send(const json& j) { send_raw(j.dump() + "\n"); }

  json read() {
    std::size_t nl;
    while ((nl = buffer_.find('\n')) == std::string::npos) {
      char chunk[65536];
      const ssize_t r = ::recv(fd_, chunk, sizeof chunk, 0);
      if (r <= 0) throw std::runtime_error("connection closed");
      buffer_.append(chunk, static_cast<std::size_t>(r));
    }
    const std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    return json::parse(line);
  }

  // Next message that is a reply rather than a progress event.
  json reply() {
    for (;;) {
      json m = read();
      if (m.contains("ok")) return m;
    }
  }

 private:
  int fd_ = -1;
  std::string buffer_;
};

struct Running {
  Session session;
  Server server{session, 0};
  std::jthread thread{[this] { server.run(); }};
};

json fixture_load(int id) {
  return {{"op", "load_data"}, {"id", id}, {"fixture", {{"kind", "three-clusters"}, {"n_per", 40}, {"dims", 8}}}};
}

}  // namespace

TEST(Server, PipelinedRequestsAreAnsweredInOrder) {
  Running r;
  ASSERT_GT(r.server.port(), 0);
  {
    Client c(r.server.port());
    c.send_raw(fixture_load(1).dump() + "\n" + json{{"op", "get_frame"}, {"id", 2}}.dump() + "\r\n\n" +
               json{{"op", "save_view"}, {"id", 3}}.dump() + "\n" + json{{"op", "nope"}, {"id", 4}}.dump() + "\n");
    for (int id = 1; id <= 4; ++id) {
      const json m = c.reply();
      EXPECT_EQ(m["id"], id);
      EXPECT_EQ(m["ok"].get<bool>(), id != 4);
    }
    c.send_raw("{not json\n");
    EXPECT_EQ(c.reply()["error"]["code"], "ParseError");
    c.send({{"op", "shutdown"}, {"id", 5}});
    EXPECT_EQ(c.reply()["id"], 5);
  }
  r.thread.join();
}

TEST(Server, StateSurvivesReconnect) {
  Running r;
  {
    Client c(r.server.port());
    c.send(fixture_load(1));
    ASSERT_TRUE(c.reply()["ok"].get<bool>());
  }
  Client c(r.server.port());
  c.send({{"op", "get_frame"}, {"id", 2}});
  const json m = c.reply();
  ASSERT_TRUE(m["ok"].get<bool>());
  EXPECT_EQ(m["frame"]["n"], 120);
  c.send({{"op", "shutdown"}});
  c.reply();
  r.thread.join();
}

TEST(Server, CancelStopsOptimizationEarly) {
  Running r;
  Client c(r.server.port());
  c.send(fixture_load(1));
  ASSERT_TRUE(c.reply()["ok"].get<bool>());
  c.send({{"op", "set_config"}, {"id", 2}, {"config", {{"aco", {{"generations", 100000}}}}}});
  ASSERT_TRUE(c.reply()["ok"].get<bool>());
  c.send({{"op", "optimize"}, {"id", 3}});
  // Wait for the first progress event so the cancel lands mid-run.
  json m = c.read();
  EXPECT_EQ(m["id"], 3);
  EXPECT_TRUE(m.contains("generation"));
  c.send({{"op", "cancel"}, {"id", 4}});
  bool saw_cancel_ack = false, saw_result = false;
  while (!saw_result) {
    m = c.read();
    if (m["id"] == 4) saw_cancel_ack = true;
    if (m["id"] == 3 && m.contains("ok")) {
      saw_result = true;
      EXPECT_TRUE(m["ok"].get<bool>());
      EXPECT_TRUE(m["cancelled"].get<bool>());
      EXPECT_LT(m["trace"].size(), 100000u);
      EXPECT_GE(m["score"].get<double>(), m["incoming_score"].get<double>());
    }
  }
  EXPECT_TRUE(saw_cancel_ack);
  c.send({{"op", "shutdown"}});
  c.reply();
  r.thread.join();
}

TEST(Server, DefaultPortHonoursEnvironment) {
  ::setenv("VOYAGER_PORT", "9123", 1);
  EXPECT_EQ(default_port(), 9123);
  ::unsetenv("VOYAGER_PORT");
  EXPECT_EQ(default_port(), kDefaultPort);
}
