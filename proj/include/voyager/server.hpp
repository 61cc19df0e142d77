#pragma once

// Line-delimited JSON over a local TCP socket. One client at a time; the
// reader thread parses lines and answers `cancel` immediately, everything
// else is queued for the session thread so requests apply in arrival order.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "voyager/session.hpp"

namespace voyager {

inline constexpr int kDefaultPort = 7117;

/// VOYAGER_PORT if set and valid, else 7117.
inline int default_port() {
  if (const char* env = std::getenv("VOYAGER_PORT")) {
    try {
      const int p = std::stoi(env);
      if (p > 0 && p < 65536) return p;
    } catch (const std::exception&) {
    }
  }
  return kDefaultPort;
}

class Server {
 public:
  using json = nlohmann::json;

  /// Binds 127.0.0.1:`port`; port 0 picks a free one (see `port()`).
  Server(Session& session, int port) : session_(session) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::IoError, "socket() failed");
    const int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 4) < 0) {
      ::close(listen_fd_);
      throw Error(ErrorCode::IoError, "cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
  }

  int port() const { return port_; }

  /// Serves clients one after another until a client sends `shutdown`.
  void run() {
    while (!shutdown_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::IoError, "accept() failed");
      }
      serve_connection(fd);
      ::close(fd);
    }
  }

 private:
  Session& session_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> shutdown_ = false;

  std::mutex write_mutex_;
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<json> queue_;
  bool closed_ = false;

  void send(int fd, const json& message) {
    const std::string line = message.dump() + "\n";
    std::lock_guard lock(write_mutex_);
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t w = ::send(fd, line.data() + off, line.size() - off, MSG_NOSIGNAL);
      if (w <= 0) return;  // client went away; the request loop notices on read
      off += static_cast<std::size_t>(w);
    }
  }

  void serve_connection(int fd) {
    closed_ = false;
    queue_.clear();
    std::jthread worker([this, fd] {
      for (;;) {
        json request;
        {
          std::unique_lock lock(queue_mutex_);
          queue_cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
          if (queue_.empty()) return;
          request = std::move(queue_.front());
          queue_.pop_front();
        }
        if (request.value("op", "") == "shutdown") {
          json ok = {{"ok", true}};
          if (request.contains("id")) ok["id"] = request["id"];
          send(fd, ok);
          shutdown_ = true;
          ::shutdown(fd, SHUT_RD);
          return;
        }
        send(fd, session_.handle(request, [&](const json& ev) { send(fd, ev); }));
      }
    });

    std::string buffer;
    char chunk[65536];
    for (;;) {
      const ssize_t r = ::recv(fd, chunk, sizeof chunk, 0);
      if (r <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(r));
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        accept_line(fd, line);
      }
    }
    {
      std::lock_guard lock(queue_mutex_);
      closed_ = true;
    }
    queue_cv_.notify_all();
  }

  void accept_line(int fd, const std::string& line) {
    json request;
    try {
      request = json::parse(line);
    } catch (const json::exception& e) {
      send(fd, Session::error_response({{"ok", true}}, "ParseError", e.what()));
      return;
    }
    if (request.is_object() && request.value("op", "") == "cancel") {
      session_.request_cancel();
      json ok = {{"ok", true}, {"cancelled", true}};
      if (request.contains("id")) ok["id"] = request["id"];
      send(fd, ok);
      return;
    }
    {
      std::lock_guard lock(queue_mutex_);
      queue_.push_back(std::move(request));
    }
    queue_cv_.notify_one();
  }
};

}  // namespace voyager
