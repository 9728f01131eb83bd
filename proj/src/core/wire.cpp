#include "wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace attacklab {
namespace {

using nlohmann::json;

enum class ReadStatus { ok, closed, timeout, error };

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

bool send_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// Pulls bytes into buf until it holds a full '\n'-terminated line, then hands
// back the line without its terminator.
ReadStatus read_line(int fd, std::string& buf, std::string& line) {
  for (;;) {
    const std::size_t pos = buf.find('\n');
    if (pos != std::string::npos) {
      line.assign(buf, 0, pos);
      buf.erase(0, pos + 1);
      return ReadStatus::ok;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n == 0) return ReadStatus::closed;
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) return ReadStatus::timeout;
      return ReadStatus::error;
    }
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string dump_line(const json& j) { return j.dump() + '\n'; }

void split_address(const std::string& address, std::string& host, std::string& port) {
  const std::size_t pos = address.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == address.size())
    fail(ErrorKind::config, "address must be host:port, got '" + address + "'");
  host = address.substr(0, pos);
  port = address.substr(pos + 1);
}

}  // namespace

// -------------------------------------------------------------- server ----

struct VictimServer::Impl {
  std::unique_ptr<DifferenceOracle> oracle;
  int listen_fd = -1;
  std::uint16_t bound_port = 0;
  std::atomic<bool> running{false};
  std::thread accept_thread;
  std::mutex mu;
  std::vector<int> conn_fds;
  std::vector<std::thread> conn_threads;
  std::function<void(const std::string&)> log_connection;

  void serve_connection(int fd);
  void accept_loop();
  json answer(const std::string& line);
};

json VictimServer::Impl::answer(const std::string& line) {
  const json j = json::parse(line, nullptr, false);
  const json bad = {{"err", "bad_request"}};
  if (j.is_discarded() || !j.is_object()) return bad;
  if (j.contains("hello")) {
    const auto& h = j["hello"];
    if (!h.is_object() || !h.contains("dim") || !h["dim"].is_number_unsigned()) return bad;
    const std::size_t dim = h["dim"].get<std::size_t>();
    if (dim != oracle->dim()) return {{"err", "dim_mismatch"}};
    return {{"ok", {{"dim", dim}}}};
  }
  if (j.contains("id") && j.contains("x")) {
    if (!j["id"].is_number_unsigned() || !j["x"].is_array()) return bad;
    const auto& xs = j["x"];
    if (xs.size() != oracle->dim()) return bad;
    std::vector<double> v(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!xs[i].is_number()) return bad;
      v[i] = xs[i].get<double>();
    }
    const int s = oracle->query_sign(Vec::from(std::move(v)));
    return {{"id", j["id"].get<std::uint64_t>()}, {"sign", s}};
  }
  return bad;
}

void VictimServer::Impl::serve_connection(int fd) {
  std::string buf, line;
  while (running.load()) {
    if (read_line(fd, buf, line) != ReadStatus::ok) break;
    if (!send_all(fd, dump_line(answer(line)))) break;
  }
  ::close(fd);
}

void VictimServer::Impl::accept_loop() {
  while (running.load()) {
    sockaddr_storage peer{};
    socklen_t peer_len = sizeof(peer);
    const int fd = ::accept(listen_fd, reinterpret_cast<sockaddr*>(&peer), &peer_len);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listen socket shut down
    }
    set_nodelay(fd);
    if (log_connection) {
      char host[NI_MAXHOST] = "?";
      char serv[NI_MAXSERV] = "?";
      ::getnameinfo(reinterpret_cast<sockaddr*>(&peer), peer_len, host, sizeof(host), serv,
                    sizeof(serv), NI_NUMERICHOST | NI_NUMERICSERV);
      log_connection(std::string(host) + ":" + serv);
    }
    std::lock_guard<std::mutex> lock(mu);
    conn_fds.push_back(fd);
    conn_threads.emplace_back([this, fd] { serve_connection(fd); });
  }
}

VictimServer::VictimServer(std::unique_ptr<DifferenceOracle> oracle, const std::string& host,
                           std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  if (!oracle) fail(ErrorKind::invalid_argument, "serve: null oracle");
  impl_->oracle = std::move(oracle);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  const int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res);
  if (rc != 0)
    fail(ErrorKind::transport, "resolve '" + host + "': " + gai_strerror(rc));

  int fd = -1;
  std::string err = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      err = std::strerror(errno);
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    err = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) fail(ErrorKind::transport, "bind " + host + ":" + port_str + " failed: " + err);
  if (::listen(fd, 16) != 0) {
    const std::string msg = std::strerror(errno);
    ::close(fd);
    fail(ErrorKind::transport, "listen failed: " + msg);
  }
  sockaddr_storage sa{};
  socklen_t salen = sizeof(sa);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &salen) == 0) {
    if (sa.ss_family == AF_INET)
      impl_->bound_port = ntohs(reinterpret_cast<sockaddr_in*>(&sa)->sin_port);
    else if (sa.ss_family == AF_INET6)
      impl_->bound_port = ntohs(reinterpret_cast<sockaddr_in6*>(&sa)->sin6_port);
  }
  impl_->listen_fd = fd;
}

void VictimServer::start() {
  if (impl_->running.exchange(true)) return;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void VictimServer::stop() {
  if (!impl_->running.exchange(false)) return;
  ::shutdown(impl_->listen_fd, SHUT_RDWR);
  ::close(impl_->listen_fd);
  impl_->listen_fd = -1;
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::lock_guard<std::mutex> lock(impl_->mu);
  for (const int fd : impl_->conn_fds) ::shutdown(fd, SHUT_RDWR);
  for (auto& t : impl_->conn_threads)
    if (t.joinable()) t.join();
  impl_->conn_fds.clear();
  impl_->conn_threads.clear();
}

VictimServer::~VictimServer() { stop(); }

std::uint16_t VictimServer::port() const { return impl_->bound_port; }

const DifferenceOracle& VictimServer::oracle() const { return *impl_->oracle; }

void VictimServer::set_connection_logger(std::function<void(const std::string&)> log) {
  impl_->log_connection = std::move(log);
}

// -------------------------------------------------------------- client ----

RemoteOracle::RemoteOracle(const std::string& address, std::size_t m, int timeout_ms)
    : DifferenceOracle(m, 0, 1) {
  std::string host, port;
  split_address(address, host, port);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0)
    fail(ErrorKind::transport, "resolve '" + host + "': " + gai_strerror(rc));

  std::string err = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd_ < 0) {
      err = std::strerror(errno);
      continue;
    }
    if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
    err = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) fail(ErrorKind::transport, "connect to " + address + " failed: " + err);

  if (timeout_ms > 0) {
    timeval tv{};
    tv.tv_sec = timeout_ms / 1000;
    tv.tv_usec = (timeout_ms % 1000) * 1000;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  }
  set_nodelay(fd_);

  const json hello = {{"hello", {{"dim", m}}}};
  if (!send_all(fd_, dump_line(hello))) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::transport, "handshake send failed");
  }
  std::string line;
  const ReadStatus st = read_line(fd_, buf_, line);
  if (st != ReadStatus::ok) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::transport, st == ReadStatus::timeout ? "handshake timed out"
                                                         : "connection lost during handshake");
  }
  const json j = json::parse(line, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("ok") && j["ok"].is_object() &&
      j["ok"].value("dim", std::size_t{0}) == m)
    return;
  if (!j.is_discarded() && j.is_object() && j.contains("err")) {
    const std::string e = j["err"].is_string() ? j["err"].get<std::string>() : "unknown";
    ::close(fd_);
    fd_ = -1;
    fail(ErrorKind::config, "handshake rejected: " + e);
  }
  ::close(fd_);
  fd_ = -1;
  fail(ErrorKind::transport, "handshake got malformed reply: " + line);
}

RemoteOracle::~RemoteOracle() {
  if (fd_ >= 0) ::close(fd_);
}

int RemoteOracle::sign_at(const Vec& x) {
  if (fd_ < 0) fail(ErrorKind::transport, "remote victim connection is closed");
  const std::uint64_t id = next_id_++;
  const json q = {{"id", id}, {"x", x.entries()}};
  if (!send_all(fd_, dump_line(q))) fail(ErrorKind::transport, "query send failed");
  std::string line;
  const ReadStatus st = read_line(fd_, buf_, line);
  if (st == ReadStatus::timeout) fail(ErrorKind::transport, "query timed out");
  if (st != ReadStatus::ok) fail(ErrorKind::transport, "connection lost awaiting reply");
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(ErrorKind::transport, "malformed reply: " + line);
  if (j.contains("err")) {
    const std::string e = j["err"].is_string() ? j["err"].get<std::string>() : "unknown";
    fail(ErrorKind::transport, "server rejected query: " + e);
  }
  if (!j.contains("id") || !j.contains("sign") || j["id"].get<std::uint64_t>() != id)
    fail(ErrorKind::transport, "reply out of order: " + line);
  const int s = j["sign"].get<int>();
  if (s != 1 && s != -1) fail(ErrorKind::transport, "reply sign out of range: " + line);
  return s;
}

std::unique_ptr<DifferenceOracle> connect_remote_victim(const std::string& address, std::size_t m,
                                                        int timeout_ms) {
  return std::make_unique<RemoteOracle>(address, m, timeout_ms);
}

}  // namespace attacklab
