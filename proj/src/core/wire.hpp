#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "victims.hpp"

namespace attacklab {

// Serves sign queries for a local victim over the newline-delimited JSON
// protocol: one object per line, handshake {"hello":{"dim":m}} then
// {"id":u64,"x":[...]} queries. Each connection is handled on its own thread;
// responses are order-preserving per connection.
class VictimServer {
 public:
  // Binds immediately (port 0 picks an ephemeral port); call start() to serve.
  VictimServer(std::unique_ptr<DifferenceOracle> oracle, const std::string& host,
               std::uint16_t port);
  ~VictimServer();

  VictimServer(const VictimServer&) = delete;
  VictimServer& operator=(const VictimServer&) = delete;

  void start();
  void stop();
  std::uint16_t port() const;
  const DifferenceOracle& oracle() const;

  // Invoked once per accepted connection with the peer "host:port". Set
  // before start(); called from the accept thread.
  void set_connection_logger(std::function<void(const std::string&)> log);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Client-side oracle: every query_sign is one request/response round trip on a
// dedicated connection. Not synchronized -- concurrent callers need one
// connection (one RemoteOracle) per worker.
class RemoteOracle final : public DifferenceOracle {
 public:
  RemoteOracle(const std::string& address, std::size_t m, int timeout_ms);
  ~RemoteOracle() override;

 private:
  int sign_at(const Vec& x) override;

  int fd_ = -1;
  std::uint64_t next_id_ = 0;
  std::string buf_;
};

// address is "host:port"; performs the dim handshake before returning.
std::unique_ptr<DifferenceOracle> connect_remote_victim(const std::string& address, std::size_t m,
                                                        int timeout_ms);

}  // namespace attacklab
