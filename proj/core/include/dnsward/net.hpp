#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnsward::net {

// IPv4 UDP endpoint.
struct Endpoint {
  uint32_t addr = 0;  // host byte order
  uint16_t port = 0;

  static std::optional<Endpoint> parse(std::string_view s);  // "127.0.0.1:5353"
  std::string to_string() const;
  bool operator==(const Endpoint&) const = default;
  auto operator<=>(const Endpoint&) const = default;
};

// Minimal RAII UDP socket. Linux/POSIX only.
class UdpSocket {
 public:
  UdpSocket();  // unbound, ephemeral on first send
  ~UdpSocket();
  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  static UdpSocket bind(const Endpoint& ep);  // throws BIND_FAILED; port 0 = ephemeral
  Endpoint local_endpoint() const;

  void send_to(std::span<const uint8_t> data, const Endpoint& to);

  // nullopt on timeout. `from` is filled when non-null.
  std::optional<std::vector<uint8_t>> recv(Endpoint* from,
                                           std::chrono::milliseconds timeout);

  bool valid() const { return fd_ >= 0; }

 private:
  explicit UdpSocket(int fd) : fd_(fd) {}
  int fd_ = -1;
};

}  // namespace dnsward::net
