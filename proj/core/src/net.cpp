#include "dnsward/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "dnsward/types.hpp"
#include "dnsward/wire.hpp"

namespace dnsward::net {

std::optional<Endpoint> Endpoint::parse(std::string_view s) {
  const size_t colon = s.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto ip = wire::Ipv4::parse(s.substr(0, colon));
  if (!ip) return std::nullopt;
  const std::string_view port_str = s.substr(colon + 1);
  unsigned port = 0;
  const auto [ptr, ec] = std::from_chars(port_str.data(), port_str.data() + port_str.size(), port);
  if (ec != std::errc() || ptr != port_str.data() + port_str.size() || port > 65535) {
    return std::nullopt;
  }
  Endpoint ep;
  ep.addr = (static_cast<uint32_t>(ip->octets[0]) << 24) |
            (static_cast<uint32_t>(ip->octets[1]) << 16) |
            (static_cast<uint32_t>(ip->octets[2]) << 8) | ip->octets[3];
  ep.port = static_cast<uint16_t>(port);
  return ep;
}

std::string Endpoint::to_string() const {
  return std::to_string((addr >> 24) & 0xff) + "." + std::to_string((addr >> 16) & 0xff) +
         "." + std::to_string((addr >> 8) & 0xff) + "." + std::to_string(addr & 0xff) +
         ":" + std::to_string(port);
}

namespace {

sockaddr_in to_sockaddr(const Endpoint& ep) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(ep.addr);
  sa.sin_port = htons(ep.port);
  return sa;
}

Endpoint from_sockaddr(const sockaddr_in& sa) {
  Endpoint ep;
  ep.addr = ntohl(sa.sin_addr.s_addr);
  ep.port = ntohs(sa.sin_port);
  return ep;
}

}  // namespace

UdpSocket::UdpSocket() {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) fail("IO_ERROR", std::string("socket: ") + std::strerror(errno));
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

UdpSocket UdpSocket::bind(const Endpoint& ep) {
  UdpSocket sock;
  const sockaddr_in sa = to_sockaddr(ep);
  if (::bind(sock.fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
    fail("BIND_FAILED", "cannot bind " + ep.to_string() + ": " + std::strerror(errno));
  }
  return sock;
}

Endpoint UdpSocket::local_endpoint() const {
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0) {
    fail("IO_ERROR", std::string("getsockname: ") + std::strerror(errno));
  }
  return from_sockaddr(sa);
}

void UdpSocket::send_to(std::span<const uint8_t> data, const Endpoint& to) {
  const sockaddr_in sa = to_sockaddr(to);
  (void)::sendto(fd_, data.data(), data.size(), 0, reinterpret_cast<const sockaddr*>(&sa),
                 sizeof(sa));
}

std::optional<std::vector<uint8_t>> UdpSocket::recv(Endpoint* from,
                                                    std::chrono::milliseconds timeout) {
  pollfd pfd{};
  pfd.fd = fd_;
  pfd.events = POLLIN;
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) return std::nullopt;

  std::vector<uint8_t> buf(wire::kMaxDatagram);
  sockaddr_in sa{};
  socklen_t len = sizeof(sa);
  const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                               reinterpret_cast<sockaddr*>(&sa), &len);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<size_t>(n));
  if (from) *from = from_sockaddr(sa);
  return buf;
}

}  // namespace dnsward::net
