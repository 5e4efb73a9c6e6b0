#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnsward/domain_name.hpp"

namespace dnsward::wire {

constexpr size_t kMaxDatagram = 4096;
constexpr size_t kHeaderSize = 12;

constexpr uint16_t kTypeA = 1;
constexpr uint16_t kTypeAaaa = 28;
constexpr uint16_t kClassIn = 1;

constexpr uint8_t kRcodeNoError = 0;
constexpr uint8_t kRcodeFormErr = 1;
constexpr uint8_t kRcodeServFail = 2;
constexpr uint8_t kRcodeNxDomain = 3;

enum class WireError {
  Truncated,      // message shorter than its declared structure
  BadLabel,       // label > 63 bytes, name > 253, or non-printable bytes
  PointerLoop,    // compression pointer cycle, forward pointer, or bad target
  NotAQuery,      // QR bit set
  MultiQuestion,  // question count != 1
};

std::string_view to_string(WireError e);

template <typename T>
class WireResult {
 public:
  WireResult(T value) : value_(std::move(value)) {}
  WireResult(WireError error) : error_(error) {}

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }
  const T& value() const { return *value_; }
  T& value() { return *value_; }
  WireError error() const { return error_; }

 private:
  std::optional<T> value_;
  WireError error_ = WireError::Truncated;
};

// Parsed view of a single-question DNS query.
struct QueryView {
  uint16_t id = 0;
  DomainName qname;
  uint16_t qtype = kTypeA;
  uint16_t qclass = kClassIn;
  bool recursion_desired = true;

  // Wire bytes of the question section as received, kept so synthesized
  // responses can echo the question byte-for-byte (0x20-style case mixing
  // included). Empty for hand-built views; ignored by comparison.
  std::vector<uint8_t> raw_question;
  bool question_compressed = false;

  bool operator==(const QueryView& o) const {
    return id == o.id && qname == o.qname && qtype == o.qtype && qclass == o.qclass &&
           recursion_desired == o.recursion_desired;
  }
};

struct ResponseMeta {
  uint16_t id = 0;
  uint8_t rcode = 0;
  uint16_t answer_count = 0;
  bool response = false;  // QR bit
};

struct Ipv4 {
  std::array<uint8_t, 4> octets{};
  static std::optional<Ipv4> parse(std::string_view s);
  std::string to_string() const;
  bool operator==(const Ipv4&) const = default;
};

enum class BlockMode { Nxdomain, Sinkhole };
std::optional<BlockMode> parse_block_mode(std::string_view s);
std::string_view to_string(BlockMode m);

// Parses a datagram expected to be a DNS query with exactly one question.
// Total over arbitrary byte input: returns a value or a WireError, never
// crashes. Compression pointers in the question name are accepted.
WireResult<QueryView> parse_query(std::span<const uint8_t> bytes);

// Canonical uncompressed encoding; parse_query(encode_query(q)) == q.
std::vector<uint8_t> encode_query(const QueryView& q);

// Blocking answer for a query. Nxdomain: rcode 3, no answers. Sinkhole:
// rcode 0 with one A record at sinkhole_addr (requires qtype A; any other
// qtype degrades to Nxdomain). Echoes transaction id and question.
std::vector<uint8_t> synthesize_block_response(const QueryView& q, BlockMode mode,
                                               std::optional<Ipv4> sinkhole_addr,
                                               uint32_t ttl_seconds = 60);

// Answerless response with the given rcode, echoing the question (SERVFAIL
// on upstream timeout, for example).
std::vector<uint8_t> synthesize_rcode_response(const QueryView& q, uint8_t rcode);

// Header-only response for queries whose question could not be parsed but
// whose id is recoverable (FORMERR path).
std::vector<uint8_t> synthesize_header_only(uint16_t id, uint8_t rcode);

// Reads id, rcode, and answer count; answer bodies are never parsed because
// forwarding is byte-transparent.
WireResult<ResponseMeta> parse_response_meta(std::span<const uint8_t> bytes);

}  // namespace dnsward::wire
