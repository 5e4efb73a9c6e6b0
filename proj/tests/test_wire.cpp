#include <doctest.h>

#include "dnsward/wire.hpp"
#include "helpers.hpp"

using namespace dnsward;
using namespace dnsward::wire;

namespace {

std::vector<uint8_t> bytes(std::initializer_list<int> list) {
  std::vector<uint8_t> out;
  for (const int b : list) out.push_back(static_cast<uint8_t>(b));
  return out;
}

}  // namespace

TEST_CASE("parse_query decodes a hand-built example.com A query field by field") {
  // 12-byte header + 13-byte name (7,"example",3,"com",0) + type + class = 29
  const auto pkt = bytes({
      0x12, 0x34,             // id
      0x01, 0x00,             // flags: RD
      0x00, 0x01,             // qdcount
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
      7, 'e', 'x', 'a', 'm', 'p', 'l', 'e', 3, 'c', 'o', 'm', 0,
      0x00, 0x01,             // qtype A
      0x00, 0x01,             // qclass IN
  });
  REQUIRE(pkt.size() == 29);
  const auto q = parse_query(pkt);
  REQUIRE(q.ok());
  CHECK(q.value().id == 0x1234);
  CHECK(q.value().qname.to_string() == "example.com");
  CHECK(q.value().qtype == kTypeA);
  CHECK(q.value().qclass == kClassIn);
  CHECK(q.value().recursion_desired);
  CHECK(q.value().raw_question.size() == 17);
  CHECK_FALSE(q.value().question_compressed);
}

TEST_CASE("encode_query emits the documented layout for the shortest name") {
  QueryView q;
  q.id = 7;
  q.qname = *DomainName::parse("a.");
  q.qtype = kTypeA;
  // 12 header + 3 name (len, 'a', terminator) + 4 fixed
  CHECK(encode_query(q).size() == 19);
}

TEST_CASE("round-trip: encode then parse is identity for random valid names") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    QueryView q;
    q.id = static_cast<uint16_t>(rng.uniform_u64(65536));
    q.qname = testutil::random_name(rng, 6);
    q.qtype = rng.uniform_u64(2) ? kTypeA : kTypeAaaa;
    q.qclass = kClassIn;
    q.recursion_desired = rng.uniform_u64(2) == 0;
    const auto encoded = encode_query(q);
    const auto parsed = parse_query(encoded);
    REQUIRE(parsed.ok());
    CHECK(parsed.value() == q);
    // encode(parse(encode(q))) == encode(q)
    CHECK(encode_query(parsed.value()) == encoded);
  }
}

TEST_CASE("names at the 253-byte presentation bound") {
  // 63+63+63+61 label bytes + 3 dots = 253
  const std::string l63(63, 'a');
  std::string name = l63 + "." + l63 + "." + l63 + "." + std::string(61, 'b');
  REQUIRE(name.size() == 253);
  CHECK(DomainName::parse(name).has_value());
  name = l63 + "." + l63 + "." + l63 + "." + std::string(62, 'b');
  REQUIRE(name.size() == 254);
  CHECK_FALSE(DomainName::parse(name).has_value());
}

TEST_CASE("parse_query error taxonomy") {
  SUBCASE("truncated header") {
    CHECK(parse_query(bytes({0, 1, 2})).error() == WireError::Truncated);
  }
  SUBCASE("QR bit set is not a query") {
    auto pkt = bytes({0, 1, 0x80, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::NotAQuery);
  }
  SUBCASE("question count != 1") {
    auto pkt = bytes({0, 1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::MultiQuestion);
    pkt[5] = 0;
    CHECK(parse_query(pkt).error() == WireError::MultiQuestion);
  }
  SUBCASE("name runs past the end") {
    auto pkt = bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 9, 'a', 'b'});
    CHECK(parse_query(pkt).error() == WireError::Truncated);
  }
  SUBCASE("missing qtype/qclass after the name") {
    auto pkt = bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 'a', 0, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::Truncated);
  }
  SUBCASE("non-printable label bytes") {
    auto pkt = bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 2, 0x07, 'a', 0, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::BadLabel);
  }
  SUBCASE("unsupported extended label type") {
    auto pkt = bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0x41, 'a', 0, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::BadLabel);
  }
}

TEST_CASE("compression pointers in the question name") {
  SUBCASE("pointer to itself loops") {
    // name field is a bare pointer to its own offset
    const auto pkt = bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0xC0, 0x0C, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::PointerLoop);
  }
  SUBCASE("forward pointer is rejected") {
    const auto pkt = bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0xC0, 0x20, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::PointerLoop);
  }
  SUBCASE("label-then-self-pointer cycles are caught") {
    const auto pkt =
        bytes({0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 'a', 0xC0, 0x0C, 0, 1, 0, 1});
    CHECK(parse_query(pkt).error() == WireError::PointerLoop);
  }
  SUBCASE("backward pointer to a terminating zero parses") {
    // offset 4 holds qdcount's high byte 0x00, a valid name terminator
    const auto pkt =
        bytes({0xAB, 0xCD, 0x01, 0x00, 0x00, 0x01, 0, 0, 0, 0, 0, 0,
               3, 'f', 'o', 'o', 0xC0, 0x04, 0x00, 0x01, 0x00, 0x01});
    const auto q = parse_query(pkt);
    REQUIRE(q.ok());
    CHECK(q.value().id == 0xABCD);
    CHECK(q.value().qname.to_string() == "foo");
    CHECK(q.value().qtype == kTypeA);
    CHECK(q.value().question_compressed);
  }
}

TEST_CASE("case folding: EXAMPLE.Com and example.com parse to equal qnames") {
  QueryView q;
  q.id = 9;
  q.qname = *DomainName::parse("example.com");
  auto upper = encode_query(q);
  // uppercase the label bytes in place
  for (size_t i = 12; i < upper.size(); ++i) {
    if (upper[i] >= 'a' && upper[i] <= 'z') upper[i] -= 32;
  }
  const auto a = parse_query(upper);
  const auto b = parse_query(encode_query(q));
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.value().qname == b.value().qname);
}

TEST_CASE("block responses") {
  QueryView q;
  q.id = 0xBEEF;
  q.qname = *DomainName::parse("blocked.example");
  q.qtype = kTypeA;

  SUBCASE("nxdomain mode") {
    const auto resp = synthesize_block_response(q, BlockMode::Nxdomain, std::nullopt);
    const auto meta = parse_response_meta(resp);
    REQUIRE(meta.ok());
    CHECK(meta.value().id == 0xBEEF);
    CHECK(meta.value().rcode == kRcodeNxDomain);
    CHECK(meta.value().answer_count == 0);
    CHECK(meta.value().response);
  }
  SUBCASE("sinkhole mode carries one A record at the sinkhole address") {
    const auto addr = *Ipv4::parse("127.0.0.2");
    const auto resp = synthesize_block_response(q, BlockMode::Sinkhole, addr, 60);
    const auto meta = parse_response_meta(resp);
    REQUIRE(meta.ok());
    CHECK(meta.value().rcode == kRcodeNoError);
    CHECK(meta.value().answer_count == 1);
    // rdata is the last 4 bytes
    REQUIRE(resp.size() >= 4);
    CHECK(resp[resp.size() - 4] == 127);
    CHECK(resp[resp.size() - 3] == 0);
    CHECK(resp[resp.size() - 2] == 0);
    CHECK(resp[resp.size() - 1] == 2);
  }
  SUBCASE("sinkhole degrades to nxdomain for non-A qtypes") {
    q.qtype = kTypeAaaa;
    const auto addr = *Ipv4::parse("127.0.0.2");
    const auto resp = synthesize_block_response(q, BlockMode::Sinkhole, addr);
    const auto meta = parse_response_meta(resp);
    REQUIRE(meta.ok());
    CHECK(meta.value().rcode == kRcodeNxDomain);
    CHECK(meta.value().answer_count == 0);
  }
}

TEST_CASE("block responses echo the question section byte-for-byte") {
  // mixed-case question, as a 0x20-style client would send
  auto pkt = bytes({
      0x55, 0xAA, 0x01, 0x00, 0x00, 0x01, 0, 0, 0, 0, 0, 0,
      7, 'e', 'X', 'a', 'M', 'p', 'L', 'e', 3, 'C', 'o', 'M', 0,
      0x00, 0x01, 0x00, 0x01,
  });
  const auto q = parse_query(pkt);
  REQUIRE(q.ok());
  const auto resp = synthesize_block_response(q.value(), BlockMode::Nxdomain, std::nullopt);
  REQUIRE(resp.size() >= 12 + 17);
  // transaction id
  CHECK(resp[0] == 0x55);
  CHECK(resp[1] == 0xAA);
  // question bytes unchanged, original case included
  for (size_t i = 0; i < 17; ++i) {
    CHECK(resp[12 + i] == pkt[12 + i]);
  }
}

TEST_CASE("parse_response_meta") {
  SUBCASE("11 bytes is truncated") {
    std::vector<uint8_t> pkt(11, 0);
    CHECK(parse_response_meta(pkt).error() == WireError::Truncated);
  }
  SUBCASE("hand-built upstream SERVFAIL") {
    const auto pkt = bytes({0x00, 0x2A, 0x80, 0x02, 0, 0, 0, 0, 0, 0, 0, 0});
    const auto meta = parse_response_meta(pkt);
    REQUIRE(meta.ok());
    CHECK(meta.value().id == 42);
    CHECK(meta.value().rcode == kRcodeServFail);
    CHECK(meta.value().answer_count == 0);
  }
  SUBCASE("every block response yields meta consistent with its mode") {
    QueryView q;
    q.id = 3;
    q.qname = *DomainName::parse("x.example");
    const auto nx = parse_response_meta(synthesize_block_response(q, BlockMode::Nxdomain, {}));
    CHECK(nx.value().rcode == kRcodeNxDomain);
    const auto sink = parse_response_meta(
        synthesize_block_response(q, BlockMode::Sinkhole, Ipv4::parse("10.0.0.1")));
    CHECK(sink.value().rcode == kRcodeNoError);
    CHECK(sink.value().answer_count == 1);
  }
}

TEST_CASE("parser totality: arbitrary bytes never crash (smoke; full run in acceptance)") {
  Rng rng(7);
  for (int i = 0; i < 20000; ++i) {
    const size_t len = rng.uniform_u64(i % 10 == 0 ? 4096 : 64);
    std::vector<uint8_t> junk(len);
    for (auto& b : junk) b = static_cast<uint8_t>(rng.uniform_u64(256));
    (void)parse_query(junk);
    (void)parse_response_meta(junk);
  }
  CHECK(true);
}
