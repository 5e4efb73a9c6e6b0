#include "dnsward/wire.hpp"

#include <charconv>

namespace dnsward::wire {

namespace {

constexpr size_t kMaxPresentation = 253;

uint16_t read_u16(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint16_t>((b[off] << 8) | b[off + 1]);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

void put_name(std::vector<uint8_t>& out, const DomainName& name) {
  for (const auto& label : name.labels()) {
    out.push_back(static_cast<uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
  }
  out.push_back(0);
}

char fold(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

struct NameParse {
  DomainName name;
  size_t end = 0;        // offset just past the name in the top-level walk
  bool compressed = false;
};

// Parses a possibly compressed name starting at `pos`. Pointer targets must
// strictly decrease, which makes cycles impossible and rejects forward
// pointers.
WireResult<NameParse> parse_name(std::span<const uint8_t> b, size_t pos) {
  std::vector<std::string> labels;
  size_t presentation_len = 0;
  size_t top_level_end = 0;  // set when the first pointer is taken
  bool compressed = false;
  size_t last_target = b.size();  // sentinel: first pointer only checked against its own position

  for (;;) {
    if (pos >= b.size()) return WireError::Truncated;
    const uint8_t len = b[pos];
    if (len == 0) {
      ++pos;
      break;
    }
    if ((len & 0xc0) == 0xc0) {
      if (pos + 1 >= b.size()) return WireError::Truncated;
      const size_t target = (static_cast<size_t>(len & 0x3f) << 8) | b[pos + 1];
      if (!compressed) {
        top_level_end = pos + 2;
        if (target >= pos) return WireError::PointerLoop;  // forward pointer
      } else {
        if (target >= last_target) return WireError::PointerLoop;
      }
      compressed = true;
      last_target = target;
      pos = target;
      continue;
    }
    if ((len & 0xc0) != 0) return WireError::BadLabel;  // unsupported label type
    if (pos + 1 + len > b.size()) return WireError::Truncated;
    std::string label(reinterpret_cast<const char*>(b.data()) + pos + 1, len);
    for (char& c : label) c = fold(c);
    if (!DomainName::valid_label(label)) return WireError::BadLabel;
    presentation_len += label.size() + (labels.empty() ? 0 : 1);
    if (presentation_len > kMaxPresentation) return WireError::BadLabel;
    labels.push_back(std::move(label));
    pos += 1 + len;
  }

  auto name = DomainName::from_labels(std::move(labels));
  if (!name) return WireError::BadLabel;
  NameParse out;
  out.name = std::move(*name);
  out.end = compressed ? top_level_end : pos;
  out.compressed = compressed;
  return out;
}

}  // namespace

std::string_view to_string(WireError e) {
  switch (e) {
    case WireError::Truncated: return "truncated";
    case WireError::BadLabel: return "bad-label";
    case WireError::PointerLoop: return "pointer-loop";
    case WireError::NotAQuery: return "not-a-query";
    case WireError::MultiQuestion: return "multi-question";
  }
  return "truncated";
}

std::optional<Ipv4> Ipv4::parse(std::string_view s) {
  Ipv4 out;
  size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    size_t end = s.find('.', start);
    if (i == 3) {
      if (end != std::string_view::npos) return std::nullopt;
      end = s.size();
    } else if (end == std::string_view::npos) {
      return std::nullopt;
    }
    const std::string_view part = s.substr(start, end - start);
    if (part.empty() || part.size() > 3) return std::nullopt;
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v > 255) return std::nullopt;
    out.octets[i] = static_cast<uint8_t>(v);
    start = end + 1;
  }
  return out;
}

std::string Ipv4::to_string() const {
  return std::to_string(octets[0]) + "." + std::to_string(octets[1]) + "." +
         std::to_string(octets[2]) + "." + std::to_string(octets[3]);
}

std::optional<BlockMode> parse_block_mode(std::string_view s) {
  if (s == "nxdomain") return BlockMode::Nxdomain;
  if (s == "sinkhole") return BlockMode::Sinkhole;
  return std::nullopt;
}

std::string_view to_string(BlockMode m) {
  return m == BlockMode::Nxdomain ? "nxdomain" : "sinkhole";
}

WireResult<QueryView> parse_query(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return WireError::Truncated;
  const uint16_t id = read_u16(bytes, 0);
  const uint16_t flags = read_u16(bytes, 2);
  if (flags & 0x8000) return WireError::NotAQuery;
  const uint16_t qdcount = read_u16(bytes, 4);
  if (qdcount != 1) return WireError::MultiQuestion;

  auto name = parse_name(bytes, kHeaderSize);
  if (!name) return name.error();
  const size_t qend = name.value().end;
  if (qend + 4 > bytes.size()) return WireError::Truncated;

  QueryView q;
  q.id = id;
  q.qname = std::move(name.value().name);
  q.qtype = read_u16(bytes, qend);
  q.qclass = read_u16(bytes, qend + 2);
  q.recursion_desired = (flags & 0x0100) != 0;
  q.raw_question.assign(bytes.begin() + kHeaderSize, bytes.begin() + qend + 4);
  q.question_compressed = name.value().compressed;
  return q;
}

std::vector<uint8_t> encode_query(const QueryView& q) {
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + q.qname.wire_length() + 4);
  put_u16(out, q.id);
  put_u16(out, q.recursion_desired ? 0x0100 : 0x0000);
  put_u16(out, 1);  // qdcount
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, 0);
  put_name(out, q.qname);
  put_u16(out, q.qtype);
  put_u16(out, q.qclass);
  return out;
}

namespace {

// Question bytes for a response: verbatim echo when we have the original
// uncompressed bytes, canonical re-encoding otherwise. (A compressed
// question may point into the header, whose bytes change in the response.)
void put_question(std::vector<uint8_t>& out, const QueryView& q) {
  if (!q.raw_question.empty() && !q.question_compressed) {
    out.insert(out.end(), q.raw_question.begin(), q.raw_question.end());
    return;
  }
  put_name(out, q.qname);
  put_u16(out, q.qtype);
  put_u16(out, q.qclass);
}

std::vector<uint8_t> response_with_question(const QueryView& q, uint8_t rcode,
                                            uint16_t answer_count) {
  std::vector<uint8_t> out;
  put_u16(out, q.id);
  uint16_t flags = 0x8000 | 0x0080;  // QR, RA
  if (q.recursion_desired) flags |= 0x0100;
  flags |= rcode & 0x0f;
  put_u16(out, flags);
  put_u16(out, 1);  // qdcount
  put_u16(out, answer_count);
  put_u16(out, 0);
  put_u16(out, 0);
  put_question(out, q);
  return out;
}

}  // namespace

std::vector<uint8_t> synthesize_block_response(const QueryView& q, BlockMode mode,
                                               std::optional<Ipv4> sinkhole_addr,
                                               uint32_t ttl_seconds) {
  const bool sinkhole = mode == BlockMode::Sinkhole && q.qtype == kTypeA && sinkhole_addr;
  if (!sinkhole) {
    return response_with_question(q, kRcodeNxDomain, 0);
  }
  std::vector<uint8_t> out = response_with_question(q, kRcodeNoError, 1);
  put_name(out, q.qname);  // answers are never compressed
  put_u16(out, kTypeA);
  put_u16(out, kClassIn);
  put_u32(out, ttl_seconds);
  put_u16(out, 4);
  out.insert(out.end(), sinkhole_addr->octets.begin(), sinkhole_addr->octets.end());
  return out;
}

std::vector<uint8_t> synthesize_rcode_response(const QueryView& q, uint8_t rcode) {
  return response_with_question(q, rcode, 0);
}

std::vector<uint8_t> synthesize_header_only(uint16_t id, uint8_t rcode) {
  std::vector<uint8_t> out;
  put_u16(out, id);
  put_u16(out, 0x8000 | (rcode & 0x0f));
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, 0);
  return out;
}

WireResult<ResponseMeta> parse_response_meta(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return WireError::Truncated;
  ResponseMeta meta;
  meta.id = read_u16(bytes, 0);
  const uint16_t flags = read_u16(bytes, 2);
  meta.rcode = static_cast<uint8_t>(flags & 0x0f);
  meta.answer_count = read_u16(bytes, 6);
  meta.response = (flags & 0x8000) != 0;
  return meta;
}

}  // namespace dnsward::wire
