#include "dnsward/domain_name.hpp"

namespace dnsward {

namespace {

constexpr size_t kMaxLabel = 63;
constexpr size_t kMaxPresentation = 253;

char fold(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

bool DomainName::valid_label(std::string_view label) {
  if (label.empty() || label.size() > kMaxLabel) return false;
  for (const char c : label) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u >= 0x7f || c == '.') return false;
  }
  return true;
}

std::optional<DomainName> DomainName::parse(std::string_view presentation) {
  if (presentation.empty()) return std::nullopt;
  if (presentation == ".") return DomainName{};
  if (presentation.back() == '.') presentation.remove_suffix(1);
  if (presentation.size() > kMaxPresentation) return std::nullopt;

  std::vector<std::string> labels;
  size_t start = 0;
  while (start <= presentation.size()) {
    size_t end = presentation.find('.', start);
    if (end == std::string_view::npos) end = presentation.size();
    std::string label(presentation.substr(start, end - start));
    for (char& c : label) c = fold(c);
    if (!valid_label(label)) return std::nullopt;
    labels.push_back(std::move(label));
    start = end + 1;
    if (end == presentation.size()) break;
  }
  DomainName name;
  name.labels_ = std::move(labels);
  return name;
}

std::optional<DomainName> DomainName::from_labels(std::vector<std::string> labels) {
  size_t total = 0;
  for (std::string& label : labels) {
    for (char& c : label) c = fold(c);
    if (!valid_label(label)) return std::nullopt;
    total += label.size() + 1;
  }
  if (!labels.empty() && total - 1 > kMaxPresentation) return std::nullopt;
  DomainName name;
  name.labels_ = std::move(labels);
  return name;
}

std::string DomainName::to_string() const {
  if (labels_.empty()) return ".";
  std::string out;
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (i) out += '.';
    out += labels_[i];
  }
  return out;
}

size_t DomainName::wire_length() const {
  size_t n = 1;  // terminal zero octet
  for (const auto& label : labels_) n += label.size() + 1;
  return n;
}

bool DomainName::is_suffix_of(const DomainName& other) const {
  if (labels_.size() > other.labels_.size()) return false;
  const size_t offset = other.labels_.size() - labels_.size();
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != other.labels_[offset + i]) return false;
  }
  return true;
}

}  // namespace dnsward
