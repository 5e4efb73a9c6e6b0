#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dnsward {

// A DNS name as an ordered list of labels, stored lowercase so comparison is
// case-insensitive by construction. Labels are printable ASCII without dots,
// each 1..63 bytes; the presentation form (labels joined with '.') is at
// most 253 bytes. The root name has no labels and prints as ".".
class DomainName {
 public:
  DomainName() = default;  // root

  // Presentation form, with or without trailing dot. "." parses to root.
  static std::optional<DomainName> parse(std::string_view presentation);
  static std::optional<DomainName> from_labels(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  size_t label_count() const { return labels_.size(); }
  bool is_root() const { return labels_.empty(); }

  std::string to_string() const;

  // Encoded wire size including the terminal zero octet.
  size_t wire_length() const;

  // True when this name equals `other` or sits above it on a label
  // boundary: "foo.com" covers "a.foo.com" but never "xfoo.com".
  bool is_suffix_of(const DomainName& other) const;

  bool operator==(const DomainName&) const = default;

  static bool valid_label(std::string_view label);

 private:
  std::vector<std::string> labels_;
};

}  // namespace dnsward
