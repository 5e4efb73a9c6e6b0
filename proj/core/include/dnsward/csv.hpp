#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace dnsward {

// Splits one CSV line into fields. Handles double-quoted fields with ""
// escapes; quoted fields may contain commas. Multi-line quoted fields are
// out of scope for the feed and import formats.
std::vector<std::string> split_csv_line(std::string_view line);

// getline that strips a trailing '\r'.
bool getline_text(std::istream& in, std::string& line);

// Quotes the field if it contains a comma, quote, or semicolon.
std::string csv_escape(std::string_view field);

std::string trim(std::string_view s);

}  // namespace dnsward
