#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "geodragon/error.hpp"

namespace geodragon::xml {

// Tiny DOM for the XML subset used by the map extracts and the behavior-tree
// files: elements, attributes, self-closing tags, comments, declarations and
// the five predefined entities. No namespaces, CDATA or DTDs.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Element> children;
  std::string text;
  int line = 0;
  int col = 0;

  const std::string* attr(std::string_view key) const;
  std::string location() const;  // "line L, column C"
};

// Parses a full document and returns the root element. Malformed input raises
// Errc::ParseError with line/column in the message.
Element parse_document(std::string_view text);

std::string escape_text(std::string_view raw);

}  // namespace geodragon::xml
