#include "geodragon/xml.hpp"

#include <cctype>

namespace geodragon::xml {

const std::string* Element::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs)
    if (k == key) return &v;
  return nullptr;
}

std::string Element::location() const {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  char next() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && !eof(); ++i) next();
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) next();
  }

  int line() const { return line_; }
  int col() const { return col_; }

  [[noreturn]] void fail(const std::string& what) const {
    raise(Errc::ParseError, "xml parse error at line ", line_, ", column ", col_, ": ", what);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == ':' || c == '.';
}

std::string read_name(Cursor& cur) {
  std::string name;
  while (!cur.eof() && is_name_char(cur.peek())) name += cur.next();
  if (name.empty()) cur.fail("expected a name");
  return name;
}

std::string decode_entities(Cursor& cur, const std::string& raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out += raw[i];
      continue;
    }
    const std::size_t end = raw.find(';', i);
    if (end == std::string::npos) cur.fail("unterminated entity reference");
    const std::string ent = raw.substr(i + 1, end - i - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else cur.fail("unknown entity &" + ent + ";");
    i = end;
  }
  return out;
}

void skip_misc(Cursor& cur) {
  for (;;) {
    cur.skip_ws();
    if (cur.starts_with("<?")) {
      while (!cur.eof() && !cur.starts_with("?>")) cur.next();
      if (cur.eof()) cur.fail("unterminated declaration");
      cur.advance(2);
    } else if (cur.starts_with("<!--")) {
      cur.advance(4);
      while (!cur.eof() && !cur.starts_with("-->")) cur.next();
      if (cur.eof()) cur.fail("unterminated comment");
      cur.advance(3);
    } else {
      return;
    }
  }
}

Element parse_element(Cursor& cur) {
  if (cur.eof() || cur.peek() != '<') cur.fail("expected '<'");
  Element el;
  el.line = cur.line();
  el.col = cur.col();
  cur.next();  // '<'
  el.name = read_name(cur);

  // Attributes.
  for (;;) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated start tag <" + el.name + ">");
    const char c = cur.peek();
    if (c == '/' || c == '>') break;
    std::string key = read_name(cur);
    cur.skip_ws();
    if (cur.eof() || cur.peek() != '=') cur.fail("expected '=' after attribute " + key);
    cur.next();
    cur.skip_ws();
    if (cur.eof() || (cur.peek() != '"' && cur.peek() != '\''))
      cur.fail("expected quoted attribute value for " + key);
    const char quote = cur.next();
    std::string raw;
    while (!cur.eof() && cur.peek() != quote) {
      if (cur.peek() == '<') cur.fail("'<' in attribute value");
      raw += cur.next();
    }
    if (cur.eof()) cur.fail("unterminated attribute value for " + key);
    cur.next();  // closing quote
    el.attrs.emplace_back(std::move(key), decode_entities(cur, raw));
  }

  if (cur.peek() == '/') {
    cur.next();
    if (cur.eof() || cur.peek() != '>') cur.fail("expected '>' after '/'");
    cur.next();
    return el;
  }
  cur.next();  // '>'

  // Content.
  std::string raw_text;
  for (;;) {
    if (cur.eof()) cur.fail("unterminated element <" + el.name + ">");
    if (cur.peek() == '<') {
      if (cur.starts_with("</")) {
        cur.advance(2);
        const std::string close = read_name(cur);
        if (close != el.name)
          cur.fail("mismatched close tag </" + close + "> for <" + el.name + ">");
        cur.skip_ws();
        if (cur.eof() || cur.peek() != '>') cur.fail("expected '>' in close tag");
        cur.next();
        break;
      }
      if (cur.starts_with("<!--")) {
        skip_misc(cur);
        continue;
      }
      el.children.push_back(parse_element(cur));
    } else {
      raw_text += cur.next();
    }
  }
  el.text = decode_entities(cur, raw_text);
  return el;
}

}  // namespace

Element parse_document(std::string_view text) {
  Cursor cur(text);
  skip_misc(cur);
  if (cur.eof()) cur.fail("empty document");
  Element root = parse_element(cur);
  skip_misc(cur);
  if (!cur.eof()) cur.fail("trailing content after the root element");
  return root;
}

}  // namespace geodragon::xml
