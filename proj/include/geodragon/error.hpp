#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace geodragon {

// Stable error codes surfaced by the CLI as machine-readable strings.
enum class Errc {
  ParseError,
  ReferentialIntegrity,
  EmptyCorpus,
  DuplicateId,
  InvalidPrefix,
  RangeError,
  InsufficientBaseline,
  GeometryError,
  DegenerateSegment,
  Unreachable,
  SchemaError,
  ValidationError,
  UndefinedMetric,
  GenerationError,
  IoError,
  ConfigError,
  Internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {
inline void msg_cat(std::ostringstream&) {}
template <class T, class... Rest>
void msg_cat(std::ostringstream& os, const T& head, const Rest&... rest) {
  os << head;
  msg_cat(os, rest...);
}
}  // namespace detail

template <class... Parts>
[[noreturn]] void raise(Errc code, const Parts&... parts) {
  std::ostringstream os;
  detail::msg_cat(os, parts...);
  throw Error(code, os.str());
}

template <class... Parts>
void require(bool cond, Errc code, const Parts&... parts) {
  if (!cond) raise(code, parts...);
}

}  // namespace geodragon
