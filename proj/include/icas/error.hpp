#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icas {

/// Root of every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

/// Text-format parse failure. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string source_;
  std::size_t line_;
};

/// Binary GDSII stream failure, positioned by byte offset.
class GdsError : public Error {
public:
  GdsError(std::size_t offset, const std::string& what)
      : Error("gds @" + std::to_string(offset) + ": " + what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class NetlistError : public Error {
public:
  using Error::Error;
};

class LayoutError : public Error {
public:
  using Error::Error;
};

class MetricError : public Error {
public:
  using Error::Error;
};

}  // namespace icas
