#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "dcsgl/graph.hpp"

namespace dcsgl {

/// Raised when a dataset file cannot be decoded. The message carries the
/// 1-based line number and, for schema problems, the offending field.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Canonical JSONL: one header line with dataset metadata, then one line per
// graph. Field order and float formatting are fixed, so encoding is
// deterministic and encode(decode(encode(ds))) == encode(ds).
std::string encode_header(const Dataset& ds);
std::string encode_graph(const Graph& g);
void encode_jsonl(const Dataset& ds, std::ostream& out);
void encode_jsonl(const Dataset& ds, const std::filesystem::path& path);

Dataset decode_jsonl(std::istream& in);
Dataset decode_jsonl(const std::filesystem::path& path);

}  // namespace dcsgl
