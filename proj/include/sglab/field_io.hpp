#pragma once

// Binary field dumps: one JSON header line followed by raw little-endian
// doubles. Round trips are bit-exact.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sglab/torus_spectral.hpp"

namespace sglab {

struct FieldHeader {
  int n = 0;
  std::string kind;
  double time = 0.0;
  std::optional<double> epsilon;
};

void write_field(std::ostream& os, const ScalarField& f, const std::string& kind, double time,
                 std::optional<double> epsilon);
void write_field(const std::filesystem::path& path, const ScalarField& f, const std::string& kind,
                 double time, std::optional<double> epsilon);

// Throws IoError on malformed headers or truncated payloads.
ScalarField read_field(std::istream& is, FieldHeader* header = nullptr);
ScalarField read_field(const std::filesystem::path& path, FieldHeader* header = nullptr);

namespace detail {
void write_doubles(std::ostream& os, std::span<const double> data);
std::vector<double> read_doubles(std::istream& is, std::size_t count);
}  // namespace detail

}  // namespace sglab
