#include "sglab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "sglab/errors.hpp"

namespace sglab {

static_assert(std::endian::native == std::endian::little,
              "dump format assumes a little-endian host");

namespace detail {

void write_doubles(std::ostream& os, std::span<const double> data) {
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& is, std::size_t count) {
  std::vector<double> out(count);
  is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double)) {
    throw IoError("truncated payload: expected " + std::to_string(count) + " doubles");
  }
  return out;
}

}  // namespace detail

void write_field(std::ostream& os, const ScalarField& f, const std::string& kind, double time,
                 std::optional<double> epsilon) {
  nlohmann::ordered_json h;
  h["n"] = f.n();
  h["kind"] = kind;
  h["time"] = time;
  h["epsilon"] = epsilon ? nlohmann::ordered_json(*epsilon) : nlohmann::ordered_json(nullptr);
  os << h.dump() << '\n';
  detail::write_doubles(os, f.values());
  if (!os) throw IoError("failed writing field dump");
}

void write_field(const std::filesystem::path& path, const ScalarField& f, const std::string& kind,
                 double time, std::optional<double> epsilon) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_field(os, f, kind, time, epsilon);
}

ScalarField read_field(std::istream& is, FieldHeader* header) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("missing field header");
  FieldHeader h;
  try {
    auto j = nlohmann::json::parse(line);
    h.n = j.at("n").get<int>();
    h.kind = j.at("kind").get<std::string>();
    h.time = j.at("time").get<double>();
    if (!j.at("epsilon").is_null()) h.epsilon = j.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad field header: ") + e.what());
  }
  TorusGrid grid(h.n);
  auto values = detail::read_doubles(is, grid.size());
  if (header) *header = h;
  return ScalarField(grid, std::move(values));
}

ScalarField read_field(const std::filesystem::path& path, FieldHeader* header) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_field(is, header);
}

}  // namespace sglab
