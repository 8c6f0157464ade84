#include "cnls/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cnls {

namespace {

static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");

template <class T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& f) {
  T v{};
  if (!f.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated field dump");
  return v;
}

}  // namespace

void write_fields(const std::string& path, const FieldVector& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write("NLSB", 4);
  const int N = u.grid.dim();
  put<std::uint32_t>(f, 1);
  put<std::uint32_t>(f, N);
  put<std::uint32_t>(f, u.k());
  for (int a = 0; a < N; ++a) put<double>(f, u.grid.extent());
  for (int a = 0; a < N; ++a) put<double>(f, u.grid.spacing());
  for (const auto& c : u.components) f.write(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(double));
  if (!f) throw std::runtime_error("write failed: " + path);
}

FieldVector read_fields(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "NLSB", 4) != 0) throw std::runtime_error("not a field dump: " + path);
  if (get<std::uint32_t>(f) != 1) throw std::runtime_error("unsupported field dump version");
  const int N = static_cast<int>(get<std::uint32_t>(f));
  const int k = static_cast<int>(get<std::uint32_t>(f));
  if (N < 1 || N > 3 || k < 1) throw std::runtime_error("bad field dump header");
  std::vector<double> ext(N), h(N);
  for (auto& e : ext) e = get<double>(f);
  for (auto& s : h) s = get<double>(f);
  for (int a = 1; a < N; ++a)
    if (ext[a] != ext[0] || h[a] != h[0]) throw std::runtime_error("anisotropic grids are not supported");
  FieldVector u(Grid::make(N, ext[0], h[0]), k);
  for (auto& c : u.components)
    if (!f.read(reinterpret_cast<char*>(c.data()), c.size() * sizeof(double)))
      throw std::runtime_error("truncated field dump");
  return u;
}

}  // namespace cnls
