#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "thermal/pathspace.hpp"

namespace thermal {

namespace {

static_assert(std::endian::native == std::endian::little,
              "ensemble files are written in host order, which must be little-endian");

constexpr std::array<char, 4> magic{'T', 'F', 'P', 'E'};
constexpr std::uint32_t format_version = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("ensemble file truncated in header");
  return value;
}

}  // namespace

void save_ensemble(const PathEnsemble& ensemble, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out.write(magic.data(), magic.size());
  put<std::uint32_t>(out, format_version);
  put<std::uint64_t>(out, ensemble.n_samples());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(ensemble.n_t()));
  put<std::uint64_t>(out, ensemble.modes());
  put<double>(out, ensemble.beta());
  put<std::uint64_t>(out, ensemble.seed());
  const auto data = ensemble.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + file.string());
}

PathEnsemble load_ensemble(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  if (!in || head != magic) throw IoError(file.string() + " is not an ensemble file");
  if (get<std::uint32_t>(in) != format_version) throw IoError("unsupported ensemble file version");
  const auto n_samples = get<std::uint64_t>(in);
  const auto n_t = get<std::uint64_t>(in);
  const auto modes = get<std::uint64_t>(in);
  const auto beta = get<double>(in);
  const auto seed = get<std::uint64_t>(in);
  if (n_t == 0 || n_t > 1u << 20 || modes > 1u << 20) throw IoError("implausible ensemble header");
  PathEnsemble ensemble(n_samples, static_cast<int>(n_t), modes, beta, seed);
  for (std::size_t n = 0; n < n_samples; ++n) {
    auto row = ensemble.path(n);
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw IoError("ensemble file truncated in data");
  }
  return ensemble;
}

}  // namespace thermal
