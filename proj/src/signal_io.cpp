#include "ocdsp/signal_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ocdsp {

namespace {

constexpr std::size_t kMagicSize = 16;

void put_f64(std::ostream& os, double v) {
  auto u = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xffu);
  os.write(buf, 8);
}

double get_f64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ShapeError("signal dump: truncated payload");
  std::uint64_t u = 0;
  for (int i = 7; i >= 0; --i) u = (u << 8) | buf[i];
  return std::bit_cast<double>(u);
}

}  // namespace

void write_signal(std::ostream& os, const DualPolSignalXd& signal) {
  signal.validate();
  os.write(kSignalMagic, kMagicSize);
  os << fmt::format("version={} samples={} sample_rate={:.17g}\n", kSignalFormatVersion,
                    signal.size(), signal.sample_rate);
  for (Index i = 0; i < signal.size(); ++i) {
    put_f64(os, signal.x(i).real());
    put_f64(os, signal.x(i).imag());
    put_f64(os, signal.y(i).real());
    put_f64(os, signal.y(i).imag());
  }
  if (!os) throw Error("signal dump: write failed");
}

DualPolSignalXd read_signal(std::istream& is) {
  char magic[kMagicSize];
  if (!is.read(magic, kMagicSize) || std::memcmp(magic, kSignalMagic, kMagicSize) != 0)
    throw ShapeError("signal dump: bad magic");
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("signal dump: missing version line");
  int version = 0;
  long long samples = -1;
  double rate = 0;
  if (std::sscanf(line.c_str(), "version=%d samples=%lld sample_rate=%lf", &version, &samples, &rate) != 3)
    throw ShapeError("signal dump: malformed version line");
  if (version != kSignalFormatVersion)
    throw ShapeError(fmt::format("signal dump: unsupported version {}", version));
  if (samples < 0) throw ShapeError("signal dump: negative sample count");
  DualPolSignalXd s;
  s.sample_rate = rate;
  s.x.resize(samples);
  s.y.resize(samples);
  for (long long i = 0; i < samples; ++i) {
    const double xr = get_f64(is), xi = get_f64(is), yr = get_f64(is), yi = get_f64(is);
    s.x(i) = {xr, xi};
    s.y(i) = {yr, yi};
  }
  s.validate();
  return s;
}

void write_signal_file(const std::string& path, const DualPolSignalXd& signal) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_signal(os, signal);
}

DualPolSignalXd read_signal_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_signal(is);
}

}  // namespace ocdsp
