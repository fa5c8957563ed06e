#ifndef OCDSP_SIGNAL_IO_HPP
#define OCDSP_SIGNAL_IO_HPP

#include <iosfwd>
#include <string>

#include "ocdsp/types.hpp"

namespace ocdsp {

// Binary dual-polarization dump:
//
//   bytes 0..15 : "OCDSP-DUALPOL-IQ"
//   version line: "version=1 samples=<n> sample_rate=<%.17g>\n"
//   payload     : n records of 4 little-endian IEEE-754 binary64 values
//                 (x.re, x.im, y.re, y.im)
inline constexpr char kSignalMagic[] = "OCDSP-DUALPOL-IQ";
inline constexpr int kSignalFormatVersion = 1;

void write_signal(std::ostream& os, const DualPolSignalXd& signal);
DualPolSignalXd read_signal(std::istream& is);

void write_signal_file(const std::string& path, const DualPolSignalXd& signal);
DualPolSignalXd read_signal_file(const std::string& path);

}  // namespace ocdsp

#endif  // OCDSP_SIGNAL_IO_HPP
