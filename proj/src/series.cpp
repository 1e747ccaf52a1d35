#include <cstdio>
#include <fstream>

#include "decm/io.hpp"

namespace decm {

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string format_series(std::span<const NormRecord> records, std::span<const double> residual) {
  if (records.size() != residual.size()) throw DomainError("write_series: length mismatch");
  std::string out(kSeriesHeader);
  out += '\n';
  char buf[64];
  auto field = [&](double v, char sep) {
    // %.17g is exact for doubles; the C locale is used by snprintf unless changed.
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    out += buf;
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && !(records[i].t > records[i - 1].t))
      throw DomainError("write_series: times must be increasing");
    const NormRecord& r = records[i];
    field(r.t, ',');
    field(r.l2, ',');
    field(r.l4, ',');
    field(r.linf, ',');
    field(r.h_half, ',');
    field(r.h3, ',');
    field(r.mean, ',');
    field(residual[i], '\n');
  }
  return out;
}

void write_series(const std::filesystem::path& path, std::span<const NormRecord> records,
                  std::span<const double> residual) {
  write_text(path, format_series(records, residual));
}

}  // namespace decm
