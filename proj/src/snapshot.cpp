#include <bit>
#include <cstring>
#include <fstream>

#include "decm/io.hpp"

namespace decm {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

namespace {

constexpr char kMagic[6] = {'D', 'E', 'C', 'M', 'F', '1'};

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

ScaleTag scale_tag(TimeScale s, bool boosted) {
  switch (s) {
    case TimeScale::laboratory: return ScaleTag::laboratory;
    case TimeScale::gyration: return ScaleTag::gyration;
    case TimeScale::friction: return boosted ? ScaleTag::friction_boosted : ScaleTag::friction;
  }
  return ScaleTag::laboratory;
}

std::string_view to_string(ScaleTag t) noexcept {
  switch (t) {
    case ScaleTag::laboratory: return "lab";
    case ScaleTag::gyration: return "gyration";
    case ScaleTag::friction: return "friction";
    case ScaleTag::friction_boosted: return "friction_boosted";
  }
  return "lab";
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const int n = s.field.grid().n();
  std::string buf;
  buf.reserve(snapshot_size(n));
  buf.append(kMagic, 6);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(n));
  put<double>(buf, s.t);
  put<double>(buf, s.b);
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(s.tag));
  buf.append(reinterpret_cast<const char*>(s.field.data()), 8 * s.field.grid().size());
  write_text(path, buf);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = "snapshot '" + path.string() + "'";
  if (buf.size() < snapshot_size(0) || std::memcmp(buf.data(), kMagic, 6) != 0)
    throw IoError(name + ": bad magic or truncated header");
  std::size_t pos = 6;
  const auto n = get<std::uint32_t>(buf, pos);
  if (n > 65536 || buf.size() != snapshot_size(static_cast<int>(n)))
    throw IoError(name + ": size " + std::to_string(buf.size()) + " does not match n = " +
                  std::to_string(n));
  const double t = get<double>(buf, pos);
  const double b = get<double>(buf, pos);
  const auto tag = get<std::uint8_t>(buf, pos);
  if (tag > 3) throw IoError(name + ": unknown scale tag " + std::to_string(tag));
  Grid grid(8);
  try {
    grid = Grid(static_cast<int>(n));
  } catch (const DomainError& e) {
    throw IoError(name + ": " + e.what());
  }
  ScalarField f(grid);
  std::memcpy(f.data(), buf.data() + pos, 8 * grid.size());
  return Snapshot{std::move(f), t, b, static_cast<ScaleTag>(tag)};
}

}  // namespace decm
