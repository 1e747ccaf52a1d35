#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "decm/spectral.hpp"

namespace decm {

enum class InitKind {
  cmt,          // sin x sin y + cos y
  mode_mix,     // cos(x+y) + 0.5 sin(2x−y) + 0.25 cos 3y
  random_band,  // seeded Gaussian coefficients on 1 <= |k| <= band
};

std::string_view to_string(InitKind k) noexcept;
InitKind parse_init_kind(std::string_view name);

struct InitialData {
  InitKind kind = InitKind::cmt;
  /// Target grid maximum ‖q₀‖_∞. Unset keeps the natural scale of the shape
  /// (√2 for cmt; 1 for the other two).
  std::optional<double> amplitude;
  std::uint64_t seed = 1;
  int band = 4;
};

/// Mean-zero, band-limited inside the dealiasing band of `grid`.
ScalarField make_initial(const Grid& grid, const InitialData& init);

/// Seeded mean-zero field with modes 1 <= |k| <= band (band clipped to the dealiasing
/// cutoff), scaled to ‖f‖_∞ = linf on the grid.
ScalarField random_band_field(const Grid& grid, std::uint64_t seed, int band, double linf = 1.0);

/// Rescales f so that its grid maximum equals `linf` (f must be nonzero).
ScalarField scale_to_linf(ScalarField f, double linf);

}  // namespace decm
