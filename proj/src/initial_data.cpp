#include "decm/initial_data.hpp"

#include <cmath>
#include <random>

namespace decm {

std::string_view to_string(InitKind k) noexcept {
  switch (k) {
    case InitKind::cmt: return "cmt";
    case InitKind::mode_mix: return "mode_mix";
    case InitKind::random_band: return "random_band";
  }
  return "cmt";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "cmt") return InitKind::cmt;
  if (name == "mode_mix" || name == "mode-mix") return InitKind::mode_mix;
  if (name == "random_band" || name == "random-band") return InitKind::random_band;
  throw DomainError("unknown initial data kind '" + std::string(name) +
                    "' (expected cmt, mode_mix or random_band)");
}

ScalarField scale_to_linf(ScalarField f, double linf) {
  const double m = max_abs(f);
  if (m == 0.0) throw DomainError("scale_to_linf: field is identically zero");
  if (!(linf >= 0.0) || !std::isfinite(linf)) throw DomainError("amplitude must be finite and >= 0");
  f *= linf / m;
  return f;
}

ScalarField random_band_field(const Grid& grid, std::uint64_t seed, int band, double linf) {
  if (band < 1) throw DomainError("random_band: band must be >= 1");
  band = std::min(band, grid.dealias_cutoff());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField f(grid);
  // Upper half plane only; set_mode fills the conjugate partners.
  for (int k1 = -band; k1 <= band; ++k1) {
    for (int k2 = 0; k2 <= band; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const double km2 = double(k1) * k1 + double(k2) * k2;
      if (km2 > double(band) * band) continue;
      const double re = gauss(rng);
      const double im = gauss(rng);
      f.set_mode(k1, k2, cplx(re, im) / (1.0 + km2));
    }
  }
  return scale_to_linf(inverse(f), linf);
}

ScalarField make_initial(const Grid& grid, const InitialData& init) {
  switch (init.kind) {
    case InitKind::cmt: {
      ScalarField f = ScalarField::sample(
          grid, [](double x, double y) { return std::sin(x) * std::sin(y) + std::cos(y); });
      return init.amplitude ? scale_to_linf(std::move(f), *init.amplitude) : f;
    }
    case InitKind::mode_mix: {
      ScalarField f = ScalarField::sample(grid, [](double x, double y) {
        return std::cos(x + y) + 0.5 * std::sin(2 * x - y) + 0.25 * std::cos(3 * y);
      });
      return scale_to_linf(std::move(f), init.amplitude.value_or(1.0));
    }
    case InitKind::random_band:
      return random_band_field(grid, init.seed, init.band, init.amplitude.value_or(1.0));
  }
  throw DomainError("make_initial: unknown kind");
}

}  // namespace decm
