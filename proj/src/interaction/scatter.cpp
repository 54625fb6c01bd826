#include <cmath>
#include <string>

#include <fmt/format.h>

#include "ebeam/error.hpp"
#include "ebeam/interaction.hpp"

namespace ebeam {

namespace {

constexpr double kRepairThreshold = 1e-12;

void check_channel(const ScatterChannel& ch) {
  const double slack = 1e-12;
  if (!(ch.P >= 0.0 && ch.P <= 1.0)) throw DomainError("ScatterChannel: P must lie in [0, 1]");
  if (std::abs(ch.lambda1) > 1.0 + slack || std::abs(ch.lambda2) > 1.0 + slack)
    throw DomainError("ScatterChannel: overlaps must satisfy |lambda| <= 1");
}

// Smallest eigenvalue of the 2x2 density matrix.
double min_eigenvalue(const BlochState& s) {
  const double w = s.rho_ee - s.rho_gg;
  const double half_trace = 0.5 * (s.rho_ee + s.rho_gg);
  return half_trace - 0.5 * std::sqrt(w * w + 4.0 * std::norm(s.rho_eg));
}

}  // namespace

BlochState single_scatter_update(const BlochState& rho, const ScatterChannel& ch) {
  check_channel(ch);
  if (!rho.valid(1e-9)) throw DomainError("single_scatter_update: input is not a density matrix");

  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  const double P = ch.P;
  const double sp = std::sqrt(P);
  const cd l1 = ch.lambda1;
  const cd eg = rho.rho_eg;
  const cd ge = std::conj(eg);
  const double ee = rho.rho_ee;
  const double gg = rho.rho_gg;

  const cd d_eg = -P * eg + P * ch.lambda2 * ge - i * std::conj(l1) * sp * (ee - gg);
  const cd flow = -i * l1 * sp * eg + i * std::conj(l1) * sp * ge;  // real up to rounding
  const double d_ee = flow.real() - P * ee + P * gg;

  BlochState out;
  out.rho_eg = eg + d_eg;
  out.rho_ee = ee + d_ee;
  out.rho_gg = gg - d_ee;

  const double lam = min_eigenvalue(out);
  if (lam < 0.0) {
    if (-lam > kRepairThreshold)
      throw ValidityError("density_matrix",
                          fmt::format("single_scatter_update: result has negative eigenvalue {:.6e}", lam));
    // Project the Bloch vector back onto the unit ball.
    const double w = out.rho_ee - out.rho_gg;
    const double len = std::sqrt(w * w + 4.0 * std::norm(out.rho_eg));
    const double scale = (out.rho_ee + out.rho_gg) / len;
    out.rho_eg *= scale;
    const double w2 = w * scale;
    out.rho_ee = 0.5 * (1.0 + w2);
    out.rho_gg = 0.5 * (1.0 - w2);
  }
  return out;
}

}  // namespace ebeam
