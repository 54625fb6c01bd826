#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "ebeam/beam.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/interaction.hpp"
#include "ebeam/qed.hpp"
#include "ebeam/quadrature.hpp"
#include "ebeam/rng.hpp"

namespace ebeam {

using namespace constants;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Polar rule centred on the outgoing transverse momentum.
struct PolarRule {
  std::vector<double> cs, sn;
  std::vector<double> t, wt;
  double w_angle = 0.0;

  PolarRule(int n_angle, int n_radial) {
    cs.resize(n_angle);
    sn.resize(n_angle);
    for (int j = 0; j < n_angle; ++j) {
      const double th = 2.0 * kPi * (j + 0.5) / n_angle;
      cs[j] = std::cos(th);
      sn[j] = std::sin(th);
    }
    w_angle = 2.0 * kPi / n_angle;
    const QuadRule gl = gauss_legendre(n_radial);
    t.resize(n_radial);
    wt.resize(n_radial);
    for (int k = 0; k < n_radial; ++k) {
      t[k] = 0.5 * (gl.x[k] + 1.0);
      wt[k] = 0.5 * gl.w[k];
    }
  }
};

constexpr int kSlots = 6;
using Sample = std::array<double, kSlots>;

// Shared kinematics of a scattered point pi given the outgoing momentum pi'.
struct Kin {
  double pzs, dz, gz, pp2;
};

class Integrand {
 public:
  Integrand(const DimensionlessParams& p, const QedOptions& opt)
      : p_(p), rule_(opt.n_angle, opt.n_radial), n_(opt.truncation) {
    om_ = opt.reverse ? -p.Omega0 : p.Omega0;
    xi2_ = p.xi * p.xi;
    M2_ = p.M * p.M;
    const double omz0 = std::sqrt(p.pi_z0 * p.pi_z0 + M2_);
    centre_ = std::sqrt(p.pi_z0 * p.pi_z0 + 2.0 * om_ * omz0 + om_ * om_);
    inv_beta0_ = omz0 / p.pi_z0;
  }

  double centre() const { return centre_; }

  // Slots: |A+|^2, |A-|^2, |flip+|^2, |flip-|^2, Re and Im of the overlap
  // numerator (magnetic) or unused (electric).
  template <class Kernel>
  Sample eval(double pzp, double pxp, double pyp, Kernel&& kernel) const {
    const double ppp2 = pxp * pxp + pyp * pyp;
    const double op = std::sqrt(pzp * pzp + xi2_ * ppp2 + M2_);
    const double S = n_ + std::sqrt(ppp2);
    const double n2 = n_ * n_;
    const double rx = p_.rho0[0], ry = p_.rho0[1];
    typename std::decay_t<Kernel>::Acc acc{};
    for (std::size_t k = 0; k < rule_.t.size(); ++k) {
      const double s = S * rule_.t[k];
      const double ws = S * rule_.wt[k] * s * rule_.w_angle;
      for (std::size_t j = 0; j < rule_.cs.size(); ++j) {
        const double dx = -s * rule_.cs[j], dy = -s * rule_.sn[j];
        const double px = pxp - dx, py = pyp - dy;
        const double pp2 = px * px + py * py;
        if (pp2 > n2) continue;
        const double N = 2.0 * om_ * op - om_ * om_ - xi2_ * (ppp2 - pp2);
        const double arg = pzp * pzp - N;
        if (arg <= 0.0) continue;
        const double pzs = std::sqrt(arg);
        const double dz = N / (pzp + pzs);
        const double gz = pzs - p_.pi_z0;
        if (std::abs(gz) > n_) continue;
        const double a2 = (dz * dz - om_ * om_) / xi2_;
        const double w = ws * std::exp(-gz * gz - pp2) / (a2 + s * s);
        const double ph = -(px * rx + py * ry);
        const cplx g(w * std::cos(ph), w * std::sin(ph));
        kernel.add(acc, g, Kin{pzs, dz, gz, pp2}, dx, dy, px, py, pzp, pxp, pyp, ppp2, op);
      }
    }
    Sample out = kernel.finish(acc, pzp, pxp, pyp, ppp2, op);
    return out;
  }

  double overlap_phase(double op) const {
    const double pmag = std::sqrt(op * op - M2_);
    return om_ * p_.l_tilde * (inv_beta0_ - op / pmag);
  }

  const DimensionlessParams& params() const { return p_; }
  double om() const { return om_; }
  double xi2() const { return xi2_; }
  double M2() const { return M2_; }

 private:
  DimensionlessParams p_;
  PolarRule rule_;
  double n_;
  double om_, xi2_, M2_, centre_, inv_beta0_;
};

// Moment along x; the caller rotates rho0 for other directions.
struct MagneticKernel {
  const Integrand* I;
  struct Acc {
    cplx sp, sm, fp, fm;
  };

  void add(Acc& a, cplx g, const Kin& k, double dx, double dy, double, double py, double,
           double, double, double, double) const {
    const double r = k.dz / k.pzs;
    const double X = 2.0 * (dy - py * r), Y = -dx * r;
    a.sp += g * cplx(X, Y);
    a.sm += g * cplx(X, -Y);
    const double xi2 = I->xi2();
    const double fpre = 1.0 / (std::sqrt(xi2) * k.pzs);
    const double re = fpre * xi2 * dy * dx, im = fpre * (k.dz * k.dz + xi2 * dy * dy);
    a.fp += g * cplx(re, im);
    a.fm += g * cplx(-re, im);
  }

  Sample finish(const Acc& a, double pzp, double pxp, double pyp, double ppp2, double op) const {
    const double om = I->om();
    const double pref2 = (op - om) / op;
    const double pref = std::sqrt(pref2);
    Sample s{};
    s[0] = pref2 * (std::norm(a.sp) + std::norm(a.fp));
    s[1] = pref2 * (std::norm(a.sm) + std::norm(a.fm));
    s[2] = pref2 * std::norm(a.fp);
    s[3] = pref2 * std::norm(a.fm);
    const auto& p = I->params();
    const double gz = pzp - p.pi_z0;
    const double env = std::exp(-gz * gz - ppp2);
    const cplx in_conj = std::polar(env, pxp * p.rho0[0] + pyp * p.rho0[1]);
    const cplx ov = in_conj * 0.5 * (a.sp + a.sm) * pref * std::polar(1.0, I->overlap_phase(op));
    s[4] = ov.real();
    s[5] = ov.imag();
    return s;
  }
};

struct ElectricKernel {
  const Integrand* I;
  double Dx, Dy, Dz;
  struct Acc {
    cplx cp, cm, fp, fm;
  };

  void add(Acc& a, cplx g, const Kin& k, double dx, double dy, double, double, double pzp,
           double pxp, double pyp, double ppp2, double op) const {
    const double om = I->om(), xi2 = I->xi2(), xi = std::sqrt(xi2);
    const double zterm = (4.0 * om * (I->M2() + xi2 * ppp2) + 4.0 * om * pzp * k.dz -
                          om * k.dz * k.dz - 2.0 * op * om * om - 2.0 * op * xi2 * (ppp2 - k.pp2)) /
                         (pzp + k.pzs);
    const double tx = -om * (2.0 * pxp - dx) + 2.0 * op * dx;
    const double ty = -om * (2.0 * pyp - dy) + 2.0 * op * dy;
    const double inv = 1.0 / k.pzs;
    const double base = -inv * (zterm * Dz / xi + tx * Dx + ty * Dy);
    const double spin = -inv * om * (Dx * dy - Dy * dx);
    a.cp += g * cplx(base, spin);
    a.cm += g * cplx(base, -spin);
    const double fr = -Dy * k.dz / xi + Dz * dy;
    const double fi = Dx * k.dz / xi - Dz * dx;
    a.fp += g * (om * inv) * cplx(-fi, fr);
    a.fm += g * (om * inv) * cplx(fi, fr);
  }

  Sample finish(const Acc& a, double, double, double, double, double) const {
    return {std::norm(a.cp), std::norm(a.cm), std::norm(a.fp), std::norm(a.fm), 0.0, 0.0};
  }
};

struct ShiftSums {
  Sample sum{};
  std::size_t n = 0;
};

// Pairwise reduction in index order, independent of worker count.
Sample pairwise(const std::vector<Sample>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Sample a = pairwise(v, lo, mid), b = pairwise(v, mid, hi);
  for (int i = 0; i < kSlots; ++i) a[i] += b[i];
  return a;
}

template <class Kernel>
std::vector<Sample> run_outer(const Integrand& I, const Kernel& kernel, const QedOptions& opt) {
  const double c = I.centre();
  const double pi32 = std::pow(kPi, 1.5);
  std::vector<Sample> per_group;

  auto for_groups = [&](std::size_t groups, auto&& body) {
    per_group.assign(groups, Sample{});
    const unsigned nw = std::max(1u, std::min<unsigned>(opt.workers, unsigned(groups)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t g; (g = next.fetch_add(1)) < groups;) per_group[g] = body(g);
    };
    if (nw == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work);
    }
  };

  if (opt.mode == QedMode::tensor) {
    const QuadRule gh = gauss_hermite(opt.tensor_nodes);
    const std::size_t m = gh.x.size();
    // One group per (z node); each sums the transverse plane.
    for_groups(m, [&](std::size_t iz) {
      std::vector<Sample> row;
      row.reserve(m * m);
      const double tz = gh.x[iz];
      for (std::size_t ix = 0; ix < m; ++ix)
        for (std::size_t iy = 0; iy < m; ++iy) {
          const double tx = gh.x[ix], ty = gh.x[iy];
          const double w = gh.w[iz] * gh.w[ix] * gh.w[iy] * std::exp(tz * tz + tx * tx + ty * ty);
          Sample s = I.eval(c + tz, tx, ty, kernel);
          for (auto& v : s) v *= w;
          row.push_back(s);
        }
      return pairwise(row, 0, row.size());
    });
    return {pairwise(per_group, 0, per_group.size())};
  }

  const RngStream root(opt.seed, 0x9ed);
  const std::size_t npts = std::size_t(opt.points);
  for_groups(std::size_t(opt.shifts), [&](std::size_t k) {
    RngStream r = root.split(k);
    const double sh[3] = {r.uniform(), r.uniform(), r.uniform()};
    std::vector<Sample> pts;
    pts.reserve(npts);
    for (std::size_t i = 0; i < npts; ++i) {
      double t[3];
      for (int d = 0; d < 3; ++d) {
        double u = radical_inverse(i + 1, kPrimes[d]) + sh[d];
        u -= std::floor(u);
        u = std::clamp(u, 1e-15, 1.0 - 1e-15);
        t[d] = boost::math::erf_inv(2.0 * u - 1.0);
      }
      const double w = pi32 * std::exp(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]) / double(npts);
      Sample s = I.eval(c + t[0], t[1], t[2], kernel);
      for (auto& v : s) v *= w;
      pts.push_back(s);
    }
    return pairwise(pts, 0, pts.size());
  });
  return per_group;
}

struct Stats {
  double mean = 0.0, err = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.err = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
  }
  return s;
}

void check_options(const QedOptions& opt) {
  if (opt.n_angle < 8 || opt.n_radial < 4) throw DomainError("QedOptions: inner grid too small");
  if (opt.mode == QedMode::qmc && (opt.points < 1 || opt.shifts < 1))
    throw DomainError("QedOptions: need points >= 1 and shifts >= 1");
  if (opt.mode == QedMode::tensor && opt.tensor_nodes < 2)
    throw DomainError("QedOptions: tensor_nodes must be >= 2");
  if (!(opt.truncation > 0.0)) throw DomainError("QedOptions: truncation must be > 0");
}

std::string grid_label(const QedOptions& opt) {
  if (opt.mode == QedMode::tensor)
    return fmt::format("tensor gh{}^3 inner {}x{} n={}", opt.tensor_nodes, opt.n_angle,
                       opt.n_radial, opt.truncation);
  return fmt::format("qmc {}x{} inner {}x{} n={}", opt.shifts, opt.points, opt.n_angle,
                     opt.n_radial, opt.truncation);
}

double prefactor_sq(double coupling, double delta_r_perp) {
  const double f = e * mu0 * coupling /
                   (hbar * delta_r_perp * std::sqrt(kPi) * std::pow(2.0 * kPi, 2.25));
  return f * f;
}

}  // namespace

BackactionResult magnetic_backaction(const WavePacketSpec& wp, double omega0, double moment,
                                     const QedOptions& opt, double moment_angle) {
  check_options(opt);
  if (!(moment > 0.0)) throw DomainError("magnetic_backaction: moment must be > 0");
  DimensionlessParams p = dimensionless_params(wp, omega0);
  if (std::hypot(p.rho0[0], p.rho0[1]) == 0.0)
    throw DomainError("magnetic_backaction: impact offset must be nonzero");
  // Rotate so the moment lies along x.
  const double ca = std::cos(moment_angle), sa = std::sin(moment_angle);
  p.rho0 = {ca * p.rho0[0] + sa * p.rho0[1], -sa * p.rho0[0] + ca * p.rho0[1]};

  const Integrand I(p, opt);
  const MagneticKernel K{&I};
  const std::vector<Sample> groups = run_outer(I, K, opt);

  const double F2 = prefactor_sq(moment, wp.delta_r_perp);
  const double in_norm = std::pow(kPi / 2.0, 0.75);
  std::vector<double> pp, pm, fl, ore, oim;
  for (const Sample& s : groups) {
    pp.push_back(F2 * s[0]);
    pm.push_back(F2 * s[1]);
    fl.push_back(s[2] / s[0]);
    const cplx o = cplx(s[4], s[5]) / in_norm * 0.5 * (1.0 / std::sqrt(s[0]) + 1.0 / std::sqrt(s[1]));
    ore.push_back(o.real());
    oim.push_back(o.imag());
  }

  BackactionResult r;
  const Stats sp = stats(pp), sm = stats(pm), sre = stats(ore), sim = stats(oim);
  r.P_plus = sp.mean;
  r.P_minus = sm.mean;
  r.P_plus_err = sp.err;
  r.P_minus_err = sm.err;
  r.flip_fraction = stats(fl).mean;
  r.overlap = {sre.mean, sim.mean};
  r.overlap_err = std::hypot(sre.err, sim.err);

  TwoLevelSystem sys;
  sys.omega0 = omega0;
  sys.kind = SystemKind::generic;
  sys.mu = {moment * std::cos(moment_angle), moment * std::sin(moment_angle), 0.0};
  r.P_semiclassical = magnetic_transition_probability(sys, kinematics_from_energy(wp.kinetic_energy_eV),
                                                      wp.impact_offset[0], wp.impact_offset[1]);
  r.samples = opt.mode == QedMode::tensor ? std::size_t(std::pow(opt.tensor_nodes, 3))
                                          : std::size_t(opt.points) * std::size_t(opt.shifts);
  r.converged = opt.mode == QedMode::tensor ||
                std::max(sp.err / sp.mean, sm.err / sm.mean) <= opt.rel_tol;
  r.grid = grid_label(opt);
  return r;
}

double scattered_probability_magnetic(const WavePacketSpec& wp, double omega0, double moment,
                                      int spin_sign, const QedOptions& opt, double moment_angle) {
  if (spin_sign != 1 && spin_sign != -1) throw DomainError("spin_sign must be +1 or -1");
  const BackactionResult r = magnetic_backaction(wp, omega0, moment, opt, moment_angle);
  if (!r.converged)
    throw ConvergenceError("scattered_probability_magnetic: error above tolerance",
                           spin_sign > 0 ? r.P_plus : r.P_minus);
  return spin_sign > 0 ? r.P_plus : r.P_minus;
}

std::complex<double> overlap_magnetic(const WavePacketSpec& wp, double omega0, double moment,
                                      const QedOptions& opt) {
  const BackactionResult r = magnetic_backaction(wp, omega0, moment, opt);
  if (!r.converged)
    throw ConvergenceError("overlap_magnetic: error above tolerance", std::abs(r.overlap));
  return r.overlap;
}

ElectricBackaction scattered_probability_electric(const WavePacketSpec& wp, double omega_eg,
                                                  const Vec3& dipole, const QedOptions& opt) {
  check_options(opt);
  const double dmag = std::sqrt(dipole[0] * dipole[0] + dipole[1] * dipole[1] + dipole[2] * dipole[2]);
  if (!(dmag > 0.0)) throw DomainError("scattered_probability_electric: dipole must be nonzero");
  const DimensionlessParams p = dimensionless_params(wp, omega_eg);
  if (std::hypot(p.rho0[0], p.rho0[1]) == 0.0)
    throw DomainError("scattered_probability_electric: impact offset must be nonzero");

  const Integrand I(p, opt);
  const ElectricKernel K{&I, dipole[0] / dmag, dipole[1] / dmag, dipole[2] / dmag};
  const std::vector<Sample> groups = run_outer(I, K, opt);

  const double F2 = prefactor_sq(c * dmag, wp.delta_r_perp);
  std::vector<double> cp, cm, fp, fm, pp, pm;
  for (const Sample& s : groups) {
    cp.push_back(F2 * (s[0]));
    cm.push_back(F2 * (s[1]));
    fp.push_back(F2 * s[2]);
    fm.push_back(F2 * s[3]);
    pp.push_back(F2 * (s[0] + s[2]));
    pm.push_back(F2 * (s[1] + s[3]));
  }
  ElectricBackaction r;
  r.P_conserving_plus = stats(cp).mean;
  r.P_conserving_minus = stats(cm).mean;
  r.P_flip_plus = stats(fp).mean;
  r.P_flip_minus = stats(fm).mean;
  const Stats sp = stats(pp), sm = stats(pm);
  r.P_plus_err = sp.err;
  r.P_minus_err = sm.err;

  TwoLevelSystem sys;
  sys.omega0 = omega_eg;
  sys.kind = SystemKind::generic;
  sys.dipole = dipole;
  r.P_semiclassical = electric_transition_probability(sys, kinematics_from_energy(wp.kinetic_energy_eV),
                                                      wp.impact_offset[0], wp.impact_offset[1]);
  r.samples = opt.mode == QedMode::tensor ? std::size_t(std::pow(opt.tensor_nodes, 3))
                                          : std::size_t(opt.points) * std::size_t(opt.shifts);
  r.converged = opt.mode == QedMode::tensor ||
                std::max(sp.err / sp.mean, sm.err / sm.mean) <= opt.rel_tol;
  r.grid = grid_label(opt);
  return r;
}

}  // namespace ebeam
