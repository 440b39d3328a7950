#include "smeq/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "smeq/error.hpp"
#include "smeq/quadrature.hpp"

namespace smeq {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

/// Euler walk of X with generator Δ, killed on leaving the domain. In 1D a
/// Brownian-bridge crossing test kills paths that left and came back inside
/// one step.
class Walker {
 public:
  Walker(const Domain& d, const Point& x0, const PathConfig& cfg, std::uint64_t path)
      : d_(d), x_(x0), dt_(cfg.dt), sigma_(std::sqrt(2.0 * cfg.dt)), rng_(cfg.seed, path) {
    if (const auto* iv = std::get_if<Interval>(&d.shape())) {
      one_d_ = true;
      a_ = iv->a;
      b_ = iv->b;
    }
  }

  const Point& x() const { return x_; }

  /// Advances one step; false when the path is killed during it.
  bool step() {
    Point y = x_;
    y[0] += sigma_ * normal_(rng_);
    if (!one_d_) y[1] += sigma_ * normal_(rng_);
    if (one_d_) {
      const double u = rng_.uniform();
      if (!(y[0] > a_ && y[0] < b_)) return false;
      const double pa = std::exp(-(x_[0] - a_) * (y[0] - a_) / dt_);
      const double pb = std::exp(-(b_ - x_[0]) * (b_ - y[0]) / dt_);
      if (u < 1.0 - (1.0 - pa) * (1.0 - pb)) return false;
    } else if (!contains(d_, y)) {
      return false;
    }
    x_ = y;
    return true;
  }

 private:
  const Domain& d_;
  Point x_;
  double dt_;
  double sigma_;
  PathRng rng_;
  boost::random::normal_distribution<double> normal_;
  bool one_d_ = false;
  double a_ = 0.0, b_ = 0.0;
};

MCEstimate summarize(const std::vector<double>& v, std::size_t stride, std::size_t offset, std::size_t n) {
  MCEstimate e;
  e.n_paths = n;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i * stride + offset];
  e.mean = s / static_cast<double>(n);
  if (n > 1) {
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = v[i * stride + offset] - e.mean;
      q += r * r;
    }
    e.std_error = std::sqrt(q / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return e;
}

/// Runs body(i) for every path index on a fixed pool; results are written by
/// index so the reduction afterwards is order independent of scheduling.
template <class F>
void for_paths(std::size_t n, F body) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n / 64 + 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

double one(const Point&) { return 1.0; }

}  // namespace

double PathConfig::epsilon() const { return shell_epsilon > 0.0 ? shell_epsilon : 2.0 * std::sqrt(dt); }

void PathConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("invalid-path-config", "dt must be positive");
  if (!(max_time > 0.0)) throw Error("invalid-path-config", "max_time must be positive");
  if (epsilon() < std::sqrt(dt) * (1.0 - 1e-12)) {
    throw Error("invalid-path-config", "shell_epsilon must be at least sqrt(dt)");
  }
  if (n_paths == 0) throw Error("invalid-path-config", "n_paths must be at least 1");
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (path + 1));
  splitmix64(s);
  for (auto& w : s_) w = splitmix64(s);
}

PathRng::result_type PathRng::operator()() {
  const std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return r;
}

double PathRng::uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

RateFunctional::RateFunctional(const MeasureSpec& m, int dim, double epsilon)
    : m_(&m), dim_(dim), eps_(epsilon), has_density_(m.has_density()), empty_(m.empty()) {
  atom_scale_ = dim == 1 ? 1.0 / (2.0 * epsilon) : 1.0 / (std::numbers::pi * epsilon * epsilon);
}

double RateFunctional::operator()(const Point& x) const {
  if (empty_) return 0.0;
  double v = 0.0;
  if (has_density_) {
    v = m_->density_at(x);
    if (std::isnan(v)) v = kRateCap;
    v = std::clamp(v, -kRateCap, kRateCap);
  }
  for (const auto& a : m_->atoms) {
    if (distance(x, a.at) < eps_) v += a.weight * atom_scale_;
  }
  for (const auto& c : m_->curves) {
    if (c.distance_to(x) < eps_) {
      double g = c.density(c.at(c.nearest_parameter(x)));
      if (m_->multiplier) g *= m_->multiplier(x);
      v += g / (2.0 * eps_);
    }
  }
  return v;
}

RateFunctional::SingularStart RateFunctional::singular_start(const Point& x0, double dt) const {
  SingularStart s;
  if (!has_density_ || std::isfinite(m_->density_cap)) return s;
  const double dim = dim_;
  double reg = 0.0;
  for (std::size_t t = 0; t < m_->density.size(); ++t) {
    const DensityTerm& term = m_->density[t];
    double beta = 0.0, c = term.coeff;
    for (const auto& f : term.factors) {
      if (f.beta > 0.0 && distance(f.center, x0) < 1e-14) beta += f.beta;
      else c *= std::pow(distance(f.center, x0), -f.beta);
    }
    if (beta <= 0.0) {
      reg += term(x0);
      continue;
    }
    if (term.fn) c *= term.fn(x0);
    if (m_->multiplier) c *= m_->multiplier(x0);
    s.active = true;
    s.terms.push_back(t);
    if (beta >= dim) {
      s.integral = c == 0.0 ? s.integral : std::copysign(std::numeric_limits<double>::infinity(), c);
      continue;
    }
    // B_s - x0 = sqrt(2s) Z; E|Z|^-beta for a standard Gaussian in dim 1 or 2.
    const double ez = dim_ == 1 ? std::pow(2.0, -beta / 2) * std::tgamma((1 - beta) / 2) / std::sqrt(std::numbers::pi)
                                : std::pow(2.0, -beta / 2) * std::tgamma(1 - beta / 2);
    s.integral += c * ez * std::pow(2.0, -beta / 2) * std::pow(dt, 1 - beta / 2) / (1 - beta / 2);
  }
  if (!s.active) return s;
  if (m_->multiplier) reg *= m_->multiplier(x0);
  for (const auto& a : m_->atoms) {
    if (distance(x0, a.at) < eps_) reg += a.weight * atom_scale_;
  }
  for (const auto& c : m_->curves) {
    if (c.distance_to(x0) < eps_) {
      double g = c.density(c.at(c.nearest_parameter(x0)));
      if (m_->multiplier) g *= m_->multiplier(x0);
      reg += g / (2.0 * eps_);
    }
  }
  s.regular = std::clamp(reg, -kRateCap, kRateCap);
  return s;
}

double RateFunctional::terms_at(const std::vector<std::size_t>& terms, const Point& x) const {
  double v = 0.0;
  for (std::size_t t : terms) v += m_->density[t](x);
  if (m_->multiplier) v *= m_->multiplier(x);
  return std::clamp(v, -kRateCap, kRateCap);
}

double RateFunctional::step(const SingularStart& s, double v0, const Point& x1, double v1, double dt) const {
  if (!s.active) return 0.5 * dt * (v0 + v1);
  return 0.5 * dt * (s.regular + v1 - terms_at(s.terms, x1)) + s.integral;
}

BatchResult estimate_batch(const Domain& d, const Point& x0, const std::vector<const MeasureSpec*>& potentials,
                           const std::vector<const MeasureSpec*>& data, const PathConfig& cfg, double discount,
                           const PathObserver& observer) {
  cfg.validate();
  d.check_dimension(x0);
  if (!contains(d, x0)) throw Error("outside-domain", "starting point " + to_string(x0) + " is not interior");
  const int dim = d.dimension();
  const double eps = cfg.epsilon();
  std::vector<RateFunctional> pot, dat;
  for (const auto* m : potentials) pot.emplace_back(*m, dim, eps);
  for (const auto* m : data) dat.emplace_back(*m, dim, eps);
  const MeasureSpec none;
  if (pot.empty()) pot.emplace_back(none, dim, eps);
  const std::size_t np = pot.size(), nd = dat.size(), width = np * nd;
  const std::size_t n = cfg.n_paths;
  const double dt = cfg.dt;
  std::vector<RateFunctional::SingularStart> pot0, dat0;
  for (const auto& r : pot) pot0.push_back(r.singular_start(x0, dt));
  for (const auto& r : dat) {
    dat0.push_back(r.singular_start(x0, dt));
    // Data that is not integrable at the start keeps the capped trapezoid.
    if (!std::isfinite(dat0.back().integral)) dat0.back() = {};
  }
  const RateFunctional::SingularStart plain;
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.max_time / dt));

  std::vector<double> integrals(n * width, 0.0);
  std::vector<double> exit_times(n, 0.0);
  std::vector<unsigned char> blown(n * np, 0);

  for_paths(n, [&](std::size_t path) {
    Walker w(d, x0, cfg, path);
    std::vector<double> a(np, 0.0), v(np), vn(np), f(nd), fn(nd);
    std::vector<unsigned char> dead(np, 0);
    double* out = integrals.data() + path * width;
    for (std::size_t p = 0; p < np; ++p) v[p] = pot[p](w.x());
    for (std::size_t j = 0; j < nd; ++j) f[j] = dat[j](w.x());
    double t = 0.0;
    std::size_t live = np;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const double disc = discount > 0.0 ? std::exp(-discount * t) : 1.0;
      if (!w.step()) {
        // Killed inside the step: only the left trapezoid half counts.
        for (std::size_t p = 0; p < np; ++p) {
          if (dead[p]) continue;
          const double e = disc * std::exp(-a[p]);
          for (std::size_t j = 0; j < nd; ++j) {
            const bool first = step == 0 && dat0[j].active;
            out[p * nd + j] += first ? e * (0.5 * dt * dat0[j].regular + 0.5 * dat0[j].integral) : 0.5 * dt * e * f[j];
          }
        }
        t += dt;
        break;
      }
      const double disc_n = discount > 0.0 ? std::exp(-discount * (t + dt)) : 1.0;
      for (std::size_t j = 0; j < nd; ++j) fn[j] = dat[j](w.x());
      for (std::size_t p = 0; p < np; ++p) {
        if (dead[p]) continue;
        vn[p] = pot[p](w.x());
        const double an = a[p] + pot[p].step(step == 0 ? pot0[p] : plain, v[p], w.x(), vn[p], dt);
        const double e0 = disc * std::exp(-a[p]);
        const double e1 = disc_n * std::exp(-an);
        for (std::size_t j = 0; j < nd; ++j) {
          if (step == 0 && dat0[j].active) {
            out[p * nd + j] += 0.5 * dt * (e0 * dat0[j].regular + e1 * (fn[j] - dat[j].terms_at(dat0[j].terms, w.x()))) +
                               e0 * dat0[j].integral;
          } else {
            out[p * nd + j] += 0.5 * dt * (e0 * f[j] + e1 * fn[j]);
          }
        }
        a[p] = an;
        v[p] = vn[p];
        if (an > kBlowUp) {
          dead[p] = 1;
          --live;
        }
      }
      std::swap(f, fn);
      t += dt;
      if (live == 0) break;
    }
    exit_times[path] = t;
    for (std::size_t p = 0; p < np; ++p) blown[path * np + p] = dead[p];
  });

  BatchResult r;
  r.est.assign(np, std::vector<MCEstimate>(nd));
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t j = 0; j < nd; ++j) r.est[p][j] = summarize(integrals, width, p * nd + j, n);
  }
  r.blowups.assign(np, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < np; ++p) r.blowups[p] += blown[i * np + p];
  }
  double s = 0.0;
  for (double e : exit_times) s += e;
  r.mean_exit_time = s / static_cast<double>(n);
  if (observer) {
    std::vector<double> row(width);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(integrals.begin() + static_cast<std::ptrdiff_t>(i * width), width, row.begin());
      observer(i, row);
    }
  }
  return r;
}

PCAFTrace simulate_path(const Domain& d, const Point& x0, const PotentialMeasure& nu, const PathConfig& cfg,
                        std::uint64_t path_index) {
  cfg.validate();
  d.check_dimension(x0);
  if (!contains(d, x0)) throw Error("outside-domain", "starting point " + to_string(x0) + " is not interior");
  const RateFunctional rate(nu.base(), d.dimension(), cfg.epsilon());
  Walker w(d, x0, cfg, path_index);
  PCAFTrace tr;
  tr.exited = false;
  tr.times.push_back(0.0);
  tr.A_values.push_back(0.0);
  double a = 0.0, v = rate(w.x()), t = 0.0;
  const RateFunctional::SingularStart start = rate.singular_start(x0, cfg.dt), plain;
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.max_time / cfg.dt));
  for (std::size_t step = 0; step < max_steps; ++step) {
    if (!w.step()) {
      if (!tr.blew_up) a += step == 0 && start.active ? 0.5 * cfg.dt * start.regular + 0.5 * start.integral : 0.5 * cfg.dt * v;
      t += cfg.dt;
      tr.exited = true;
      tr.times.push_back(t);
      tr.A_values.push_back(a);
      break;
    }
    t += cfg.dt;
    if (!tr.blew_up) {
      const double vn = rate(w.x());
      a += rate.step(step == 0 ? start : plain, v, w.x(), vn, cfg.dt);
      v = vn;
      if (a > kBlowUp) tr.blew_up = true;
    }
    tr.times.push_back(t);
    tr.A_values.push_back(a);
  }
  tr.exit_time = t;
  return tr;
}

MCEstimate estimate_R(const Domain& d, const Point& x0, const std::function<double(const Point&)>& f,
                      const PathConfig& cfg) {
  const MeasureSpec data = MeasureSpec::function(f);
  return estimate_batch(d, x0, {}, {&data}, cfg).est[0][0];
}

MCEstimate estimate_R_nu(const Domain& d, const Point& x0, const std::function<double(const Point&)>& f,
                         const PotentialMeasure& nu, const PathConfig& cfg) {
  const MeasureSpec data = MeasureSpec::function(f);
  return estimate_batch(d, x0, {&nu.base()}, {&data}, cfg).est[0][0];
}

MCEstimate estimate_phi(const Domain& d, const Point& x0, const PotentialMeasure& nu, const PathConfig& cfg) {
  const MeasureSpec data = MeasureSpec::lebesgue();
  return estimate_batch(d, x0, {&nu.base()}, {&data}, cfg, 1.0).est[0][0];
}

double revuz_exact(const GreenKernel& k, const Point& x0, const std::function<double(const Point&)>& f,
                   const MeasureSpec& nu) {
  const Domain& d = k.domain();
  double total = 0.0;
  if (nu.has_density()) {
    std::vector<Point> centers = nu.singular_centers();
    if (std::find(centers.begin(), centers.end(), x0) == centers.end()) centers.push_back(x0);
    const quad::LocalFn g = [&](const Point& base, const Point& off) {
      Point y = base;
      for (int a = 0; a < base.dim; ++a) y[a] += off[a];
      const double gk = base == x0 ? k.near(x0, off) : (y == x0 ? 0.0 : k.value(x0, y));
      return gk * f(y) * nu.density_at(base, off);
    };
    total += quad::over_domain(d, g, centers, 1e-9);
  }
  for (const auto& a : nu.atoms) {
    if (a.at == x0 && d.dimension() == 2) {
      throw Error("revuz-undefined-at-exceptional-point", "start point carries a planar atom");
    }
    const double m = nu.multiplier ? nu.multiplier(a.at) : 1.0;
    total += k.value(x0, a.at) * a.weight * f(a.at) * m;
  }
  for (const auto& c : nu.curves) {
    for (const auto& s : sample_curve(c, c.length() / 4096.0)) {
      if (s.at == x0) continue;
      const double m = nu.multiplier ? nu.multiplier(s.at) : 1.0;
      total += k.value(x0, s.at) * f(s.at) * s.weight * m;
    }
  }
  return total;
}

RevuzResult revuz_check(const Domain& d, const Point& x0, const std::function<double(const Point&)>& f,
                        const PotentialMeasure& nu, const PathConfig& cfg, const GreenKernel& k) {
  d.check_dimension(x0);
  if (!nu.singular_points().empty() && classify_singular_set(nu, k).in_n_nu(x0)) {
    throw Error("revuz-undefined-at-exceptional-point", "start point " + to_string(x0) + " lies in N_nu");
  }
  RevuzResult r;
  const MeasureSpec data = nu.base().times(f);
  r.mc = estimate_batch(d, x0, {}, {&data}, cfg).est[0][0];
  r.exact = revuz_exact(k, x0, f, nu.base());
  return r;
}

TruncationSweep truncation_monotonicity_check(const Domain& d, const Point& x0, const PotentialMeasure& nu,
                                              const std::vector<double>& levels, const PathConfig& cfg,
                                              const std::function<double(const Point&)>& f) {
  if (levels.empty()) throw Error("invalid-argument", "no truncation levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw Error("invalid-argument", "truncation levels must increase");
  }
  std::vector<PotentialMeasure> cut;
  for (double l : levels) cut.push_back(truncate(nu, l));
  std::vector<const MeasureSpec*> pots;
  for (const auto& c : cut) pots.push_back(&c.base());
  pots.push_back(&nu.base());
  const MeasureSpec data = MeasureSpec::function(f ? f : one);

  TruncationSweep out;
  const auto observer = [&](std::size_t, const std::vector<double>& row) {
    for (std::size_t p = 1; p < row.size(); ++p) {
      const double excess = row[p] - row[p - 1];
      if (excess > 1e-12 * std::max(1.0, std::abs(row[p - 1]))) {
        ++out.pathwise_violations;
        out.max_violation = std::max(out.max_violation, excess);
      }
    }
  };
  const BatchResult r = estimate_batch(d, x0, pots, {&data}, cfg, 0.0, observer);
  for (std::size_t i = 0; i < levels.size(); ++i) out.levels.push_back(r.est[i][0]);
  out.full = r.est.back()[0];
  return out;
}

}  // namespace smeq
