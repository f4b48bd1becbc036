#include "jdsmooth/simulate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "jdsmooth/errors.hpp"

namespace jdsmooth {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

JumpSizeDist JumpSizeDist::normal(double mean, double sd) {
  return JumpSizeDist{Family::normal, mean, sd};
}

JumpSizeDist JumpSizeDist::cauchy(double location, double scale) {
  return JumpSizeDist{Family::cauchy, location, scale};
}

double JumpSizeDist::draw(RandomStream& rng) const {
  if (family == Family::normal) return location + scale * rng.normal();
  return rng.cauchy(location, scale);
}

std::optional<double> JumpSizeDist::mean() const {
  if (family == Family::normal) return location;
  return std::nullopt;
}

double JumpSizeDist::second_moment() const {
  if (family == Family::normal) return location * location + scale * scale;
  return std::numeric_limits<double>::infinity();
}

double JumpSizeDist::fourth_moment() const {
  if (family == Family::normal) {
    const double m = location;
    const double s2 = scale * scale;
    return m * m * m * m + 6.0 * m * m * s2 + 3.0 * s2 * s2;
  }
  return std::numeric_limits<double>::infinity();
}

std::string JumpSizeDist::describe() const {
  std::ostringstream os;
  os << (family == Family::normal ? "normal(" : "cauchy(") << location << "," << scale << ")";
  return os.str();
}

void validate_jump(const JumpSpec& jump) {
  std::visit(Overloaded{
                 [](const NoJumps&) {},
                 [](const CompoundPoisson& cp) {
                   if (!(cp.lambda >= 0.0) || !std::isfinite(cp.lambda)) {
                     throw ValidationError("compound Poisson intensity must be >= 0");
                   }
                   if (!(cp.size.scale > 0.0) || !std::isfinite(cp.size.location)) {
                     throw ValidationError("jump size scale must be > 0");
                   }
                 },
                 [](const VarianceGamma& vg) {
                   if (!(vg.b > 0.0)) throw ValidationError("variance gamma b must be > 0");
                   if (!(vg.eta >= 0.0)) throw ValidationError("variance gamma eta must be >= 0");
                   if (!std::isfinite(vg.c)) throw ValidationError("variance gamma c must be finite");
                 },
             },
             jump);
}

double jump_variance_rate(const JumpSpec& jump) {
  return std::visit(Overloaded{
                        [](const NoJumps&) { return 0.0; },
                        [](const CompoundPoisson& cp) { return cp.lambda * cp.size.second_moment(); },
                        [](const VarianceGamma& vg) { return vg.c * vg.c * vg.b + vg.eta * vg.eta; },
                    },
                    jump);
}

double jump_compensator(const JumpSpec& jump) {
  return std::visit(Overloaded{
                        [](const NoJumps&) { return 0.0; },
                        [](const CompoundPoisson& cp) { return cp.lambda * cp.size.mean().value_or(0.0); },
                        [](const VarianceGamma& vg) { return vg.c; },
                    },
                    jump);
}

std::string describe(const JumpSpec& jump) {
  return std::visit(Overloaded{
                        [](const NoJumps&) { return std::string("none"); },
                        [](const CompoundPoisson& cp) {
                          std::ostringstream os;
                          os << "cp(lambda=" << cp.lambda << ",size=" << cp.size.describe() << ")";
                          return os.str();
                        },
                        [](const VarianceGamma& vg) {
                          std::ostringstream os;
                          os << "vg(c=" << vg.c << ",eta=" << vg.eta << ",b=" << vg.b << ")";
                          return os.str();
                        },
                    },
                    jump);
}

ModelSpec ModelSpec::mean_reverting(JumpSpec jump) {
  ModelSpec spec;
  spec.mu = [](double x) { return -10.0 * x; };
  spec.sigma = [](double x) { return std::sqrt(0.1 + 0.1 * x * x); };
  spec.jump = std::move(jump);
  spec.name = "default";
  return spec;
}

double ModelSpec::second_moment(double x) const {
  const double s = sigma(x);
  return s * s + jump_variance_rate(jump);
}

void PathConfig::validate() const {
  if (n < 2) throw ValidationError("path needs n >= 2 observations");
  if (substeps < 1) throw ValidationError("substeps must be >= 1");
  if (!(t_span > 0.0) || !std::isfinite(t_span)) throw ValidationError("time span must be > 0");
}

double sample_cp_increment(const CompoundPoisson& cp, double dt, RandomStream& rng) {
  const std::uint64_t arrivals = rng.poisson(cp.lambda * dt);
  double sum = 0.0;
  for (std::uint64_t k = 0; k < arrivals; ++k) sum += cp.size.draw(rng);
  return sum;
}

double sample_vg_increment(const VarianceGamma& vg, double dt, RandomStream& rng) {
  const double dg = rng.gamma(dt / vg.b, vg.b);
  return vg.c * dg + vg.eta * std::sqrt(dg) * rng.normal();
}

double sample_jump_increment(const JumpSpec& jump, double dt, RandomStream& rng) {
  return std::visit(Overloaded{
                        [](const NoJumps&) { return 0.0; },
                        [&](const CompoundPoisson& cp) { return sample_cp_increment(cp, dt, rng); },
                        [&](const VarianceGamma& vg) { return sample_vg_increment(vg, dt, rng); },
                    },
                    jump);
}

SamplePath simulate_path(const ModelSpec& spec, const PathConfig& cfg) {
  cfg.validate();
  validate_jump(spec.jump);
  if (!spec.mu || !spec.sigma) throw ValidationError("model needs drift and diffusion functions");

  RandomStream rng(cfg.seed);
  const double delta = cfg.delta();
  const double dt = delta / static_cast<double>(cfg.substeps);
  const double sqrt_dt = std::sqrt(dt);
  const double compensator = jump_compensator(spec.jump);
  const bool has_jumps = !std::holds_alternative<NoJumps>(spec.jump);
  const std::size_t retained = cfg.n + 2;

  SamplePath path;
  path.delta = delta;
  path.seed = cfg.seed;
  path.substeps = cfg.substeps;
  path.x.reserve(retained);
  path.y.reserve(retained);

  double x = spec.x0;
  double y = spec.y0;
  std::size_t step = 0;

  auto advance = [&](bool record_qv) {
    for (std::size_t s = 0; s < cfg.substeps; ++s, ++step) {
      const double sig = spec.sigma(x);
      double jump = 0.0;
      if (has_jumps) {
        jump = sample_jump_increment(spec.jump, dt, rng);
        if (record_qv) path.jump_qv += jump * jump;
        jump -= compensator * dt;
      }
      y += x * dt;
      x += spec.mu(x) * dt + sig * sqrt_dt * rng.normal() + jump;
      if (!std::isfinite(x) || std::abs(x) > kExplosionBound) throw PathExplosion(step, x);
    }
  };

  for (std::size_t i = 0; i < cfg.burn_in; ++i) advance(false);
  y = spec.y0;
  path.x.push_back(x);
  path.y.push_back(y);
  for (std::size_t i = 1; i < retained; ++i) {
    advance(true);
    path.x.push_back(x);
    path.y.push_back(y);
  }
  return path;
}

}  // namespace jdsmooth
