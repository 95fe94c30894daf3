#include <cmath>
#include <map>

#include "jetgeom/errors.hpp"
#include "jetgeom/normalization.hpp"

namespace jetgeom {

namespace {

using State = std::vector<double>;

struct Flow {
  const PairFields& pair;
  const Expr& f;

  double eval(const Expr& e, const State& y) const {
    return evaluate_scalar<double>(e, [&](const std::string& name) {
      for (std::size_t i = 0; i < pair.vars.size(); ++i)
        if (pair.vars[i] == name) return y[i];
      throw EvaluationError(EvaluationError::Kind::unbound_variable, "unbound variable '" + name + "'");
    });
  }
  double scale(const State& y) const { return eval(f, y); }

  // d/ds of (x, tau) along fX
  State rhs(const State& y) const {
    const double fy = scale(y);
    State d(y.size());
    for (std::size_t i = 0; i < pair.X.size(); ++i) d[i] = fy * eval(*pair.X[i], y);
    d.back() = fy;
    return d;
  }

  State step(const State& y, double h) const {
    auto axpy = [](const State& a, const State& b, double c) {
      State r(a);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * b[i];
      return r;
    };
    State k1 = rhs(y), k2 = rhs(axpy(y, k1, h / 2)), k3 = rhs(axpy(y, k2, h / 2)), k4 = rhs(axpy(y, k3, h));
    State r(y);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return r;
  }
};

}  // namespace

SchwarzianCheck schwarzian_trajectory_check(const PairFields& pair, const Point& point, const ExprPtr& f, int samples,
                                            double ds, double tolerance) {
  if (samples < 1) throw SpecError("schwarzian check needs at least one sample");
  Flow flow{pair, *f};
  // grid of spacing dt; the stencil half-width is 2h with h = stride * dt
  const double dt = 2.5e-4;
  const int stride = 10, per_sample = static_cast<int>(std::lround(ds / dt));
  if (per_sample < 1) throw SpecError("sample spacing below the integration step");
  const double h = stride * dt;
  const int first = -2 * stride, last = (samples - 1) * per_sample + 2 * stride;

  std::map<int, State> grid;
  State y0 = convert_point<double>(point);
  y0.push_back(0.0);
  grid[0] = y0;
  for (int i = 1; i <= last; ++i) grid[i] = flow.step(grid[i - 1], dt);
  for (int i = -1; i >= first; --i) grid[i] = flow.step(grid[i + 1], -dt);

  SchwarzianCheck out;
  out.tolerance = tolerance;
  for (int sidx = 0; sidx < samples; ++sidx) {
    const int c = sidx * per_sample;
    auto g = [&](int off) { return flow.scale(grid.at(c + off * stride)); };
    const double g0 = g(0), gp1 = g(1), gm1 = g(-1), gp2 = g(2), gm2 = g(-2);
    const double d1 = (-gp2 + 8 * gp1 - 8 * gm1 + gm2) / (12 * h);
    const double d2 = (-gp2 + 16 * gp1 - 30 * g0 + 16 * gm1 - gm2) / (12 * h * h);
    if (g0 == 0) throw NotInvertible("f vanishes on the trajectory");
    SchwarzianSample smp;
    smp.s = c * dt;
    smp.tau = grid.at(c).back();
    smp.from_flow = 2 * d2 / g0 - 3 * (d1 / g0) * (d1 / g0);

    Point p;
    for (std::size_t i = 0; i + 1 < grid.at(c).size(); ++i) p.emplace_back(grid.at(c)[i]);
    RealizedPair<double> rp = realize<double>(pair, p, 3);
    Jet<double> fj = evaluate_jet<double>(*f, rp.chart, rp.point, 3);
    smp.from_jets = schwarzian(rp.X, fj).constant_term();
    const double scale = std::max({std::fabs(smp.from_jets), std::fabs(smp.from_flow), 1e-8});
    smp.rel_error = std::fabs(smp.from_jets - smp.from_flow) / scale;
    out.max_rel_error = std::max(out.max_rel_error, smp.rel_error);
    out.samples.push_back(smp);
  }
  out.ok = out.max_rel_error <= tolerance;
  return out;
}

}  // namespace jetgeom
