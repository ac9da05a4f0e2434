#include "sglab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "network_simplex.hpp"
#include "sglab/errors.hpp"

namespace sglab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kOverRelaxation = 1.8;

double wrap_delta(double d) {
  d -= std::floor(d);
  return d >= 0.5 ? d - 1.0 : d;
}

void require_same_grid(const DensityOnTorus& a, const DensityOnTorus& b) {
  if (!(a.grid == b.grid) || a.weights.size() != b.weights.size()) {
    throw ShapeError("densities live on different grids (" + std::to_string(a.grid.n()) +
                     " vs " + std::to_string(b.grid.n()) + ")");
  }
}

// Log-domain separable soft-min on an n x n torus grid:
// out_i = -reg log sum_j exp(L(i1-j1) + L(i2-j2) + h_j), L(d) = -dist(d)^2 / reg.
class SoftMin {
 public:
  SoftMin(int n, double reg) : n_(n), reg_(reg), kernel_(n), tmp_(n * n), row_max_(n) {
    const double h = 1.0 / n;
    for (int d = 0; d < n; ++d) {
      const double s = std::min(d, n - d) * h;
      kernel_[d] = -s * s / reg;
    }
  }

  void apply(const std::vector<double>& hlog, std::vector<double>& out) {
    pass(hlog.data(), tmp_.data(), false);
    pass(tmp_.data(), out.data(), true);
    for (auto& v : out) v *= -reg_;
  }

 private:
  // Offsets whose kernel value falls 60 below the spread of the input cannot
  // change a double-precision sum. Inputs with empty cells keep every offset.
  int window(const double* in) const {
    double lo = INFINITY, hi = kNegInf;
    for (int k = 0; k < n_ * n_; ++k) {
      if (in[k] == kNegInf) return n_ / 2;
      lo = std::min(lo, in[k]);
      hi = std::max(hi, in[k]);
    }
    const double cut = -(hi - lo) - 60.0;
    int w = n_ / 2;
    while (w > 0 && kernel_[w] < cut) --w;
    return w;
  }

  // transpose_out=false: reduce along the inner index, out[j1][i2].
  // transpose_out=true: reduce along the outer index, out[i1][i2].
  void pass(const double* in, double* out, bool outer) {
    const int n = n_;
    const int w = window(in);
    if (!outer) {
      for (int r = 0; r < n; ++r) {
        const double* row = in + static_cast<std::size_t>(r) * n;
        for (int i = 0; i < n; ++i) {
          double m = kNegInf;
          for (int d = -w; d <= w; ++d) {
            if (2 * w == n && d == w) break;
            const int j = (i + d + n) % n;
            m = std::max(m, kernel_[(d + n) % n] + row[j]);
          }
          double s = 0.0;
          if (m != kNegInf) {
            for (int d = -w; d <= w; ++d) {
              if (2 * w == n && d == w) break;
              const int j = (i + d + n) % n;
              s += std::exp(kernel_[(d + n) % n] + row[j] - m);
            }
          }
          out[static_cast<std::size_t>(r) * n + i] = m == kNegInf ? kNegInf : m + std::log(s);
        }
      }
      return;
    }
    for (int i = 0; i < n; ++i) {
      std::fill(row_max_.begin(), row_max_.end(), kNegInf);
      double* dst = out + static_cast<std::size_t>(i) * n;
      for (int d = -w; d <= w; ++d) {
        if (2 * w == n && d == w) break;
        const double kv = kernel_[(d + n) % n];
        const double* src = in + static_cast<std::size_t>((i + d + n) % n) * n;
        for (int c = 0; c < n; ++c) row_max_[c] = std::max(row_max_[c], kv + src[c]);
      }
      std::fill(dst, dst + n, 0.0);
      for (int d = -w; d <= w; ++d) {
        if (2 * w == n && d == w) break;
        const double kv = kernel_[(d + n) % n];
        const double* src = in + static_cast<std::size_t>((i + d + n) % n) * n;
        for (int c = 0; c < n; ++c) {
          if (row_max_[c] != kNegInf) dst[c] += std::exp(kv + src[c] - row_max_[c]);
        }
      }
      for (int c = 0; c < n; ++c) {
        dst[c] = row_max_[c] == kNegInf ? kNegInf : row_max_[c] + std::log(dst[c]);
      }
    }
  }

  int n_;
  double reg_;
  std::vector<double> kernel_;
  std::vector<double> tmp_;
  std::vector<double> row_max_;
};

std::vector<double> log_weights(const std::vector<double>& w) {
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] > 0.0 ? std::log(w[k]) : kNegInf;
  return out;
}

// sum w |exp((p - p_new)/reg) - 1|: L1 marginal violation of the plan built
// from p before it is replaced by p_new.
double marginal_violation(const std::vector<double>& w, const std::vector<double>& p,
                          const std::vector<double>& p_new, double reg) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) s += w[k] * std::abs(std::expm1((p[k] - p_new[k]) / reg));
  }
  return s;
}

struct EntropicSolve {
  double value = 0.0;
  int iterations = 0;
  double marginal_error = 0.0;
};

std::vector<double> reg_schedule(double reg) {
  std::vector<double> out;
  for (double r = 0.5; r > reg; r *= 0.5) out.push_back(r);
  out.push_back(reg);
  return out;
}

// Regularized OT_reg(a, b) by alternating log-domain updates, annealing reg
// down from the squared diameter so that each stage starts near its optimum.
// The final stage is over-relaxed; the weight falls back to 1 if the
// violation blows up.
EntropicSolve entropic_ot(int n, const std::vector<double>& a, const std::vector<double>& b,
                          const SinkhornOptions& opt) {
  const std::size_t size = a.size();
  const auto la = log_weights(a);
  const auto lb = log_weights(b);
  std::vector<double> f(size, 0.0), g(size, 0.0), fn(size), gn(size), hl(size);
  EntropicSolve out;

  auto half_step = [&](SoftMin& sm, const std::vector<double>& pot,
                       const std::vector<double>& lw, double reg, std::vector<double>& res) {
    for (std::size_t k = 0; k < size; ++k) hl[k] = pot[k] / reg + lw[k];
    sm.apply(hl, res);
  };
  auto relax = [&](std::vector<double>& p, const std::vector<double>& pn, double omega) {
    for (std::size_t k = 0; k < size; ++k) p[k] = (1.0 - omega) * p[k] + omega * pn[k];
  };

  const auto schedule = reg_schedule(opt.reg);
  double err = INFINITY;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const double reg = schedule[stage];
    const bool last = stage + 1 == schedule.size();
    const double stage_tol = last ? opt.tol : 1e-3;
    const int stage_cap = last ? opt.max_iter : 200;
    double omega = last ? kOverRelaxation : 1.0;
    double best = INFINITY;
    SoftMin sm(n, reg);
    half_step(sm, g, lb, reg, f);
    for (int it = 0; it < stage_cap && out.iterations < opt.max_iter; ++it) {
      half_step(sm, f, la, reg, gn);
      const double col = marginal_violation(b, g, gn, reg);
      relax(g, gn, omega);
      half_step(sm, g, lb, reg, fn);
      const double row = marginal_violation(a, f, fn, reg);
      relax(f, fn, omega);
      ++out.iterations;
      err = std::max(col, row);
      if (err <= stage_tol) break;
      best = std::min(best, err);
      if (!std::isfinite(err) || err > 10.0 * best) omega = 1.0;
    }
  }
  // with f = T_b(g) the dual objective is <a,f> + <b,g>; the reported error is
  // the column violation of this final pair
  SoftMin sm(n, opt.reg);
  half_step(sm, g, lb, opt.reg, f);
  half_step(sm, f, la, opt.reg, gn);
  out.marginal_error = marginal_violation(b, g, gn, opt.reg);
  if (out.marginal_error > opt.tol) throw ConvergenceError(out.iterations, out.marginal_error);
  for (std::size_t k = 0; k < size; ++k) {
    if (a[k] > 0.0) out.value += a[k] * f[k];
    if (b[k] > 0.0) out.value += b[k] * g[k];
  }
  return out;
}

// OT_reg(a, a) through the symmetric fixed point f = T_a(f), iterated as
// f <- (f + T_a(f)) / 2. Alternating updates stall here once reg << h^2,
// because T_a is then close to -identity.
EntropicSolve entropic_ot_symmetric(int n, const std::vector<double>& a,
                                    const SinkhornOptions& opt) {
  const std::size_t size = a.size();
  const auto la = log_weights(a);
  std::vector<double> f(size, 0.0), fn(size), hl(size);
  EntropicSolve out;
  auto apply = [&](SoftMin& sm, double reg) {
    for (std::size_t k = 0; k < size; ++k) hl[k] = f[k] / reg + la[k];
    sm.apply(hl, fn);
  };
  const auto schedule = reg_schedule(opt.reg);
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const double reg = schedule[stage];
    const bool last = stage + 1 == schedule.size();
    const double stage_tol = last ? opt.tol : 1e-3;
    const int stage_cap = last ? opt.max_iter : 200;
    SoftMin sm(n, reg);
    for (int it = 0; it < stage_cap && out.iterations < opt.max_iter; ++it) {
      apply(sm, reg);
      ++out.iterations;
      const double err = marginal_violation(a, f, fn, reg);
      for (std::size_t k = 0; k < size; ++k) f[k] = 0.5 * (f[k] + fn[k]);
      if (err <= stage_tol) break;
    }
  }
  SoftMin sm(n, opt.reg);
  apply(sm, opt.reg);
  out.marginal_error = marginal_violation(a, f, fn, opt.reg);
  if (out.marginal_error > opt.tol) throw ConvergenceError(out.iterations, out.marginal_error);
  // full dual objective: 2<a,f> - reg (mass of the plan - 1)
  for (std::size_t k = 0; k < size; ++k) {
    if (a[k] > 0.0) out.value += a[k] * (2.0 * f[k] - opt.reg * std::expm1((f[k] - fn[k]) / opt.reg));
  }
  return out;
}

}  // namespace

DensityOnTorus make_density(TorusGrid grid, std::vector<double> weights) {
  if (weights.size() != grid.size()) throw ShapeError("density weights do not match the grid");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw PreconditionError("density has a negative or NaN weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw PreconditionError("density weights sum to " + std::to_string(sum) + ", not 1");
  }
  return {grid, std::move(weights)};
}

DensityOnTorus physical_density(const ScalarField& rho, double eps) {
  const auto v = rho.values();
  std::vector<double> w(v.size());
  double sum = 0.0, lo = INFINITY;
  for (std::size_t k = 0; k < v.size(); ++k) {
    w[k] = 1.0 + eps * v[k];
    lo = std::min(lo, w[k]);
    sum += w[k];
  }
  if (lo < 0.0) {
    throw PreconditionError("physical density 1 + eps rho has negative minimum " +
                            std::to_string(lo));
  }
  for (auto& x : w) x /= sum;
  return {rho.grid(), std::move(w)};
}

DensityOnTorus downsample(const DensityOnTorus& d, int target_n) {
  const int n = d.grid.n();
  if (target_n == n) return d;
  if (target_n > n || n % target_n != 0) {
    throw ShapeError("cannot downsample " + std::to_string(n) + "^2 to " +
                     std::to_string(target_n) + "^2");
  }
  const TorusGrid coarse(target_n);
  const int r = n / target_n;
  std::vector<double> w(coarse.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      w[static_cast<std::size_t>(i / r) * target_n + j / r] +=
          d.weights[static_cast<std::size_t>(i) * n + j];
    }
  }
  return {coarse, std::move(w)};
}

double torus_sq_dist(double x0, double y0, double x1, double y1) {
  const double dx = wrap_delta(x1 - x0);
  const double dy = wrap_delta(y1 - y0);
  return dx * dx + dy * dy;
}

CostMatrix torus_cost(const TorusGrid& a, const TorusGrid& b) {
  const double entries = static_cast<double>(a.size()) * static_cast<double>(b.size());
  if (entries > static_cast<double>(1 << 26)) {
    throw ResourceError("cost matrix with " + std::to_string(entries) +
                        " entries exceeds 2^26");
  }
  CostMatrix cm;
  cm.rows = static_cast<int>(a.size());
  cm.cols = static_cast<int>(b.size());
  cm.c.resize(a.size() * b.size());
  const int na = a.n(), nb = b.n();
  std::size_t k = 0;
  for (int i = 0; i < cm.rows; ++i) {
    const double x0 = a.coord(i / na), y0 = a.coord(i % na);
    for (int j = 0; j < cm.cols; ++j) {
      cm.c[k++] = torus_sq_dist(x0, y0, b.coord(j / nb), b.coord(j % nb));
    }
  }
  return cm;
}

std::string to_string(OTMethod m) { return m == OTMethod::Sinkhorn ? "sinkhorn" : "exact"; }

OTResult w2_sinkhorn(const DensityOnTorus& a_in, const DensityOnTorus& b_in,
                     const SinkhornOptions& options) {
  if (!(options.reg > 0.0)) throw PreconditionError("Sinkhorn needs reg > 0");
  require_same_grid(a_in, b_in);
  const int target = std::min(a_in.grid.n(), options.max_grid);
  const auto a = downsample(a_in, target);
  const auto b = downsample(b_in, target);
  const int n = a.grid.n();

  const auto aa = entropic_ot_symmetric(n, a.weights, options);
  const auto bb = entropic_ot_symmetric(n, b.weights, options);
  // identical marginals take the symmetric route, so the divergence is 0
  const auto ab = a.weights == b.weights ? aa : entropic_ot(n, a.weights, b.weights, options);
  const double s = ab.value - 0.5 * aa.value - 0.5 * bb.value;

  OTResult r;
  r.method = OTMethod::Sinkhorn;
  r.reg = options.reg;
  r.distance = std::sqrt(std::max(s, 0.0));
  r.iterations = ab.iterations + aa.iterations + bb.iterations;
  r.marginal_error = std::max({ab.marginal_error, aa.marginal_error, bb.marginal_error});
  return r;
}

ExactOT w2_exact_small(const DensityOnTorus& a, const DensityOnTorus& b) {
  require_same_grid(a, b);
  if (a.grid.n() > kExactMaxGrid) {
    throw ResourceError("exact OT limited to " + std::to_string(kExactMaxGrid) + "^2 grids, got " +
                        std::to_string(a.grid.n()) + "^2");
  }
  std::vector<int> src, dst;
  std::vector<double> supply, demand;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    if (a.weights[k] > 0.0) {
      src.push_back(static_cast<int>(k));
      supply.push_back(a.weights[k]);
    }
    if (b.weights[k] > 0.0) {
      dst.push_back(static_cast<int>(k));
      demand.push_back(b.weights[k]);
    }
  }
  // the two masses agree to 1e-12; put the rounding on the largest demand
  const double gap = std::accumulate(supply.begin(), supply.end(), 0.0) -
                     std::accumulate(demand.begin(), demand.end(), 0.0);
  *std::max_element(demand.begin(), demand.end()) += gap;

  const int n = a.grid.n();
  std::vector<double> cost(supply.size() * demand.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < dst.size(); ++j) {
      cost[i * dst.size() + j] = torus_sq_dist(a.grid.coord(src[i] / n), a.grid.coord(src[i] % n),
                                               b.grid.coord(dst[j] / n), b.grid.coord(dst[j] % n));
    }
  }
  const auto sol = detail::solve_transport(supply, demand, cost);
  ExactOT out;
  out.result.method = OTMethod::Exact;
  out.result.distance = std::sqrt(std::max(sol.cost, 0.0));
  out.result.iterations = static_cast<int>(sol.pivots);
  out.plan.reserve(sol.flows.size());
  std::vector<double> row(supply.size(), 0.0), col(demand.size(), 0.0);
  for (const auto& fl : sol.flows) {
    out.plan.push_back({src[fl.source], dst[fl.sink], fl.mass});
    row[fl.source] += fl.mass;
    col[fl.sink] += fl.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) err += std::abs(row[i] - supply[i]);
  for (std::size_t j = 0; j < col.size(); ++j) err += std::abs(col[j] - demand[j]);
  out.result.marginal_error = err;
  return out;
}

DensityOnTorus displacement_interpolation(const DensityOnTorus& a, const DensityOnTorus& b,
                                          double theta) {
  if (!(theta >= 1.0 && theta <= 2.0)) {
    throw PreconditionError("interpolation parameter must lie in [1, 2]");
  }
  const auto ot = w2_exact_small(a, b);
  const int n = a.grid.n();
  const double s = theta - 1.0;
  std::vector<double> w(a.grid.size(), 0.0);
  for (const auto& e : ot.plan) {
    const double x0 = a.grid.coord(e.source / n), y0 = a.grid.coord(e.source % n);
    const double x1 = a.grid.coord(e.target / n), y1 = a.grid.coord(e.target % n);
    const double gx = (x0 + s * wrap_delta(x1 - x0)) * n;
    const double gy = (y0 + s * wrap_delta(y1 - y0)) * n;
    const double fx = std::floor(gx), fy = std::floor(gy);
    const double tx = gx - fx, ty = gy - fy;
    const int i0 = ((static_cast<int>(fx) % n) + n) % n;
    const int j0 = ((static_cast<int>(fy) % n) + n) % n;
    const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
    w[static_cast<std::size_t>(i0) * n + j0] += e.mass * (1 - tx) * (1 - ty);
    w[static_cast<std::size_t>(i1) * n + j0] += e.mass * tx * (1 - ty);
    w[static_cast<std::size_t>(i0) * n + j1] += e.mass * (1 - tx) * ty;
    w[static_cast<std::size_t>(i1) * n + j1] += e.mass * tx * ty;
  }
  return {a.grid, std::move(w)};
}

double weighted_velocity_gap_sq(const SimState& sg, const SimState& euler) {
  if (!(sg.rho.grid() == euler.rho.grid())) throw ShapeError("states live on different grids");
  const auto u = perp_gradient(sg.potential);
  const auto ubar = perp_gradient(euler.potential);
  const auto ux = u.x.values(), uy = u.y.values();
  const auto vx = ubar.x.values(), vy = ubar.y.values();
  const auto r = sg.rho.values();
  const double eps = sg.model == Model::SGeps ? sg.eps : 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double dx = ux[k] - vx[k], dy = uy[k] - vy[k];
    s += (dx * dx + dy * dy) * (1.0 + eps * r[k]);
  }
  return s / static_cast<double>(r.size());
}

std::vector<GronwallPoint> gronwall_w2_bound(const Trajectory& sg, const Trajectory& euler) {
  const auto& ss = sg.states;
  const auto& es = euler.states;
  if (ss.size() != es.size() || ss.empty()) {
    throw AlignmentError("trajectories have " + std::to_string(ss.size()) + " and " +
                         std::to_string(es.size()) + " samples");
  }
  for (std::size_t k = 0; k < ss.size(); ++k) {
    if (std::abs(ss[k].time - es[k].time) > 1e-12 * std::max(1.0, std::abs(es[k].time))) {
      throw AlignmentError("sample " + std::to_string(k) + " at t = " +
                           std::to_string(ss[k].time) + " vs " + std::to_string(es[k].time));
    }
  }
  {
    const auto r0 = ss.front().rho.values();
    const auto e0 = es.front().rho.values();
    if (r0.size() != e0.size()) throw AlignmentError("initial densities on different grids");
    for (std::size_t k = 0; k < r0.size(); ++k) {
      if (r0[k] != e0[k]) throw AlignmentError("trajectories start from different densities");
    }
  }
  std::vector<GronwallPoint> out(ss.size());
  std::vector<double> rate(ss.size());
  for (std::size_t k = 0; k < ss.size(); ++k) {
    out[k].t = ss[k].time;
    out[k].integrand = weighted_velocity_gap_sq(ss[k], es[k]);
    rate[k] = 1.0 + 2.0 * hessian_linf(hessian(es[k].potential));
    if (k > 0) {
      out[k].a_t = out[k - 1].a_t + 0.5 * (out[k].t - out[k - 1].t) * (rate[k] + rate[k - 1]);
    }
  }
  for (std::size_t k = 1; k < ss.size(); ++k) {
    double b = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double dt = out[l + 1].t - out[l].t;
      b += 0.5 * dt *
           (std::exp(out[k].a_t - out[l].a_t) * out[l].integrand +
            std::exp(out[k].a_t - out[l + 1].a_t) * out[l + 1].integrand);
    }
    out[k].bound = b;
  }
  return out;
}

}  // namespace sglab
