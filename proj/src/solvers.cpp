#include "hlamkit/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "hlamkit/errors.hpp"

namespace hlamkit {

namespace {

constexpr double kBreakdownFloor = 1e-300;

using Slot = Engine::Slot;
using Coef = Engine::Coef;

Coef neg_ratio(Engine& eng, Slot num, Slot den) {
  return {[&eng, num, den] { return -eng.get(num) / eng.get(den); },
          {num, den}};
}

Coef neg_value(Engine& eng, Slot s) {
  return {[&eng, s] { return -eng.get(s); }, {s}};
}

void check_diagonal(const LocalSystem& sys) {
  for (std::int64_t i = 0; i < sys.local_nrows; ++i)
    if (sys.matrix.values[sys.matrix.diag_pos[i]] == 0.0)
      throw SetupError("zero diagonal entry");
}

struct Harness {
  Engine& eng;
  const LocalSystem& sys;
  const SolverConfig& cfg;
  RankResult out;
  double eff_epsilon = 0.0;
  std::chrono::steady_clock::time_point loop_t0;

  explicit Harness(Engine& e, const LocalSystem& s, const SolverConfig& c)
      : eng(e), sys(s), cfg(c) {
    if (c.epsilon <= 0 || c.restart_epsilon <= 0)
      throw SetupError("tolerances must be positive");
    if (c.max_iterations < 1) throw SetupError("max_iterations must be >= 1");
    if (c.capture_iterates)
      out.iterates_own.resize(static_cast<std::size_t>(c.max_iterations) + 1);
  }

  // First tested residual fixes the effective tolerance (optional relative
  // mode); returns true when already converged.
  bool first_residual(double v) {
    out.report.residual_history.push_back(v);
    eff_epsilon =
        cfg.relative_tolerance ? cfg.epsilon * v : cfg.epsilon;
    return v < eff_epsilon;
  }

  bool tested(double v) {
    out.report.residual_history.push_back(v);
    return v < eff_epsilon;
  }

  void seed_initial_guess(BufferId x) {
    if (!cfg.initial_guess) return;
    const auto& g = *cfg.initial_guess;
    auto xs = eng.values(x);
    for (std::int64_t i = 0; i < sys.local_nrows; ++i)
      xs[i] = g[static_cast<std::size_t>(sys.row_begin + i)];
  }

  void capture(BufferId x, int iter) {
    if (!cfg.capture_iterates) return;
    eng.snapshot(x, &out.iterates_own[static_cast<std::size_t>(iter)], iter);
  }

  void start_clock() {
    eng.drain();
    loop_t0 = std::chrono::steady_clock::now();
  }

  void finish(BufferId x, bool converged, int iterations,
              int partial_final = 0) {
    eng.drain();
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      loop_t0)
            .count();
    out.report.converged = converged;
    out.report.iterations = iterations;
    out.report.full_iterations = iterations - partial_final;
    auto xs = eng.values(x);
    out.x_own.assign(xs.begin(), xs.begin() + sys.local_nrows);
    if (cfg.capture_iterates)
      out.iterates_own.resize(static_cast<std::size_t>(iterations) + 1);
    out.report.per_iteration_accesses = eng.iteration_access_counts();
  }
};

// ---------------------------------------------------------------------------

RankResult solve_cg(Engine& eng, const LocalSystem& sys,
                    const SolverConfig& cfg) {
  Harness h(eng, sys, cfg);
  const BufferId x = eng.new_vector("x", true);
  const BufferId p = eng.new_vector("p", true);
  const BufferId r = eng.new_vector("r");
  const BufferId ap = eng.new_vector("ap");
  h.seed_initial_guess(x);

  eng.exchange(x, 0);
  Slot beta_local = eng.residual(x, r, 0);
  Slot an_prev = eng.allreduce({beta_local}, CollectiveMode::Blocking, 0)[0];
  eng.axpby(eng.constant(1.0), r, eng.constant(0.0), r, p, 0);
  h.capture(x, 0);
  h.start_clock();

  bool converged = false;
  int iters = 0;
  while (true) {
    const double v = std::sqrt(eng.await(an_prev));
    if (iters == 0 ? h.first_residual(v) : h.tested(v)) {
      converged = true;
      break;
    }
    if (iters == cfg.max_iterations) break;
    const int t = ++iters;

    eng.exchange(p, t);
    eng.spmv(p, ap, t);
    Slot ad = eng.allreduce({eng.dot(ap, p, t)}, CollectiveMode::Blocking, t)[0];
    eng.axpby(eng.ratio(an_prev, ad), p, eng.constant(1.0), x, x, t);
    eng.axpby(neg_ratio(eng, an_prev, ad), ap, eng.constant(1.0), r, r, t);
    Slot an = eng.allreduce({eng.dot(r, r, t)}, CollectiveMode::Blocking, t)[0];
    eng.axpby(eng.constant(1.0), r, eng.ratio(an, an_prev), p, p, t);
    h.capture(x, t);
    an_prev = an;
  }
  h.finish(x, converged, iters);
  return std::move(h.out);
}

// Nonblocking variant: A*p maintained as an update of A*r so both reductions
// become overlappable; the solution update trails by one step and the loop
// exit completes it.
RankResult solve_cg_nb(Engine& eng, const LocalSystem& sys,
                       const SolverConfig& cfg) {
  Harness h(eng, sys, cfg);
  const BufferId x = eng.new_vector("x", true);
  const BufferId r = eng.new_vector("r", true);
  const BufferId p = eng.new_vector("p");
  const BufferId ap = eng.new_vector("ap");
  const BufferId ar = eng.new_vector("ar");
  h.seed_initial_guess(x);

  eng.exchange(x, 0);
  Slot beta_local = eng.residual(x, r, 0);
  eng.axpby(eng.constant(1.0), r, eng.constant(0.0), r, p, 0);
  eng.exchange(r, 0);
  eng.spmv(r, ap, 0);  // A p_0 == A r_0
  Slot ad_local = eng.dot(ap, p, 0);
  auto init = eng.allreduce({beta_local, ad_local}, CollectiveMode::Blocking, 0);
  Slot an_prev = init[0];
  Slot ad_prev = init[1];
  h.capture(x, 0);
  h.start_clock();

  bool converged = false;
  int iters = 0;
  while (true) {
    const double v = std::sqrt(eng.await(an_prev));
    if (iters == 0 ? h.first_residual(v) : h.tested(v)) {
      converged = true;
      break;
    }
    if (iters == cfg.max_iterations) break;
    const int t = ++iters;

    // r_j = r_{j-1} - alpha_{j-1} A p_{j-1}
    eng.axpby(neg_ratio(eng, an_prev, ad_prev), ap, eng.constant(1.0), r, r, t);
    Slot an =
        eng.allreduce({eng.dot(r, r, t)}, CollectiveMode::Overlapped, t)[0];
    eng.exchange(r, t);
    eng.spmv(r, ar, t);
    // A p_j = A r_j + (an_j/an_{j-1}) A p_{j-1}; p_j = r_j + (...) p_{j-1}
    eng.axpby(eng.constant(1.0), ar, eng.ratio(an, an_prev), ap, ap, t);
    eng.axpby(eng.constant(1.0), r, eng.ratio(an, an_prev), p, p, t);
    Slot ad =
        eng.allreduce({eng.dot(ap, p, t)}, CollectiveMode::Overlapped, t)[0];
    // x_j = x_{j-1} + (an_{j-1}^2 / (ad_{j-1} an_j)) (p_j - r_j)
    Coef c{[&eng, an_prev, ad_prev, an] {
             const double a = eng.get(an_prev);
             return a * a / (eng.get(ad_prev) * eng.get(an));
           },
           {an_prev, ad_prev, an}};
    Coef neg_c{[&eng, an_prev, ad_prev, an] {
                 const double a = eng.get(an_prev);
                 return -a * a / (eng.get(ad_prev) * eng.get(an));
               },
               {an_prev, ad_prev, an}};
    eng.triad(c, p, neg_c, r, eng.constant(1.0), x, t);
    h.capture(x, t);
    an_prev = an;
    ad_prev = ad;
  }
  // x = x_l + alpha_l p_l completes the trailing update.
  if (iters >= 1 && eng.await(an_prev) > 0.0)
    eng.axpby(eng.ratio(an_prev, ad_prev), p, eng.constant(1.0), x, x, iters);
  h.finish(x, converged, iters);
  return std::move(h.out);
}

// ---------------------------------------------------------------------------

RankResult solve_bicgstab(Engine& eng, const LocalSystem& sys,
                          const SolverConfig& cfg) {
  Harness h(eng, sys, cfg);
  const BufferId x = eng.new_vector("x", true);
  const BufferId r = eng.new_vector("r");
  const BufferId shadow = eng.new_vector("shadow");
  const BufferId p = eng.new_vector("p", true);
  const BufferId s = eng.new_vector("s", true);
  const BufferId ap = eng.new_vector("ap");
  const BufferId as = eng.new_vector("as");
  h.seed_initial_guess(x);

  eng.exchange(x, 0);
  Slot beta_local = eng.residual(x, r, 0);
  Slot beta_prev = eng.allreduce({beta_local}, CollectiveMode::Blocking, 0)[0];
  eng.axpby(eng.constant(1.0), r, eng.constant(0.0), r, shadow, 0);
  eng.axpby(eng.constant(1.0), r, eng.constant(0.0), r, p, 0);
  Slot an_prev = beta_prev;  // r0 . r' == r0 . r0
  h.capture(x, 0);
  h.start_clock();

  bool converged = false;
  int iters = 0;
  int partial_final = 0;
  while (true) {
    const double v = std::sqrt(eng.await(beta_prev));
    if (iters == 0 ? h.first_residual(v) : h.tested(v)) {
      converged = true;
      break;
    }
    if (iters == cfg.max_iterations) break;
    const int t = ++iters;

    eng.exchange(p, t);
    eng.spmv(p, ap, t);
    Slot ad = eng.allreduce({eng.dot(ap, shadow, t)},
                            CollectiveMode::Blocking, t)[0];
    if (std::abs(eng.await(ad)) < kBreakdownFloor)
      throw BreakdownError("alpha denominator vanished");
    eng.axpby(eng.constant(1.0), r, neg_ratio(eng, an_prev, ad), ap, s, t);
    eng.exchange(s, t);
    eng.spmv(s, as, t);
    auto w = eng.dot3(as, s, as, as, s, s, t);
    auto wr = eng.allreduce({w[0], w[1], w[2]}, CollectiveMode::Blocking, t);
    const double snorm = std::sqrt(eng.await(wr[2]));
    if (snorm < h.eff_epsilon) {
      // ||s|| already below tolerance: x += alpha p and stop. This final
      // iteration skipped its third reduction.
      eng.axpby(eng.ratio(an_prev, ad), p, eng.constant(1.0), x, x, t);
      h.out.report.residual_history.push_back(snorm);
      converged = true;
      partial_final = 1;
      break;
    }
    const double wd = eng.await(wr[1]);
    if (std::abs(wd) < kBreakdownFloor)
      throw BreakdownError("omega denominator vanished");
    Coef omega = eng.ratio(wr[0], wr[1]);
    // x = x + alpha p + omega s
    eng.triad(eng.ratio(an_prev, ad), p, omega, s, eng.constant(1.0), x, t);
    eng.axpby(eng.constant(1.0), s, neg_ratio(eng, wr[0], wr[1]), as, r, t);
    auto nr = eng.dot2(r, shadow, r, r, t);
    auto nred = eng.allreduce({nr[0], nr[1]}, CollectiveMode::Blocking, t);
    Slot an = nred[0];
    Slot bnew = nred[1];
    // p = r + (an_{j+1} / (ad_j omega_j)) (p - omega_j A p)
    Coef pc{[&eng, an, ad, wr] {
              return eng.get(an) * eng.get(wr[1]) /
                     (eng.get(ad) * eng.get(wr[0]));
            },
            {an, ad, wr[0], wr[1]}};
    eng.triad(eng.constant(1.0), r, neg_ratio(eng, an, ad), ap, pc, p, t);
    h.capture(x, t);
    an_prev = an;
    beta_prev = bnew;
  }
  h.finish(x, converged, iters, partial_final);
  return std::move(h.out);
}

// ---------------------------------------------------------------------------

RankResult solve_bicgstab_b1(Engine& eng, const LocalSystem& sys,
                             const SolverConfig& cfg) {
  Harness h(eng, sys, cfg);
  const BufferId x = eng.new_vector("x", true);
  const BufferId r = eng.new_vector("r");
  const BufferId shadow = eng.new_vector("shadow");
  const BufferId p = eng.new_vector("p", true);
  const BufferId s = eng.new_vector("s", true);
  const BufferId ap = eng.new_vector("ap");
  const BufferId as = eng.new_vector("as");
  const BufferId phalf = eng.new_vector("phalf");
  h.seed_initial_guess(x);

  eng.exchange(x, 0);
  Slot beta_local = eng.residual(x, r, 0);
  Slot beta_prev = eng.allreduce({beta_local}, CollectiveMode::Blocking, 0)[0];
  const double beta0 = eng.await(beta_prev);
  bool converged = false;
  int iters = 0;
  if (h.first_residual(std::sqrt(beta0))) {
    converged = true;
    h.start_clock();
    h.finish(x, converged, 0);
    return std::move(h.out);
  }
  // r' = r0 / sqrt(beta0); alpha_n,0 = r0 . r' = sqrt(beta0)
  eng.axpby(eng.constant(1.0 / std::sqrt(beta0)), r, eng.constant(0.0), r,
            shadow, 0);
  eng.axpby(eng.constant(1.0), r, eng.constant(0.0), r, p, 0);
  Slot an_prev = eng.new_slot("an0");
  eng.put(an_prev, std::sqrt(beta0));
  h.capture(x, 0);
  h.start_clock();

  double tested_v = std::sqrt(beta0);
  while (true) {
    if (iters == cfg.max_iterations) break;
    const double beta_val = iters == 0 ? beta0 : eng.await(beta_prev);
    if (iters > 0) {
      tested_v = std::sqrt(beta_val);
      if (beta_val < kBreakdownFloor) {
        // Bit-exact zero residual: the previous iteration already finished
        // the solution update; entering the loop body would divide by zero.
        h.tested(tested_v);
        converged = true;
        break;
      }
    }
    const int t = iters + 1;  // trace/counter tag; algorithm step j = iters

    eng.exchange(p, t);
    eng.spmv(p, ap, t);
    Slot ad = eng.allreduce({eng.dot(ap, shadow, t)},
                            CollectiveMode::Blocking, t)[0];
    const double adv = eng.await(ad);
    if (std::abs(adv) < kBreakdownFloor)
      throw BreakdownError("alpha denominator vanished");
    // s = r - alpha A p
    eng.axpby(eng.constant(1.0), r, neg_ratio(eng, an_prev, ad), ap, s, t);
    eng.exchange(s, t);
    eng.spmv(s, as, t);
    auto w = eng.dot3(as, s, as, as, s, s, t);
    auto wred = eng.allreduce({w[0], w[1], w[2]}, CollectiveMode::Overlapped, t);
    // x_{j+1/2} = x + alpha p overlaps the omega reduction.
    eng.axpby(eng.ratio(an_prev, ad), p, eng.constant(1.0), x, x, t);

    const bool exit_now = iters > 0 ? h.tested(tested_v) : false;
    if (exit_now) {
      // Finish with x = x_{j+1/2} + omega_j s_j.
      const double wnv = eng.await(wred[0]);
      const double wdv = eng.await(wred[1]);
      const double ssv = eng.await(wred[2]);
      double omega = 0.0;
      if (std::abs(wdv) >= kBreakdownFloor)
        omega = wnv / wdv;
      else if (ssv >= kBreakdownFloor)
        throw BreakdownError("omega denominator vanished");
      Slot om = eng.new_slot("omega_exit");
      eng.put(om, omega);
      eng.axpby(eng.value(om), s, eng.constant(1.0), x, x, t);
      converged = true;
      break;
    }

    const double wnv = eng.await(wred[0]);
    const double wdv = eng.await(wred[1]);
    const double ssv = eng.await(wred[2]);
    double omega_val;
    if (std::abs(wdv) >= kBreakdownFloor) {
      omega_val = wnv / wdv;
    } else if (ssv < kBreakdownFloor) {
      omega_val = 0.0;  // s is exactly zero; next test exits converged
    } else {
      throw BreakdownError("omega denominator vanished");
    }
    Slot omega = eng.new_slot("omega");
    eng.put(omega, omega_val);

    // x_{j+1} = x_{j+1/2} + omega s ; r_{j+1} = s - omega A s
    eng.axpby(eng.value(omega), s, eng.constant(1.0), x, x, t);
    eng.axpby(eng.constant(1.0), s, neg_value(eng, omega), as, r, t);
    auto nr = eng.dot2(r, shadow, r, r, t);
    auto nred = eng.allreduce({nr[0], nr[1]}, CollectiveMode::Overlapped, t);
    // p_{j+1/2} = p - omega A p overlaps the second reduction.
    eng.axpby(eng.constant(1.0), p, neg_value(eng, omega), ap, phalf, t);

    double anv = eng.await(nred[0]);
    const double bnv = eng.await(nred[1]);
    if (cfg.restart_injection && cfg.restart_injection->iteration == iters)
      anv = cfg.restart_injection->alpha_n;

    bool restarted = false;
    if (std::sqrt(std::abs(anv)) < cfg.restart_epsilon) {
      restarted = true;
      if (++h.out.report.restart_count > cfg.max_restarts)
        throw BreakdownError("restart storm");
      eng.axpby(eng.constant(1.0), r, eng.constant(0.0), r, p, t);
      an_prev = eng.new_slot("an_restart");
      if (bnv >= kBreakdownFloor) {
        eng.axpby(eng.constant(1.0 / std::sqrt(bnv)), r, eng.constant(0.0), r,
                  shadow, t);
        // alpha_n refresh mirrors the initialization identity r.r' = sqrt(b).
        eng.put(an_prev, std::sqrt(bnv));
      } else {
        eng.put(an_prev, 0.0);  // converged at the next test
      }
    } else {
      // p_{j+1} = r_{j+1} + (an_{j+1} / (ad_j omega_j)) p_{j+1/2}
      eng.axpby(eng.constant(1.0), r,
                eng.constant(anv / (adv * omega_val)), phalf, p, t);
      an_prev = nred[0];
    }
    beta_prev = nred[1];
    h.capture(x, t);
    if (cfg.probe) {
      eng.drain();
      IterationProbe pr;
      pr.iteration = iters;
      pr.restarted = restarted;
      pr.r = eng.values(r).subspan(0, static_cast<std::size_t>(sys.local_nrows));
      pr.p = eng.values(p).subspan(0, static_cast<std::size_t>(sys.local_nrows));
      pr.shadow = eng.values(shadow).subspan(
          0, static_cast<std::size_t>(sys.local_nrows));
      cfg.probe(pr);
    }
    ++iters;
  }
  h.finish(x, converged, iters);
  return std::move(h.out);
}

// ---------------------------------------------------------------------------

RankResult solve_jacobi(Engine& eng, const LocalSystem& sys,
                        const SolverConfig& cfg) {
  check_diagonal(sys);
  Harness h(eng, sys, cfg);
  BufferId cur = eng.new_vector("x", true);
  BufferId nxt = eng.new_vector("x_next", true);
  h.seed_initial_guess(cur);
  h.capture(cur, 0);
  h.start_clock();

  bool converged = false;
  int iters = 0;
  while (true) {
    const int t = iters + 1;
    eng.exchange(cur, t);
    Slot res_local = eng.jacobi_step(cur, nxt, t);
    Slot beta = eng.allreduce({res_local}, CollectiveMode::Blocking, t)[0];
    const double v = std::sqrt(eng.await(beta));
    if (iters == 0 ? h.first_residual(v) : h.tested(v)) {
      converged = true;
      break;
    }
    if (iters == cfg.max_iterations) break;
    std::swap(cur, nxt);
    ++iters;
    h.capture(cur, iters);
  }
  h.finish(cur, converged, iters);
  return std::move(h.out);
}

RankResult solve_gs(Engine& eng, const LocalSystem& sys,
                    const SolverConfig& cfg, Engine::SweepOrder order) {
  check_diagonal(sys);
  Harness h(eng, sys, cfg);
  const BufferId x = eng.new_vector("x", true);
  const BufferId r = eng.new_vector("r");
  h.seed_initial_guess(x);
  ColorPlan colors;
  if (order == Engine::SweepOrder::Colored)
    colors = plan_colors(eng.tasks(), 2);
  h.capture(x, 0);
  h.start_clock();

  bool converged = false;
  int iters = 0;
  while (true) {
    const int t = iters + 1;
    eng.exchange(x, t);
    Slot res_local = eng.residual(x, r, t);
    Slot beta = eng.allreduce({res_local}, CollectiveMode::Blocking, t)[0];
    const double v = std::sqrt(eng.await(beta));
    if (iters == 0 ? h.first_residual(v) : h.tested(v)) {
      converged = true;
      break;
    }
    if (iters == cfg.max_iterations) break;
    eng.gs_sweep(true, order, &colors, x, t);
    eng.gs_sweep(false, order, &colors, x, t);
    ++iters;
    h.capture(x, iters);
  }
  h.finish(x, converged, iters);
  return std::move(h.out);
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Jacobi:
      return "jacobi";
    case Method::GsSequential:
      return "gs";
    case Method::GsRedBlack:
      return "gs-redblack";
    case Method::GsRelaxed:
      return "gs-relaxed";
    case Method::Cg:
      return "cg";
    case Method::CgNb:
      return "cg-nb";
    case Method::BiCgStab:
      return "bicgstab";
    case Method::BiCgStabB1:
      return "bicgstab-b1";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "jacobi") return Method::Jacobi;
  if (name == "gs" || name == "gs-sequential") return Method::GsSequential;
  if (name == "gs-redblack") return Method::GsRedBlack;
  if (name == "gs-relaxed") return Method::GsRelaxed;
  if (name == "cg") return Method::Cg;
  if (name == "cg-nb") return Method::CgNb;
  if (name == "bicgstab") return Method::BiCgStab;
  if (name == "bicgstab-b1") return Method::BiCgStabB1;
  return std::nullopt;
}

Method classical_counterpart(Method m) {
  switch (m) {
    case Method::CgNb:
      return Method::Cg;
    case Method::BiCgStabB1:
      return Method::BiCgStab;
    case Method::GsRedBlack:
    case Method::GsRelaxed:
      return Method::GsSequential;
    default:
      return m;
  }
}

BarrierCounts expected_barriers(Method m, Backend b) {
  switch (m) {
    case Method::Jacobi:
    case Method::GsSequential:
    case Method::GsRedBlack:
    case Method::GsRelaxed:
      return {1, 0};
    case Method::Cg:
      return {2, 0};
    case Method::CgNb:
      return b == Backend::TaskGraph ? BarrierCounts{0, 2}
                                     : BarrierCounts{2, 0};
    case Method::BiCgStab:
      return {3, 0};
    case Method::BiCgStabB1:
      return b == Backend::TaskGraph ? BarrierCounts{1, 2}
                                     : BarrierCounts{3, 0};
  }
  return {0, 0};
}

std::string SolveReport::to_json() const {
  nlohmann::json j;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["full_iterations"] = full_iterations;
  j["residual_history"] = residual_history;
  j["restart_count"] = restart_count;
  j["barriers"] = {{"blocking", blocking_collectives},
                   {"overlapped", overlapped_collectives}};
  j["wall_seconds"] = wall_seconds;
  j["method"] = method;
  j["backend"] = backend;
  j["ranks"] = ranks;
  j["workers"] = workers;
  j["grid"] = grid;
  j["stencil"] = stencil_points;
  j["epsilon"] = epsilon;
  if (!per_iteration_accesses.empty()) {
    nlohmann::json acc = nlohmann::json::array();
    for (const AccessCounts& c : per_iteration_accesses)
      acc.push_back({{"reads", c.reads}, {"writes", c.writes}});
    j["per_iteration_accesses"] = acc;
  }
  return j.dump(2);
}

RankResult solve_rank(Engine& eng, const LocalSystem& sys,
                      const SolverConfig& cfg) {
  switch (cfg.method) {
    case Method::Cg:
      return solve_cg(eng, sys, cfg);
    case Method::CgNb:
      return solve_cg_nb(eng, sys, cfg);
    case Method::BiCgStab:
      return solve_bicgstab(eng, sys, cfg);
    case Method::BiCgStabB1:
      return solve_bicgstab_b1(eng, sys, cfg);
    case Method::Jacobi:
      return solve_jacobi(eng, sys, cfg);
    case Method::GsSequential:
      return solve_gs(eng, sys, cfg, Engine::SweepOrder::Chained);
    case Method::GsRedBlack:
      return solve_gs(eng, sys, cfg, Engine::SweepOrder::Colored);
    case Method::GsRelaxed:
      return solve_gs(eng, sys, cfg, Engine::SweepOrder::Relaxed);
  }
  throw SetupError("unknown method");
}

}  // namespace hlamkit
