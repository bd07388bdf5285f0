#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nlspec/domain.hpp"
#include "nlspec/error.hpp"
#include "nlspec/kernel.hpp"
#include "nlspec/operator.hpp"
#include "nlspec/parallel.hpp"
#include "nlspec/spectral.hpp"

namespace nlspec {

/// One eigensolve of a named domain, with its structural checks.
struct DomainSolve {
  std::string label;
  std::string key;
  std::size_t nodes = 0;
  double grid_measure = 0.0;
  double measure = 0.0;
  double trace = 0.0;
  Spectrum spectrum;
  std::vector<Check> checks;

  double lambda1() const { return spectrum.lambda1(); }
};

inline DomainSolve solve_domain(const KernelSpec& k, const DomainSpec& d, const ContainerGrid& g, std::string label,
                                bool connected = true, std::size_t vectors = 1) {
  const DiscreteOperator op = assemble(k, d, g);
  SpectralOptions so;
  so.vectors = vectors;
  DomainSolve r;
  r.label = std::move(label);
  r.key = d.key();
  r.nodes = op.size();
  r.grid_measure = op.grid_measure();
  r.measure = d.measure();
  r.trace = op.trace();
  r.spectrum = eigendecompose(op, so);
  r.checks = spectral_structure_checks(r.spectrum, connected);
  for (auto& c : r.checks) c.detail = r.label + ": " + c.detail;
  return r;
}

/// lambda_1 on the covering grid of spacing h.
inline double lambda1_at(const KernelSpec& k, const DomainSpec& d, const GridSpec& g) {
  SpectralOptions so;
  so.vectors = 0;
  return eigendecompose(assemble(k, d, g.cover({d})), so).lambda1();
}

/// E_h: relative change of lambda_1 between the grids 2h and h.
inline double grid_error(const KernelSpec& k, const DomainSpec& d, const GridSpec& g, double lambda1_h) {
  return std::fabs(lambda1_h - lambda1_at(k, d, g.coarse())) / std::fabs(lambda1_h);
}

inline double grid_error(const KernelSpec& k, const DomainSpec& d, const GridSpec& g) {
  return grid_error(k, d, g, lambda1_at(k, d, g));
}

namespace detail {
inline void append(std::vector<Check>& out, const std::vector<Check>& in) { out.insert(out.end(), in.begin(), in.end()); }

inline std::vector<double> leading_descending(const Spectrum& s, std::size_t count) {
  std::vector<double> v = s.mus;
  std::sort(v.begin(), v.end(), std::greater<>());
  v.resize(std::min(count, v.size()));
  return v;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Variational principle
// ---------------------------------------------------------------------------

struct VariationalReport {
  int trials = 0;
  double lambda1 = 0.0;
  double min_rayleigh = 0.0;       // over the random vectors
  double min_excess = 0.0;         // min_rayleigh - lambda1
  double eigenvector_rayleigh = 0.0;
  double eigenvector_residual = 0.0;  // |R(u_1) - lambda1|
  double constant_rayleigh = 0.0;     // R(1), strictly positive
  std::vector<Check> checks;
};

inline VariationalReport variational_check(const DiscreteOperator& op, const Spectrum& s, int trials,
                                           std::uint64_t seed) {
  if (s.vectors.empty()) throw Error("experiments", "eigenvector_available", "first eigenvector was not computed");
  VariationalReport r;
  r.trials = trials;
  r.lambda1 = s.lambda1();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  r.min_rayleigh = std::numeric_limits<double>::infinity();
  std::vector<double> u(op.size());
  for (int t = 0; t < trials; ++t) {
    for (auto& x : u) x = uni(rng);
    r.min_rayleigh = std::min(r.min_rayleigh, rayleigh_lambda1(op, u));
  }
  r.min_excess = r.min_rayleigh - r.lambda1;
  r.eigenvector_rayleigh = rayleigh_lambda1(op, s.vectors[0]);
  r.eigenvector_residual = std::fabs(r.eigenvector_rayleigh - r.lambda1);
  std::fill(u.begin(), u.end(), 1.0);
  r.constant_rayleigh = rayleigh_lambda1(op, u);
  r.checks.push_back({"spectral", "rayleigh_above_lambda1", r.min_excess >= -1e-10, "min excess " + detail::fmt(r.min_excess)});
  r.checks.push_back({"spectral", "rayleigh_equality_at_eigenvector", r.eigenvector_residual <= 1e-10,
                      "residual " + detail::fmt(r.eigenvector_residual)});
  r.checks.push_back({"spectral", "constant_rayleigh_positive", r.constant_rayleigh > 0.0,
                      "R(1) = " + detail::fmt(r.constant_rayleigh)});
  return r;
}

// ---------------------------------------------------------------------------
// Grid convergence
// ---------------------------------------------------------------------------

struct ConvergenceReport {
  std::vector<double> h;
  std::vector<std::size_t> nodes;
  std::vector<double> lambda1;
  std::vector<double> diffs;   // |lambda1[i+1] - lambda1[i]|
  std::vector<double> orders;  // log(diffs[i-1] / diffs[i]) / log(h[i-1] / h[i])
  std::vector<Check> checks;
};

inline ConvergenceReport grid_convergence(const KernelSpec& k, const DomainSpec& d, std::vector<double> hs,
                                          double min_order = 1.0, int margin = 1) {
  if (hs.size() < 3) throw Error("experiments", "three_resolutions", "convergence needs at least three grids");
  for (std::size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1])) throw Error("experiments", "decreasing_spacing", "grid spacings must decrease");
  ConvergenceReport r;
  r.h = hs;
  r.nodes.resize(hs.size());
  r.lambda1.resize(hs.size());
  std::vector<DomainSolve> solves(hs.size());
  parallel_for(hs.size(), [&](std::size_t i) {
    solves[i] = solve_domain(k, d, ContainerGrid::covering({d}, hs[i], margin), "h=" + detail::fmt(hs[i]));
  });
  for (std::size_t i = 0; i < hs.size(); ++i) {
    r.nodes[i] = solves[i].nodes;
    r.lambda1[i] = solves[i].lambda1();
    detail::append(r.checks, solves[i].checks);
  }
  for (std::size_t i = 1; i < hs.size(); ++i) r.diffs.push_back(std::fabs(r.lambda1[i] - r.lambda1[i - 1]));
  bool monotone = true;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < r.diffs.size(); ++i) {
    monotone = monotone && r.diffs[i] < r.diffs[i - 1];
    const double p = std::log(r.diffs[i - 1] / r.diffs[i]) / std::log(hs[i] / hs[i + 1]);
    r.orders.push_back(p);
    worst = std::min(worst, p);
  }
  r.checks.push_back({"experiments", "cauchy_monotone", monotone, "successive differences shrink"});
  r.checks.push_back({"experiments", "empirical_order", worst >= min_order,
                      "min order " + detail::fmt(worst) + " vs " + detail::fmt(min_order)});
  return r;
}

// ---------------------------------------------------------------------------
// Continuity under domain perturbation
// ---------------------------------------------------------------------------

struct PerturbMember {
  std::string label;
  SymmetricDifference symdiff;
  double norm_diff = 0.0;
  double bound = 0.0;
  double bound_with_margin = 0.0;
  std::vector<double> mus;       // leading by signed value
  std::vector<double> distances; // |mu_k(member) - mu_k(limit)|
  double lambda1 = 0.0;
  double lambda1_distance = 0.0;
  std::vector<bool> simple;
  bool gap_collapse = false;
};

struct PerturbReport {
  std::string family;
  double h = 0.0;
  std::size_t track = 1;
  std::vector<double> limit_mus;
  double limit_lambda1 = 0.0;
  double grid_error = 0.0;  // E_h on the limit domain
  std::vector<PerturbMember> members;
  std::vector<Check> checks;
};

inline PerturbReport continuity_sweep(const KernelSpec& k, const DomainSpec& limit,
                                      const std::vector<DomainSpec>& family, const std::vector<std::string>& labels,
                                      std::size_t track, const GridSpec& g, std::string family_label = "family") {
  if (labels.size() != family.size()) throw Error("experiments", "member_labels", "one label per member");
  if (track == 0) throw Error("experiments", "track_positive", "track at least one eigenvalue");
  std::vector<DomainSpec> all = family;
  all.push_back(limit);
  auto grid = std::make_shared<const ContainerGrid>(g.cover(all));

  PerturbReport r;
  r.family = std::move(family_label);
  r.h = g.h;
  r.track = track;

  const DiscreteOperator lim = assemble(k, limit, grid);
  SpectralOptions so;
  so.vectors = 1;
  const Spectrum ls = eigendecompose(lim, so);
  r.limit_mus = detail::leading_descending(ls, track);
  r.limit_lambda1 = ls.lambda1();
  {
    auto c = spectral_structure_checks(ls);
    for (auto& x : c) x.detail = "limit: " + x.detail;
    detail::append(r.checks, c);
  }
  r.grid_error = grid_error(k, limit, g, r.limit_lambda1);
  const double margin = 1.0 + 5.0 * r.grid_error;

  r.members.resize(family.size());
  std::vector<std::vector<Check>> member_checks(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    PerturbMember& m = r.members[i];
    m.label = labels[i];
    const DiscreteOperator op = assemble(k, family[i], grid);
    const Spectrum s = eigendecompose(op, so);
    auto c = spectral_structure_checks(s);
    for (auto& x : c) x.detail = m.label + ": " + x.detail;
    member_checks[i] = c;

    m.mus = detail::leading_descending(s, track);
    m.lambda1 = s.lambda1();
    m.lambda1_distance = std::fabs(m.lambda1 - r.limit_lambda1);
    for (std::size_t q = 0; q < track && q < m.mus.size() && q < r.limit_mus.size(); ++q)
      m.distances.push_back(std::fabs(m.mus[q] - r.limit_mus[q]));
    for (std::size_t q = 0; q < std::min(track, s.size()); ++q) {
      m.simple.push_back(s.simple[q]);
      m.gap_collapse = m.gap_collapse || !s.simple[q];
    }

    m.symdiff = symmetric_difference(limit, family[i]);
    m.norm_diff = operator_norm_diff(lim, op);
    m.bound = lipschitz_bound(k, limit, family[i]);
    m.bound_with_margin = m.bound * margin;
  });

  for (std::size_t i = 0; i < family.size(); ++i) {
    const PerturbMember& m = r.members[i];
    detail::append(r.checks, member_checks[i]);
    const double slack = 1e-12 * std::max(1.0, std::fabs(r.limit_mus.front()));
    double worst = 0.0;
    for (double dist : m.distances) worst = std::max(worst, dist - m.norm_diff);
    r.checks.push_back({"experiments", "weyl_inequality", worst <= slack,
                        m.label + ": max(|mu_k - mu_k(limit)| - norm_diff) = " + detail::fmt(worst)});
    if (m.symdiff.closed_form)
      r.checks.push_back({"domain", "symdiff_agreement", !m.symdiff.flagged,
                          m.label + ": closed form " + detail::fmt(m.symdiff.value) + " vs subcell " +
                              detail::fmt(m.symdiff.subcell_estimate)});
    r.checks.push_back({"operator", "lipschitz_bound", m.norm_diff <= m.bound_with_margin,
                        m.label + ": norm_diff " + detail::fmt(m.norm_diff) + " vs bound " +
                            detail::fmt(m.bound_with_margin)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Isoperimetric comparisons
// ---------------------------------------------------------------------------

struct RankedDomain {
  std::string label;
  std::string key;
  double measure = 0.0;
  double grid_measure = 0.0;
  std::size_t nodes = 0;
  double lambda1 = 0.0;
  double grid_error = 0.0;
};

struct FaberKrahnReport {
  RankedDomain ball;
  std::vector<RankedDomain> candidates;
  double margin = 1.0;  // 1 + 5 max E_h
  std::vector<Check> checks;
};

namespace detail {
inline RankedDomain rank_domain(const KernelSpec& k, const DomainSpec& d, const GridSpec& g, const std::string& label,
                                std::vector<Check>& checks) {
  const DomainSolve s = solve_domain(k, d, g.cover({d}), label);
  checks = s.checks;
  RankedDomain r{label, s.key, s.measure, s.grid_measure, s.nodes, s.lambda1(), 0.0};
  r.grid_error = grid_error(k, d, g, r.lambda1);
  return r;
}
}  // namespace detail

/// lambda_1 of each candidate against the ball of equal measure. With
/// `ordered`, the candidates must also be listed by nondecreasing lambda_1.
inline FaberKrahnReport faber_krahn_check(const KernelSpec& k, const std::vector<DomainSpec>& candidates,
                                          const std::vector<std::string>& labels, const GridSpec& g, bool ordered = false) {
  if (candidates.empty()) throw Error("experiments", "nonempty_candidates", "no candidate domains");
  if (labels.size() != candidates.size()) throw Error("experiments", "candidate_labels", "one label per candidate");
  const double m0 = candidates.front().measure();
  for (const auto& c : candidates)
    if (std::fabs(c.measure() - m0) > 1e-3 * m0)
      throw Error("experiments", "equal_measure",
                  "'" + c.key() + "' has measure " + detail::fmt(c.measure()) + ", expected " + detail::fmt(m0));
  const DomainSpec ball = ball_of_same_measure(candidates.front());

  FaberKrahnReport r;
  std::vector<DomainSpec> all = candidates;
  all.push_back(ball);
  std::vector<RankedDomain> rows(all.size());
  std::vector<std::vector<Check>> checks(all.size());
  parallel_for(all.size(), [&](std::size_t i) {
    rows[i] = detail::rank_domain(k, all[i], g, i < labels.size() ? labels[i] : "ball", checks[i]);
  });
  for (const auto& c : checks) detail::append(r.checks, c);
  r.ball = rows.back();
  rows.pop_back();
  r.candidates = rows;

  double e = r.ball.grid_error;
  for (const auto& c : r.candidates) e = std::max(e, c.grid_error);
  r.margin = 1.0 + 5.0 * e;
  for (const auto& c : r.candidates)
    r.checks.push_back({"experiments", "ball_minimizes", r.ball.lambda1 <= c.lambda1 * r.margin,
                        c.label + ": " + detail::fmt(c.lambda1) + " vs ball " + detail::fmt(r.ball.lambda1)});
  if (ordered)
    for (std::size_t i = 1; i < r.candidates.size(); ++i)
      r.checks.push_back({"experiments", "candidates_ordered",
                          r.candidates[i - 1].lambda1 <= r.candidates[i].lambda1 * r.margin,
                          r.candidates[i - 1].label + " <= " + r.candidates[i].label});
  return r;
}

struct StretchReport {
  std::vector<double> a;
  std::vector<RankedDomain> rows;
  double total_increase = 0.0;
  std::vector<Check> checks;
};

/// lambda_1 of h_a(base) for h_a(x) = (a x_1, x_2 / a), a decreasing.
inline StretchReport stretch_sweep(const KernelSpec& k, const DomainSpec& base, const std::vector<double>& as,
                                   const GridSpec& g, double min_total_increase = 0.0) {
  if (as.size() < 2) throw Error("experiments", "two_stretches", "need at least two values of a");
  for (std::size_t i = 1; i < as.size(); ++i)
    if (!(as[i] < as[i - 1])) throw Error("experiments", "decreasing_stretch", "a must decrease");
  StretchReport r;
  r.a = as;
  r.rows.resize(as.size());
  std::vector<std::vector<Check>> checks(as.size());
  parallel_for(as.size(), [&](std::size_t i) {
    const DomainSpec d = DomainSpec::mapped(base, MapSpec::affine_diagonal({as[i], 1.0 / as[i]}, base.dim()));
    const DomainSolve s = solve_domain(k, d, g.cover({d}), "a=" + detail::fmt(as[i]));
    checks[i] = s.checks;
    r.rows[i] = {s.label, s.key, s.measure, s.grid_measure, s.nodes, s.lambda1(), 0.0};
  });
  for (const auto& c : checks) detail::append(r.checks, c);
  bool increasing = true;
  for (std::size_t i = 1; i < as.size(); ++i) increasing = increasing && r.rows[i].lambda1 > r.rows[i - 1].lambda1;
  r.total_increase = r.rows.back().lambda1 - r.rows.front().lambda1;
  r.checks.push_back({"experiments", "strictly_increasing", increasing, "lambda1 increases as a decreases"});
  r.checks.push_back({"experiments", "total_increase", r.total_increase > min_total_increase,
                      detail::fmt(r.total_increase) + " vs " + detail::fmt(min_total_increase)});
  return r;
}

struct TwoBallRow {
  double requested_separation = 0.0;
  double separation = 0.0;  // after snapping the centres to the lattice
  std::size_t nodes = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double pair_gap = 0.0;    // |lambda2 - lambda1(single)|
  bool decoupled = false;   // no kernel interaction between the balls
};

struct TwoBallReport {
  double radius = 0.0;
  double lambda1_single = 0.0;
  double lambda2_double_ball = 0.0;  // single ball of twice the measure
  std::vector<TwoBallRow> rows;
  std::vector<Check> checks;
};

/// Two identical balls of radius r whose boundaries are `separation` apart,
/// centred on the x axis. Centres sit on multiples of h so every ball
/// discretizes to a lattice translate of the same node set.
inline TwoBallReport hong_krahn_szego_check(const KernelSpec& k, double radius, const std::vector<double>& separations,
                                            const GridSpec& g) {
  if (k.dim != 2) throw Error("experiments", "planar_kernel", "two-ball check is two-dimensional");
  for (double s : separations)
    if (!(s > 0.0)) throw Error("experiments", "disjoint_balls", "separation must be positive");
  TwoBallReport r;
  r.radius = radius;

  std::vector<DomainSpec> unions;
  for (double s : separations) {
    const double half = std::ceil((radius + 0.5 * s) / g.h - 1e-9) * g.h;
    TwoBallRow row;
    row.requested_separation = s;
    row.separation = 2.0 * half - 2.0 * radius;
    row.decoupled = k.family != KernelFamily::gaussian && row.separation > k.width;
    r.rows.push_back(row);
    unions.push_back(DomainSpec::union_of_balls({{{-half, 0.0}, radius}, {{half, 0.0}, radius}}));
  }

  const std::size_t n = separations.size();
  std::vector<DomainSolve> solves(n + 2);
  parallel_for(n + 2, [&](std::size_t i) {
    if (i < n) {
      solves[i] = solve_domain(k, unions[i], g.cover({unions[i]}),
                               "separation=" + detail::fmt(r.rows[i].separation), false);
    } else if (i == n) {
      const DomainSpec single = DomainSpec::ball({0.0, 0.0}, radius);
      solves[i] = solve_domain(k, single, g.cover({single}), "single ball");
    } else {
      const DomainSpec twice = DomainSpec::ball({0.0, 0.0}, radius * std::sqrt(2.0));
      solves[i] = solve_domain(k, twice, g.cover({twice}), "double-measure ball", true, 2);
    }
  });
  for (const auto& s : solves) detail::append(r.checks, s.checks);
  r.lambda1_single = solves[n].lambda1();
  r.lambda2_double_ball = solves[n + 1].spectrum.size() > 1 ? 1.0 - solves[n + 1].spectrum.descending(1) : 1.0;

  for (std::size_t i = 0; i < n; ++i) {
    TwoBallRow& row = r.rows[i];
    row.nodes = solves[i].nodes;
    row.lambda1 = 1.0 - solves[i].spectrum.descending(0);
    row.lambda2 = 1.0 - solves[i].spectrum.descending(1);
    row.pair_gap = std::fabs(row.lambda2 - r.lambda1_single);
    if (row.decoupled)
      r.checks.push_back({"experiments", "decoupled_pair", row.pair_gap < 1e-9,
                          "separation " + detail::fmt(row.separation) + ": |lambda2 - lambda1(single)| = " +
                              detail::fmt(row.pair_gap)});
    r.checks.push_back({"experiments", "union_below_double_ball", row.lambda2 <= r.lambda2_double_ball,
                        "lambda2 " + detail::fmt(row.lambda2) + " vs " + detail::fmt(r.lambda2_double_ball)});
  }
  for (std::size_t i = 1; i < n; ++i) {
    const bool ok = r.rows[i].separation < r.rows[i - 1].separation ||
                    r.rows[i].lambda2 <= r.rows[i - 1].lambda2 + 1e-9;
    r.checks.push_back({"experiments", "lambda2_nonincreasing", ok,
                        detail::fmt(r.rows[i - 1].lambda2) + " -> " + detail::fmt(r.rows[i].lambda2)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Perforated domains
// ---------------------------------------------------------------------------

/// Candidate limit eigenproblem (I - J_Omega) phi + sign (1 - chi)/chi phi
/// = sign beta / chi phi on the solid domain, for sign = -1 (as printed)
/// and +1.
struct LimitVariant {
  std::string name;
  double sign = -1.0;
  double target = 0.0;      // sign * beta1_hat / chi
  double eigenvalue = 0.0;  // nearest eigenvalue of the limit operator
  std::size_t index = 0;    // its position in the solid spectrum (0 = Perron)
  double residual = 0.0;
  bool eigenfunction_positive = false;
  bool matches = false;
};

struct PerforatedReport {
  double chi = 1.0;
  double hole_fraction = 0.0;
  double h = 0.0;
  std::vector<double> eps_list;
  std::vector<std::size_t> nodes;
  std::vector<double> lambda1_eps;
  std::vector<double> successive_diffs;
  double beta1_hat = 0.0;
  double lambda1_solid = 0.0;
  double mu1_solid = 0.0;
  double beta1_limit = 0.0;  // 1 - chi mu_1(Omega)
  double grid_error = 0.0;   // E_h on the solid domain
  double match_tolerance = 0.0;
  std::vector<LimitVariant> variants;
  std::vector<Check> checks;
};

inline PerforatedReport perforated_limit(const KernelSpec& k, const Box& base, double hole_fraction, HoleShape hole,
                                         const std::vector<double>& eps_list, const GridSpec& g) {
  const double h = g.h;
  const int dim = k.dim;
  if (eps_list.size() < 2) throw Error("experiments", "two_scales", "need at least two values of eps");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw Error("experiments", "decreasing_eps", "eps must decrease");
  const double side = std::pow(hole_fraction, 1.0 / dim);
  for (double e : eps_list) {
    bool aligned = detail::near_integer(e / h);
    if (hole == HoleShape::box && hole_fraction > 0.0) aligned = aligned && detail::near_integer(0.5 * e * (1.0 - side) / h);
    for (int a = 0; a < dim; ++a)
      aligned = aligned && detail::near_integer(base.lo[a] / e) && detail::near_integer(base.hi[a] / e);
    if (!aligned)
      throw Error("experiments", "eps_grid_alignment",
                  "eps = " + detail::fmt(e) + " does not align cells and holes with the grid h = " + detail::fmt(h));
  }

  PerforatedReport r;
  r.hole_fraction = hole_fraction;
  r.chi = 1.0 - hole_fraction;
  r.h = h;
  r.eps_list = eps_list;

  const DomainSpec solid = DomainSpec::box(base.lo, base.hi, dim);
  auto grid = std::make_shared<const ContainerGrid>(g.cover({solid}));
  const std::size_t n = eps_list.size();
  std::vector<DomainSolve> solves(n + 1);
  parallel_for(n + 1, [&](std::size_t i) {
    if (i < n) {
      PerforatedShape p;
      p.eps = eps_list[i];
      p.hole_fraction = hole_fraction;
      p.hole = hole;
      p.base = base;
      solves[i] = solve_domain(k, DomainSpec::perforated(p, dim), *grid, "eps=" + detail::fmt(eps_list[i]));
    } else {
      solves[i] = solve_domain(k, solid, *grid, "solid");
    }
  });
  for (const auto& s : solves) detail::append(r.checks, s.checks);
  for (std::size_t i = 0; i < n; ++i) {
    r.nodes.push_back(solves[i].nodes);
    r.lambda1_eps.push_back(solves[i].lambda1());
  }
  const Spectrum& ss = solves[n].spectrum;
  r.lambda1_solid = ss.lambda1();
  r.mu1_solid = ss.mu1();
  r.beta1_limit = 1.0 - r.chi * r.mu1_solid;
  r.grid_error = grid_error(k, solid, g, r.lambda1_solid);

  for (std::size_t i = 1; i < n; ++i) r.successive_diffs.push_back(std::fabs(r.lambda1_eps[i] - r.lambda1_eps[i - 1]));
  // First-order Richardson on the two finest scales.
  const double ratio = eps_list[n - 2] / eps_list[n - 1];
  r.beta1_hat = (ratio * r.lambda1_eps[n - 1] - r.lambda1_eps[n - 2]) / (ratio - 1.0);

  r.match_tolerance = (r.successive_diffs.back() + 5.0 * r.grid_error * std::fabs(r.beta1_hat)) / r.chi;
  for (double sign : {-1.0, 1.0}) {
    LimitVariant v;
    v.name = sign < 0.0 ? "printed" : "sign_flipped";
    v.sign = sign;
    v.target = sign * r.beta1_hat / r.chi;
    const double shift = sign * (1.0 - r.chi) / r.chi;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ss.size(); ++i) {
      const double ev = ss.lambdas[i] + shift;
      if (std::fabs(ev - v.target) < best) {
        best = std::fabs(ev - v.target);
        v.eigenvalue = ev;
        v.index = i;
      }
    }
    v.residual = best;
    // Only the Perron vector has one sign; the others are orthogonal to it.
    v.eigenfunction_positive = v.index == 0 && !ss.vectors.empty() &&
                               std::all_of(ss.vectors[0].begin(), ss.vectors[0].end(), [](double x) { return x > 0.0; });
    v.matches = v.residual <= r.match_tolerance && v.eigenfunction_positive;
    r.variants.push_back(v);
  }

  bool decreasing = true;
  for (std::size_t i = 1; i < r.successive_diffs.size(); ++i)
    decreasing = decreasing && r.successive_diffs[i] < r.successive_diffs[i - 1];
  if (hole_fraction > 0.0) {
    r.checks.push_back({"experiments", "cauchy_differences", decreasing, "successive |lambda1| differences shrink"});
    r.checks.push_back({"experiments", "beta1_in_unit_interval", r.beta1_hat > 0.0 && r.beta1_hat < 1.0,
                        "beta1_hat = " + detail::fmt(r.beta1_hat)});
    r.checks.push_back({"experiments", "beta1_above_solid",
                        r.beta1_hat - r.lambda1_solid > 5.0 * r.grid_error,
                        detail::fmt(r.beta1_hat - r.lambda1_solid) + " vs 5 E_h = " + detail::fmt(5.0 * r.grid_error)});
  } else {
    bool same = true;
    for (double l : r.lambda1_eps) same = same && l == r.lambda1_solid;
    r.checks.push_back({"experiments", "no_holes_reproduces_solid", same, "lambda1(eps) == lambda1(solid)"});
  }
  return r;
}

}  // namespace nlspec
