#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlspec/config.hpp"
#include "nlspec/error.hpp"
#include "nlspec/experiments.hpp"
#include "nlspec/output.hpp"
#include "nlspec/shape.hpp"
#include "nlspec/spectral.hpp"

namespace nlspec {

struct KernelTable {
  std::vector<KernelSpec> kernels;
};

struct SpectrumRun {
  DomainSolve solve;
  double h = 0.0;
  double j0_grid_measure = 0.0;  // J(0) |Omega|_grid
  double eigen_sum = 0.0;
  double trace_residual = 0.0;   // relative
  double max_gram_offdiag = 0.0;
  std::optional<VariationalReport> variational;
};

struct ShapeRun {
  std::vector<ShapeDerivativeReport> fields;
};

struct PullbackRun {
  PullbackComparison comparison;
  std::string map;
  std::string unweighted_map;
  double unweighted_residual = 0.0;            // w = 1 on the second map
  double weighted_residual_second_map = 0.0;   // its weighted counterpart
};

using Report = std::variant<KernelTable, SpectrumRun, ConvergenceReport, PerturbReport, ShapeRun, FaberKrahnReport,
                            StretchReport, TwoBallReport, PerforatedReport, PullbackRun>;

/// Result of executing one configuration in-process.
struct Outcome {
  std::string command;
  Report report;
  std::vector<Check> checks;
  Table table;
  std::vector<Series> series;
  PlotLabels labels;

  std::vector<Check> failures() const {
    std::vector<Check> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c);
    return out;
  }
};

namespace commands {

using config::json;

inline std::vector<std::string> labels_or_keys(const json& body, const char* field,
                                               const std::vector<DomainSpec>& ds) {
  std::vector<std::string> labels;
  if (body.contains(field)) {
    labels = config::strings(body[field], std::string("config.") + field);
    if (labels.size() != ds.size()) config::fail(std::string("config.") + field, "one label per domain");
  } else {
    for (const auto& d : ds) labels.push_back(d.key());
  }
  return labels;
}

inline void apply_expectations(const json& body, const Spectrum& s, std::vector<Check>& checks) {
  if (!body.contains("expect")) return;
  const json& e = body["expect"];
  config::keys(e, "config.expect", {"lambda1_interval"});
  if (e.contains("lambda1_interval")) {
    const auto iv = config::numbers(e["lambda1_interval"], "config.expect.lambda1_interval");
    if (iv.size() != 2) config::fail("config.expect.lambda1_interval", "expected [lo, hi]");
    // The configured interval narrows (0, 1); it cannot widen it.
    const double lo = std::max(0.0, iv[0]), hi = std::min(1.0, iv[1]);
    const double l = s.lambda1();
    checks.push_back({"spectral", "lambda1_in_unit_interval", l > lo && l < hi,
                      "lambda1=" + num(l) + " expected in (" + num(lo) + ", " + num(hi) + ")"});
  }
}

inline Outcome kernels(const ExperimentConfig& c) {
  config::keys(c.body, "config", {"kernels"}, {"kernels"});
  const json& arr = c.body["kernels"];
  if (!arr.is_array() || arr.empty()) config::fail("config.kernels", "expected a nonempty array");
  Outcome o;
  KernelTable t;
  for (std::size_t i = 0; i < arr.size(); ++i) t.kernels.push_back(config::kernel(arr[i], "config.kernels[" + std::to_string(i) + "]"));
  o.table.header = {"family", "width", "dim", "norm_const", "J0", "smoothness", "mass_error"};
  for (const auto& k : t.kernels) {
    o.table.rows.push_back({std::string(to_string(k.family)), num(k.width), num(k.dim), num(k.norm_const),
                            num(k.sup_norm()), std::string(to_string(k.smoothness)), num(k.mass_error)});
    o.checks.push_back({"kernel", "unit_mass", k.mass_error < 1e-8,
                        std::string(to_string(k.family)) + " width " + num(k.width) + " dim " + num(k.dim) +
                            ": |int J - 1| = " + num(k.mass_error)});
    Series s;
    s.name = std::string(to_string(k.family)) + " " + detail::tick(k.width) + " (N=" + num(k.dim) + ")";
    const double rmax = k.cutoff_radius() * (k.family == KernelFamily::gaussian ? 0.5 : 1.0);
    for (int q = 0; q <= 64; ++q) {
      const double r = rmax * q / 64.0;
      s.x.push_back(r);
      s.y.push_back(k.value_sq(r * r));
    }
    o.series.push_back(std::move(s));
  }
  o.labels = {"radial kernel profiles", "|x|", "J(x)"};
  o.report = std::move(t);
  return o;
}

inline EigenMethod eigen_method(const std::string& m) {
  if (m == "automatic") return EigenMethod::automatic;
  if (m == "jacobi") return EigenMethod::jacobi;
  if (m == "lapack") return EigenMethod::lapack;
  config::fail("config.eigen.method", "method must be automatic, jacobi or lapack");
  return EigenMethod::automatic;
}

inline Outcome spectrum(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "domain", "grid", "eigen", "rayleigh", "rows", "expect"},
               {"kernel", "domain", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const DomainSpec d = config::domain(b["domain"], "config.domain");
  const GridSpec g = config::grid(b["grid"], "config.grid");
  SpectralOptions so;
  so.vectors = 8;
  if (b.contains("eigen")) {
    const json& e = b["eigen"];
    config::keys(e, "config.eigen", {"method", "gap_tol", "vectors"});
    if (e.contains("method")) so.method = eigen_method(config::string(e["method"], "config.eigen.method"));
    if (e.contains("gap_tol")) so.gap_tol_rel = config::positive(e["gap_tol"], "config.eigen.gap_tol");
    if (e.contains("vectors")) {
      const long v = config::integer(e["vectors"], "config.eigen.vectors");
      if (v < 1) config::fail("config.eigen.vectors", "keep at least the first eigenvector");
      so.vectors = static_cast<std::size_t>(v);
    }
  }
  int trials = 0;
  if (b.contains("rayleigh")) {
    config::keys(b["rayleigh"], "config.rayleigh", {"trials"}, {"trials"});
    trials = static_cast<int>(config::integer(b["rayleigh"]["trials"], "config.rayleigh.trials"));
    if (trials < 1) config::fail("config.rayleigh.trials", "trials must be positive");
  }
  std::size_t rows = std::numeric_limits<std::size_t>::max();
  if (b.contains("rows")) {
    const long r = config::integer(b["rows"], "config.rows");
    if (r < 1) config::fail("config.rows", "rows must be positive");
    rows = static_cast<std::size_t>(r);
  }
  if (k.dim != d.dim()) config::fail("config", "kernel and domain dimensions differ");

  auto grid = std::make_shared<const ContainerGrid>(g.cover({d}));
  const DiscreteOperator op = assemble(k, d, grid);
  if (!c.output.matrix.empty()) write_binary(op, (out_dir / c.output.matrix).string());

  SpectrumRun run;
  run.h = g.h;
  DomainSolve& sv = run.solve;
  sv.label = d.key();
  sv.key = d.key();
  sv.nodes = op.size();
  sv.grid_measure = op.grid_measure();
  sv.measure = d.measure();
  sv.trace = op.trace();
  sv.spectrum = eigendecompose(op, so);
  sv.checks = spectral_structure_checks(sv.spectrum);
  const Spectrum& s = sv.spectrum;

  Outcome o;
  o.checks = sv.checks;
  run.j0_grid_measure = k.sup_norm() * op.grid_measure();
  for (double m : s.mus) run.eigen_sum += m;
  run.trace_residual = std::fabs(run.eigen_sum - run.j0_grid_measure) / run.j0_grid_measure;
  o.checks.push_back({"spectral", "trace_identity", run.trace_residual < 1e-10,
                      "relative residual " + num(run.trace_residual)});
  for (std::size_t i = 0; i < s.vectors.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double gij = dot(s.vectors[i], s.vectors[j]) * s.weight;
      run.max_gram_offdiag = std::max(run.max_gram_offdiag, std::fabs(gij - (i == j ? 1.0 : 0.0)));
    }
  o.checks.push_back({"spectral", "orthonormal_vectors", run.max_gram_offdiag < 1e-10,
                      "max |G - I| = " + num(run.max_gram_offdiag)});
  if (trials > 0) {
    run.variational = variational_check(op, s, trials, c.output.seed);
    detail::append(o.checks, run.variational->checks);
  }
  apply_expectations(b, s, o.checks);

  Table& t = o.table;
  t.note("command", "spectrum");
  t.note("kernel", std::string(to_string(k.family)) + "(" + num(k.width) + ")");
  t.note("domain", d.key());
  t.note("h", g.h);
  t.note("nodes", num(sv.nodes));
  t.note("grid_measure", sv.grid_measure);
  t.note("measure", sv.measure);
  t.note("method", s.method);
  t.note("trace", sv.trace);
  t.note("eigen_sum", run.eigen_sum);
  t.note("j0_grid_measure", run.j0_grid_measure);
  t.note("trace_residual", run.trace_residual);
  t.note("mu1", s.mu1());
  t.note("lambda1", s.lambda1());
  t.note("gap_tol", s.gap_tol);
  if (k.family == KernelFamily::gaussian) t.note("gaussian_cutoff", k.cutoff_radius());
  if (run.variational) {
    t.note("rayleigh_trials", num(run.variational->trials));
    t.note("rayleigh_min_excess", run.variational->min_excess);
    t.note("rayleigh_eigenvector_residual", run.variational->eigenvector_residual);
  }
  t.header = {"index", "mu", "lambda", "gap", "simple"};
  const std::size_t nrows = std::min(rows, s.size());
  Series lam{"lambda_i", {}, {}};
  for (std::size_t i = 0; i < nrows; ++i) {
    t.rows.push_back({num(i + 1), num(s.mus[i]), num(s.lambdas[i]), num(s.gaps[i]), num(static_cast<bool>(s.simple[i]))});
    if (i < 64) {
      lam.x.push_back(static_cast<double>(i + 1));
      lam.y.push_back(s.lambdas[i]);
    }
  }
  o.series = {lam};
  o.labels = {"leading eigenvalues of B on " + d.key(), "index i", "lambda_i"};
  o.report = std::move(run);
  return o;
}

inline Outcome converge(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "domain", "grids", "min_order"}, {"kernel", "domain", "grids"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const DomainSpec d = config::domain(b["domain"], "config.domain");
  const json& gs = b["grids"];
  config::keys(gs, "config.grids", {"h", "n_cells", "margin"});
  if (gs.contains("h") == gs.contains("n_cells")) config::fail("config.grids", "give exactly one of 'h' and 'n_cells'");
  std::vector<double> hs;
  if (gs.contains("h")) {
    hs = config::numbers(gs["h"], "config.grids.h");
  } else {
    for (double n : config::numbers(gs["n_cells"], "config.grids.n_cells")) {
      if (!(n >= 1.0) || n != std::floor(n)) config::fail("config.grids.n_cells", "cell counts are positive integers");
      hs.push_back(1.0 / n);
    }
  }
  int margin = 1;
  if (gs.contains("margin")) margin = static_cast<int>(config::integer(gs["margin"], "config.grids.margin"));
  const double min_order = b.contains("min_order") ? config::number(b["min_order"], "config.min_order") : 1.0;
  if (k.dim != d.dim()) config::fail("config", "kernel and domain dimensions differ");

  ConvergenceReport r = grid_convergence(k, d, hs, min_order, margin);
  Outcome o;
  o.checks = r.checks;
  Table& t = o.table;
  t.note("command", "converge");
  t.note("domain", d.key());
  t.note("min_order", min_order);
  t.header = {"h", "nodes", "lambda1", "diff", "order"};
  Series s{"lambda1", {}, {}};
  for (std::size_t i = 0; i < r.h.size(); ++i) {
    t.rows.push_back({num(r.h[i]), num(r.nodes[i]), num(r.lambda1[i]), i > 0 ? num(r.diffs[i - 1]) : "",
                      i > 1 ? num(r.orders[i - 2]) : ""});
    s.x.push_back(1.0 / r.h[i]);
    s.y.push_back(r.lambda1[i]);
  }
  o.series = {s};
  o.labels = {"grid convergence of lambda_1", "cells per unit length", "lambda_1"};
  o.report = std::move(r);
  return o;
}

inline Outcome perturb(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "limit", "family", "labels", "family_label", "track", "grid"},
               {"kernel", "limit", "family", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const DomainSpec limit = config::domain(b["limit"], "config.limit");
  const auto fam = config::domains(b["family"], "config.family");
  const auto labels = labels_or_keys(b, "labels", fam);
  const GridSpec g = config::grid(b["grid"], "config.grid");
  std::size_t track = 3;
  if (b.contains("track")) {
    const long v = config::integer(b["track"], "config.track");
    if (v < 1) config::fail("config.track", "track at least one eigenvalue");
    track = static_cast<std::size_t>(v);
  }
  const std::string family_label =
      b.contains("family_label") ? config::string(b["family_label"], "config.family_label") : "family";
  for (const auto& d : fam)
    if (d.dim() != limit.dim() || d.dim() != k.dim) config::fail("config", "kernel and domain dimensions differ");

  PerturbReport r = continuity_sweep(k, limit, fam, labels, track, g, family_label);
  Outcome o;
  o.checks = r.checks;
  Table& t = o.table;
  t.note("command", "perturb");
  t.note("family", r.family);
  t.note("limit", limit.key());
  t.note("h", r.h);
  t.note("limit_lambda1", r.limit_lambda1);
  for (std::size_t q = 0; q < r.limit_mus.size(); ++q) t.note("limit_mu" + std::to_string(q + 1), r.limit_mus[q]);
  t.note("grid_error", r.grid_error);
  t.note("margin", 1.0 + 5.0 * r.grid_error);
  t.header = {"member", "symdiff", "symdiff_subcell", "symdiff_flagged", "norm_diff", "lipschitz_bound",
              "bound_with_margin", "lambda1", "lambda1_distance"};
  for (std::size_t q = 0; q < track; ++q) t.header.push_back("mu" + std::to_string(q + 1));
  for (std::size_t q = 0; q < track; ++q) t.header.push_back("distance" + std::to_string(q + 1));
  t.header.push_back("gap_collapse");
  Series dl{"|lambda1 - lambda1(limit)|", {}, {}}, nd{"operator norm difference", {}, {}};
  for (const auto& m : r.members) {
    std::vector<std::string> row{m.label,         num(m.symdiff.value), num(m.symdiff.subcell_estimate),
                                 num(m.symdiff.flagged), num(m.norm_diff), num(m.bound),
                                 num(m.bound_with_margin), num(m.lambda1), num(m.lambda1_distance)};
    for (std::size_t q = 0; q < track; ++q) row.push_back(q < m.mus.size() ? num(m.mus[q]) : "");
    for (std::size_t q = 0; q < track; ++q) row.push_back(q < m.distances.size() ? num(m.distances[q]) : "");
    row.push_back(num(m.gap_collapse));
    t.rows.push_back(std::move(row));
    dl.x.push_back(m.symdiff.value);
    dl.y.push_back(m.lambda1_distance);
    nd.x.push_back(m.symdiff.value);
    nd.y.push_back(m.norm_diff);
  }
  o.series = {dl, nd};
  o.labels = {"continuity: " + r.family + " vs " + limit.key(), "symmetric difference measure", "distance"};
  o.report = std::move(r);
  return o;
}

inline Outcome shape_derivative_cmd(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "domain", "grid", "index", "fields", "t_fd", "boundary_samples", "gap_factor", "expect"},
               {"kernel", "domain", "grid", "fields"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const DomainSpec d = config::domain(b["domain"], "config.domain");
  const GridSpec g = config::grid(b["grid"], "config.grid");
  if (k.dim != d.dim()) config::fail("config", "kernel and domain dimensions differ");
  std::size_t idx = 0;
  if (b.contains("index")) {
    const long v = config::integer(b["index"], "config.index");
    if (v < 1) config::fail("config.index", "eigenvalue index is 1-based");
    idx = static_cast<std::size_t>(v - 1);
  }
  if (!b["fields"].is_array() || b["fields"].empty()) config::fail("config.fields", "expected a nonempty array");
  std::vector<VectorField> fields;
  for (std::size_t i = 0; i < b["fields"].size(); ++i)
    fields.push_back(config::field(b["fields"][i], "config.fields[" + std::to_string(i) + "]"));
  ShapeOptions opt;
  if (b.contains("t_fd")) {
    opt.t_fd = config::numbers(b["t_fd"], "config.t_fd");
    for (double t : opt.t_fd)
      if (!(t > 0.0)) config::fail("config.t_fd", "steps must be positive");
  }
  if (b.contains("boundary_samples"))
    opt.boundary_samples = static_cast<int>(config::integer(b["boundary_samples"], "config.boundary_samples"));
  if (b.contains("gap_factor")) opt.gap_factor = config::positive(b["gap_factor"], "config.gap_factor");
  std::vector<std::string> zero_fields;
  double zero_tol = 1e-6, rel_max = -1.0;
  if (b.contains("expect")) {
    const json& e = b["expect"];
    config::keys(e, "config.expect", {"vanishing", "vanishing_tol", "max_rel_error"});
    if (e.contains("vanishing")) zero_fields = config::strings(e["vanishing"], "config.expect.vanishing");
    if (e.contains("vanishing_tol")) zero_tol = config::positive(e["vanishing_tol"], "config.expect.vanishing_tol");
    if (e.contains("max_rel_error")) rel_max = config::positive(e["max_rel_error"], "config.expect.max_rel_error");
  }

  const ContainerGrid grid = g.cover({d});
  ShapeRun run;
  run.fields.resize(fields.size());
  parallel_for(fields.size(), [&](std::size_t i) { run.fields[i] = shape_derivative(k, d, idx, fields[i], grid, opt); });

  Outcome o;
  Table& t = o.table;
  t.note("command", "shape-derivative");
  t.note("domain", d.key());
  t.note("h", g.h);
  t.note("index", num(idx + 1));
  t.header = {"field_name", "lambda0", "mu0", "boundary_integral", "dlambda_formula", "dmu_formula", "dlambda_fd",
              "t", "rel_error", "abs_error", "forward", "backward", "gap", "discretization_error",
              "boundary_samples", "boundary_c1"};
  for (const auto& r : run.fields) {
    detail::append(o.checks, r.checks);
    for (const auto& f : r.fd) {
      const double abs_err = std::fabs(r.dlambda_formula - f.central);
      const double rel = std::fabs(f.central) > 1e-10 ? abs_err / std::fabs(f.central) : abs_err;
      t.rows.push_back({r.field_name, num(r.lambda0), num(r.mu0), num(r.boundary_integral), num(r.dlambda_formula),
                        num(r.dmu_formula), num(f.central), num(f.t), num(rel), num(abs_err), num(f.forward),
                        num(f.backward), num(r.gap), num(r.discretization_error), num(r.boundary_samples),
                        num(r.boundary_c1)});
    }
    const bool vanishing = std::find(zero_fields.begin(), zero_fields.end(), r.field_name) != zero_fields.end();
    if (vanishing) {
      o.checks.push_back({"shape", "derivative_vanishes",
                          std::fabs(r.dlambda_formula) <= zero_tol && std::fabs(r.dlambda_fd) <= zero_tol,
                          r.field_name + ": formula " + num(r.dlambda_formula) + ", fd " + num(r.dlambda_fd)});
    } else if (rel_max > 0.0) {
      o.checks.push_back({"shape", "formula_matches_fd", r.rel_error <= rel_max,
                          r.field_name + ": relative error " + num(r.rel_error) + " vs " + num(rel_max)});
    }
    if (!r.boundary_c1)
      o.checks.push_back({"shape", "boundary_c1", true, r.field_name + ": non-C1 boundary, indicative only"});
  }
  Series sf{"formula", {}, {}}, sd{"central difference", {}, {}};
  for (std::size_t i = 0; i < run.fields.size(); ++i) {
    sf.x.push_back(static_cast<double>(i + 1));
    sf.y.push_back(run.fields[i].dlambda_formula);
    sd.x.push_back(static_cast<double>(i + 1));
    sd.y.push_back(run.fields[i].dlambda_fd);
  }
  o.series = {sf, sd};
  o.labels = {"shape derivative of lambda_" + num(idx + 1) + " on " + d.key(), "field (config order)", "dlambda/dt"};
  o.report = std::move(run);
  return o;
}

inline void ranked_row(Table& t, const RankedDomain& r) {
  t.rows.push_back({r.label, r.key, num(r.measure), num(r.grid_measure), num(r.nodes), num(r.lambda1), num(r.grid_error)});
}

inline Outcome faber_krahn(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "candidates", "labels", "grid", "ordered"}, {"kernel", "candidates", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const auto cands = config::domains(b["candidates"], "config.candidates");
  const auto labels = labels_or_keys(b, "labels", cands);
  const GridSpec g = config::grid(b["grid"], "config.grid");
  const bool ordered = b.contains("ordered") && config::boolean(b["ordered"], "config.ordered");
  for (const auto& d : cands)
    if (d.dim() != k.dim) config::fail("config", "kernel and domain dimensions differ");

  FaberKrahnReport r = faber_krahn_check(k, cands, labels, g, ordered);
  Outcome o;
  o.checks = r.checks;
  Table& t = o.table;
  t.note("command", "faber-krahn");
  t.note("h", g.h);
  t.note("margin", r.margin);
  t.header = {"label", "domain", "measure", "grid_measure", "nodes", "lambda1", "grid_error"};
  ranked_row(t, r.ball);
  Series s{"lambda1", {}, {}};
  s.x.push_back(0.0);
  s.y.push_back(r.ball.lambda1);
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    ranked_row(t, r.candidates[i]);
    s.x.push_back(static_cast<double>(i + 1));
    s.y.push_back(r.candidates[i].lambda1);
  }
  o.series = {s};
  o.labels = {"lambda_1 at equal measure (0 = ball)", "candidate", "lambda_1"};
  o.report = std::move(r);
  return o;
}

inline Outcome stretch(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "domain", "a", "grid", "min_total_increase"}, {"kernel", "domain", "a", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const DomainSpec d = config::domain(b["domain"], "config.domain");
  const auto as = config::numbers(b["a"], "config.a");
  for (double a : as)
    if (!(a > 0.0)) config::fail("config.a", "stretch factors must be positive");
  const GridSpec g = config::grid(b["grid"], "config.grid");
  const double inc = b.contains("min_total_increase") ? config::number(b["min_total_increase"], "config.min_total_increase") : 0.0;
  if (k.dim != 2 || d.dim() != 2) config::fail("config", "stretching is planar");

  StretchReport r = stretch_sweep(k, d, as, g, inc);
  Outcome o;
  o.checks = r.checks;
  Table& t = o.table;
  t.note("command", "stretch");
  t.note("base", d.key());
  t.note("h", g.h);
  t.note("total_increase", r.total_increase);
  t.header = {"a", "domain", "measure", "grid_measure", "nodes", "lambda1"};
  Series s{"lambda1", {}, {}};
  for (std::size_t i = 0; i < r.a.size(); ++i) {
    const auto& row = r.rows[i];
    t.rows.push_back({num(r.a[i]), row.key, num(row.measure), num(row.grid_measure), num(row.nodes), num(row.lambda1)});
    s.x.push_back(r.a[i]);
    s.y.push_back(row.lambda1);
  }
  o.series = {s};
  o.labels = {"stretched rectangles h(x) = (a x1, x2 / a)", "a", "lambda_1"};
  o.report = std::move(r);
  return o;
}

inline Outcome two_balls(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "radius", "separations", "grid"}, {"kernel", "radius", "separations", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const double radius = config::positive(b["radius"], "config.radius");
  const auto seps = config::numbers(b["separations"], "config.separations");
  for (double s : seps)
    if (!(s > 0.0)) config::fail("config.separations", "balls must not overlap");
  const GridSpec g = config::grid(b["grid"], "config.grid");

  TwoBallReport r = hong_krahn_szego_check(k, radius, seps, g);
  Outcome o;
  o.checks = r.checks;
  Table& t = o.table;
  t.note("command", "two-balls");
  t.note("radius", r.radius);
  t.note("h", g.h);
  t.note("lambda1_single", r.lambda1_single);
  t.note("lambda2_double_ball", r.lambda2_double_ball);
  t.header = {"requested_separation", "separation", "nodes", "lambda1", "lambda2", "pair_gap", "decoupled"};
  Series s{"lambda2(union)", {}, {}};
  for (const auto& row : r.rows) {
    t.rows.push_back({num(row.requested_separation), num(row.separation), num(row.nodes), num(row.lambda1),
                      num(row.lambda2), num(row.pair_gap), num(row.decoupled)});
    s.x.push_back(row.separation);
    s.y.push_back(row.lambda2);
  }
  o.series = {s};
  o.labels = {"two identical balls", "separation", "lambda_2"};
  o.report = std::move(r);
  return o;
}

inline Outcome perforated(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "base", "hole_fraction", "hole", "eps", "grid"},
               {"kernel", "base", "hole_fraction", "eps", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const auto [base, dim] = config::axis_box(b["base"], "config.base");
  const double f = config::number(b["hole_fraction"], "config.hole_fraction");
  if (!(f >= 0.0 && f < 1.0)) config::fail("config.hole_fraction", "hole fraction must lie in [0, 1)");
  HoleShape hole = HoleShape::box;
  if (b.contains("hole")) {
    const std::string h = config::string(b["hole"], "config.hole");
    if (h == "ball") hole = HoleShape::ball;
    else if (h != "box") config::fail("config.hole", "hole must be 'box' or 'ball'");
  }
  const auto eps = config::numbers(b["eps"], "config.eps");
  const GridSpec g = config::grid(b["grid"], "config.grid");
  if (dim != k.dim) config::fail("config", "kernel and base dimensions differ");

  PerforatedReport r = perforated_limit(k, base, f, hole, eps, g);
  Outcome o;
  o.checks = r.checks;
  Table& t = o.table;
  t.note("command", "perforated");
  t.note("hole_fraction", r.hole_fraction);
  t.note("chi", r.chi);
  t.note("h", r.h);
  t.note("lambda1_solid", r.lambda1_solid);
  t.note("mu1_solid", r.mu1_solid);
  t.note("beta1_hat", r.beta1_hat);
  t.note("beta1_limit", r.beta1_limit);
  t.note("grid_error", r.grid_error);
  t.note("match_tolerance", r.match_tolerance);
  std::string matched = "none";
  for (const auto& v : r.variants) {
    t.note("variant_" + v.name + "_target", v.target);
    t.note("variant_" + v.name + "_eigenvalue", v.eigenvalue);
    t.note("variant_" + v.name + "_residual", v.residual);
    t.note("variant_" + v.name + "_positive", num(v.eigenfunction_positive));
    if (v.matches) matched = matched == "none" ? v.name : matched + "+" + v.name;
  }
  t.note("matched_variant", matched);
  t.header = {"eps", "nodes", "lambda1", "diff"};
  Series s{"lambda1(eps)", {}, {}}, beta{"beta1_hat", {}, {}};
  for (std::size_t i = 0; i < r.eps_list.size(); ++i) {
    t.rows.push_back({num(r.eps_list[i]), num(r.nodes[i]), num(r.lambda1_eps[i]), i > 0 ? num(r.successive_diffs[i - 1]) : ""});
    s.x.push_back(r.eps_list[i]);
    s.y.push_back(r.lambda1_eps[i]);
  }
  beta.x = {0.0, r.eps_list.front()};
  beta.y = {r.beta1_hat, r.beta1_hat};
  o.series = {s, beta};
  o.labels = {"perforated domains, hole fraction " + detail::tick(f), "eps", "lambda_1"};
  o.report = std::move(r);
  return o;
}

inline Outcome pullback(const ExperimentConfig& c) {
  const json& b = c.body;
  config::keys(b, "config", {"kernel", "domain", "map", "unweighted_map", "grid", "count", "rel_tol"},
               {"kernel", "domain", "map", "grid"});
  const KernelSpec k = config::kernel(b["kernel"], "config.kernel");
  const DomainSpec d = config::domain(b["domain"], "config.domain");
  const MapSpec m = config::map(b["map"], "config.map", d.dim());
  const GridSpec g = config::grid(b["grid"], "config.grid");
  std::size_t count = 3;
  if (b.contains("count")) {
    const long v = config::integer(b["count"], "config.count");
    if (v < 1) config::fail("config.count", "compare at least one eigenvalue");
    count = static_cast<std::size_t>(v);
  }
  const double rel_tol = b.contains("rel_tol") ? config::positive(b["rel_tol"], "config.rel_tol") : 1e-3;
  if (k.dim != d.dim()) config::fail("config", "kernel and domain dimensions differ");

  PullbackRun run;
  run.map = m.describe();
  run.comparison = compare_pullback_with_image(k, d, m, g.h, count);
  Outcome o;
  const auto& cmp = run.comparison;
  o.checks.push_back({"shape", "weighted_selfadjoint", cmp.weighted_residual < 1e-12,
                      run.map + ": residual " + num(cmp.weighted_residual)});
  for (std::size_t i = 0; i < cmp.rel_diff.size(); ++i)
    o.checks.push_back({"shape", "pullback_matches_direct", cmp.rel_diff[i] <= rel_tol,
                        "mu" + num(i + 1) + ": relative difference " + num(cmp.rel_diff[i])});
  if (b.contains("unweighted_map")) {
    const MapSpec u = config::map(b["unweighted_map"], "config.unweighted_map", d.dim());
    run.unweighted_map = u.describe();
    const PullbackOperator p = pullback_operator(k, d, u, g.cover({d}));
    run.weighted_residual_second_map = weighted_selfadjointness_check(p.matrix(), p.weights);
    run.unweighted_residual = weighted_selfadjointness_check(p.matrix(), std::vector<double>(p.size(), 1.0));
    o.checks.push_back({"shape", "weighted_selfadjoint", run.weighted_residual_second_map < 1e-12,
                        run.unweighted_map + ": residual " + num(run.weighted_residual_second_map)});
    o.checks.push_back({"shape", "unweighted_not_selfadjoint", run.unweighted_residual > 1e-6,
                        run.unweighted_map + ": unweighted residual " + num(run.unweighted_residual)});
  }

  Table& t = o.table;
  t.note("command", "pullback");
  t.note("domain", d.key());
  t.note("map", run.map);
  t.note("h", g.h);
  t.note("base_nodes", num(cmp.base_nodes));
  t.note("image_nodes", num(cmp.image_nodes));
  t.note("weighted_residual", cmp.weighted_residual);
  if (!run.unweighted_map.empty()) {
    t.note("unweighted_map", run.unweighted_map);
    t.note("unweighted_map_weighted_residual", run.weighted_residual_second_map);
    t.note("unweighted_residual", run.unweighted_residual);
  }
  t.header = {"index", "pullback_mu", "direct_mu", "rel_diff"};
  Series sp{"pull-back", {}, {}}, sd{"direct on h(Omega)", {}, {}};
  for (std::size_t i = 0; i < cmp.rel_diff.size(); ++i) {
    t.rows.push_back({num(i + 1), num(cmp.pullback_mus[i]), num(cmp.direct_mus[i]), num(cmp.rel_diff[i])});
    sp.x.push_back(static_cast<double>(i + 1));
    sp.y.push_back(cmp.pullback_mus[i]);
    sd.x.push_back(static_cast<double>(i + 1));
    sd.y.push_back(cmp.direct_mus[i]);
  }
  o.series = {sp, sd};
  o.labels = {"pull-back spectrum vs direct assembly", "index", "mu"};
  o.report = std::move(run);
  return o;
}

}  // namespace commands

/// Runs a parsed configuration. Binary side outputs (the optional matrix
/// dump) go to out_dir; the table and plot are returned for the caller.
inline Outcome execute(const ExperimentConfig& c, const std::filesystem::path& out_dir = ".") {
  Outcome o;
  if (c.command == "kernels") o = commands::kernels(c);
  else if (c.command == "spectrum") o = commands::spectrum(c, out_dir);
  else if (c.command == "converge") o = commands::converge(c);
  else if (c.command == "perturb") o = commands::perturb(c);
  else if (c.command == "shape-derivative") o = commands::shape_derivative_cmd(c);
  else if (c.command == "faber-krahn") o = commands::faber_krahn(c);
  else if (c.command == "stretch") o = commands::stretch(c);
  else if (c.command == "two-balls") o = commands::two_balls(c);
  else if (c.command == "perforated") o = commands::perforated(c);
  else if (c.command == "pullback") o = commands::pullback(c);
  else throw ConfigError("config.command: unknown command '" + c.command + "'");
  o.command = c.command;
  return o;
}

/// Exit status of one run: 0 success, 1 usage/config/precondition error,
/// 2 a failed invariant.
struct RunResult {
  int exit_code = 0;
  std::string message;
  std::optional<Outcome> outcome;
  std::filesystem::path csv;
  std::filesystem::path svg;
};

inline RunResult run_config(const std::string& config_path, const std::filesystem::path& out_dir) {
  RunResult rr;
  try {
    const ExperimentConfig c = load_config(config_path);
    std::filesystem::create_directories(out_dir);
    Outcome o = execute(c, out_dir);
    rr.csv = out_dir / c.output.csv;
    write_atomic(rr.csv, o.table.csv());
    if (!c.output.svg.empty()) {
      rr.svg = out_dir / c.output.svg;
      emit_plot(o.series, o.labels, rr.svg);
    }
    const auto failed = o.failures();
    if (!failed.empty()) {
      rr.exit_code = 2;
      for (const auto& f : failed) rr.message += f.module + ": " + f.name + ": " + f.detail + "\n";
    }
    rr.outcome = std::move(o);
  } catch (const ConfigError& e) {
    rr.exit_code = 1;
    rr.message = std::string("config: ") + e.what() + "\n";
  } catch (const Error& e) {
    rr.exit_code = 1;
    rr.message = std::string(e.what()) + "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    rr.exit_code = 1;
    rr.message = std::string("cli: writable_path: ") + e.what() + "\n";
  }
  return rr;
}

}  // namespace nlspec
