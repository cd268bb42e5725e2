#pragma once

// Subcommands behind the nearnormal tool. Each returns the process exit code:
// 0 success, 1 I/O or parse failure (or bad arguments), 2 regime failure
// (gate, margin, dispersion, near-unitarity, oracle dimension limit).

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "nearnormal/ensemble.hpp"
#include "nearnormal/errors.hpp"
#include "nearnormal/io.hpp"
#include "nearnormal/lattice.hpp"
#include "nearnormal/oracle.hpp"
#include "nearnormal/pipeline.hpp"

namespace nearnormal::cli {

struct ApproximateArgs {
  std::string input;
  double epsilon = PipelineConfig{}.epsilon_target;
  bool force = false;
  std::string emit_matrix;
  std::string out;
};

struct EnsembleArgs {
  EnsembleSpec spec;
  std::string csv;
  std::string records;
  bool resume = false;
  int jobs = 1;
  bool oracle = true;
  int restarts = 200;
  bool timing = false;
  double epsilon = PipelineConfig{}.epsilon_target;
  bool force = false;
};

struct OracleArgs {
  std::string input;
  int restarts = 200;
};

struct DemoArgs {
  std::string name;
  Index n = 4;
};

inline const std::vector<std::string>& demo_cases() {
  static const std::vector<std::string> cases{"jordan", "pauli", "lattice-idempotent"};
  return cases;
}

/// Default worker count: NEARNORMAL_JOBS when it parses as a positive integer, else 1.
inline int default_jobs(const char* env) {
  if (env == nullptr) return 1;
  try {
    size_t pos = 0;
    const int v = std::stoi(env, &pos);
    return pos == std::string(env).size() && v > 0 ? v : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

namespace detail {

inline int exit_code(const Error& e) { return dynamic_cast<const RegimeError*>(&e) != nullptr ? 2 : 1; }

template <class F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline void print_surgery(std::ostream& os, const char* name, const SurgeryReport& r) {
  os << "  " << name << ": active holes " << r.active_holes << "/" << r.holes.size() << ", ||[P,T]|| "
     << r.input_commutator << " -> " << r.output_commutator << ", move " << r.distance << ", avoidance "
     << r.min_avoidance << ", block residual " << r.max_block_residual << ", line residual " << r.max_line_residual
     << "\n";
}

}  // namespace detail

/// Human-readable stage trace of a pipeline report.
inline void print_trace(std::ostream& os, const Report& r) {
  os << std::setprecision(6);
  os << "input: n = " << r.n << ", ||A|| = " << r.norm_A << ", ||[A,A*]|| = " << r.comm_norm
     << ", lower bound = " << r.lower_bound << "\n";
  if (r.bypassed) {
    os << "bypass: A is normal within tolerance, every stage is the identity\n";
  } else {
    const ExtensionDiagnostics& e = r.extension;
    os << "extension: s = " << e.scale << ", ||N|| = " << e.norm_N << ", ||A (+) N - T|| = " << e.distance
       << " (K = " << e.constant_K << "), ||[P,T]|| = " << e.commutator_P << ", ||[T,T*]|| = " << e.normality_T
       << ", bands " << e.band_min << ".." << e.band_max << "\n";
    const LatticeRunTrace& l = r.lattice;
    os << "lattice: square corner (" << l.omega_corner.real() << ", " << l.omega_corner.imag() << "), side "
       << l.omega_side << ", ||[P,T1]|| = " << l.comm_T1 << "\n";
    detail::print_surgery(os, "round 1", l.round1);
    os << "  snap 1: move " << l.move_snap1 << ", ||[P,T2]|| = " << l.comm_T2 << ", centre margin "
       << l.center_margin << ", line condition " << l.line_condition << "\n";
    detail::print_surgery(os, "round 2", l.round2);
    os << "  snap 2: move " << l.move_snap2 << ", ||T - T0|| = " << l.distance << ", ||[P,T0]|| = " << l.comm_T0
       << ", lattice residual " << l.lattice_residual << "\n";
    os << "final pinch: dispersion " << r.dispersion << (r.fallback ? " (fallback clusters)" : "")
       << ", spacing " << r.lattice_spacing << ", lattice residual " << r.lattice_residual << "\n";
  }
  os << "output: distance = " << r.distance << ", ratio = " << r.ratio << ", ||[X',Y']|| = " << r.pair_commutator
     << ", normality residual = " << r.normality_residual << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
}

inline int cmd_approximate(const ApproximateArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const MatrixFile mf = read_matrix_file(args.input);
    PipelineConfig cfg;
    cfg.epsilon_target = args.epsilon;
    cfg.force = args.force;
    const auto [ap, rep] = approximate_normal(mf.a, cfg);
    nlohmann::json rec = run_record(rep, cfg);
    rec["input"] = {{"path", args.input}, {"label", mf.label}};
    if (!args.emit_matrix.empty()) write_matrix_file(args.emit_matrix, ap, mf.label.empty() ? "" : mf.label + "'");
    const std::string text = rec.dump(1) + "\n";
    if (args.out.empty()) out << text;
    else write_text(args.out, text);
    return 0;
  });
}

inline int cmd_ensemble(const EnsembleArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (args.spec.dims.empty() || args.spec.scales.empty() || args.spec.trials < 1)
      throw PreconditionError("ensemble", "need at least one dim, one scale and one trial");
    for (Index d : args.spec.dims)
      if (d < 1) throw PreconditionError("ensemble", "dims must be positive", static_cast<double>(d));
    for (double s : args.spec.scales)
      if (!(s > 0.0)) throw PreconditionError("ensemble", "scales must be positive", s);
    EnsembleOptions opt;
    opt.config.epsilon_target = args.epsilon;
    opt.config.force = args.force;
    opt.jobs = args.jobs;
    opt.oracle = args.oracle;
    opt.oracle_restarts = args.restarts;
    opt.timing = args.timing;
    // Fail on an unwritable CSV before spending time on the runs.
    if (!args.csv.empty()) write_text(args.csv, std::string(kEnsembleHeader) + "\n");
    const auto results = run_ensemble(args.spec, opt, args.records, args.resume);
    const std::string csv = ensemble_csv(results, args.timing);
    if (args.csv.empty()) out << csv;
    else write_text(args.csv, csv);
    int failed = 0;
    for (const auto& r : results)
      if (!r.ok) ++failed;
    if (failed > 0) err << "warning: " << failed << " trial(s) failed, see the records for stages\n";
    return 0;
  });
}

inline int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const MatrixFile mf = read_matrix_file(args.input);
    const OracleResult o = nearest_normal_search(mf.a, args.restarts);
    const double baseline = op_norm(mf.a - schur_baseline(mf.a));
    const auto [ap, rep] = approximate_normal(mf.a);
    out << std::setprecision(10);
    out << "oracle " << o.distance << "\n";
    out << "schur_baseline " << baseline << "\n";
    out << "lower_bound " << lower_bound(mf.a) << "\n";
    out << "pipeline " << rep.distance << "\n";
    return 0;
  });
}

inline int cmd_demo(const DemoArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (args.n < 1) throw PreconditionError("demo", "n must be positive", static_cast<double>(args.n));
    if (args.name == "jordan") {
      Matrix a = Matrix::Zero(args.n, args.n);
      for (Index i = 0; i + 1 < args.n; ++i) a(i, i + 1) = 1.0;
      out << "case jordan, n = " << args.n << "\n";
      print_trace(out, approximate_normal(a).second);
      return 0;
    }
    if (args.name == "pauli") {
      Matrix x(2, 2), y(2, 2);
      x << 0.0, 1.0, 1.0, 0.0;
      y << 0.0, -kI, kI, 0.0;
      out << "case pauli: X = sigma_x, Y = 0.1 sigma_y (pair form)\n";
      const PairResult pr = hermitian_pair_form(x, 0.1 * y);
      print_trace(out, pr.report);
      out << "pair: ||[X,Y]|| = " << pr.report.input_pair_commutator << ", ||X-X'|| + ||Y-Y'|| = "
          << pr.report.distance << "\n";
      return 0;
    }
    if (args.name == "lattice-idempotent") {
      ComplexVector z(args.n);
      for (Index i = 0; i < args.n; ++i) z[i] = Complex(static_cast<double>(i % 3), static_cast<double>(i / 3));
      const Matrix a = z.asDiagonal();
      out << "case lattice-idempotent: A = diag of Gaussian integers, n = " << args.n << "\n";
      print_trace(out, approximate_normal(a).second);
      const LatticeResult lr = lattice_approximate(embed_diag(a, a));
      const LatticeRunTrace& l = lr.trace;
      out << "lattice stage on A (+) A: active holes " << l.round1.active_holes << " + " << l.round2.active_holes
          << ", moves " << l.move_round1 << ", " << l.move_snap1 << ", " << l.move_round2 << ", " << l.move_snap2
          << ", ||T - T0|| = " << l.distance << "\n";
      return 0;
    }
    err << "error: unknown case '" << args.name << "'; known cases:";
    for (const auto& c : demo_cases()) err << " " << c;
    err << "\n";
    return 1;
  });
}

}  // namespace nearnormal::cli
