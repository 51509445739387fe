#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "symfact/antilinear.hpp"
#include "symfact/cli.hpp"
#include "symfact/eigen.hpp"
#include "symfact/factorization.hpp"
#include "symfact/oracle.hpp"
#include "symfact/rng.hpp"

namespace symfact::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json config_json(const Options& opt) {
  const auto& c = opt.cfg;
  return {{"eig_tol", c.eig_tol},     {"iso_tol", c.iso_tol},       {"det_tol", c.det_tol},
          {"verify_tol", c.verify_tol}, {"max_qr_iters", c.max_qr_iters}, {"seed", c.seed},
          {"rng", std::string(Rng::kVersion)}, {"oracle", opt.oracle}, {"selfadjoint", opt.selfadjoint}};
}

Json residual_json(const Residual& r) { return {{"absolute", r.absolute}, {"relative", r.relative}}; }

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const NotSymmetricError*>(&e)) return "NotSymmetric";
  if (dynamic_cast<const DefectiveOperatorError*>(&e)) return "DefectiveOperator";
  if (dynamic_cast<const SingularMatrixError*>(&e)) return "SingularMatrix";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  return "Error";
}

bool is_input_error(const std::exception& e) {
  return dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const NotSymmetricError*>(&e) ||
         dynamic_cast<const DefectiveOperatorError*>(&e);
}

struct Loaded {
  Matrix m;
  std::string sha;
};

Loaded load(const std::string& path) {
  const std::string text = read_file(path);
  return {parse_matrix(text), sha256_hex(text)};
}

Matrix require_square(Matrix m, const std::string& path) {
  if (!m.square()) throw DimensionError("'" + path + "' must hold a square matrix");
  return m;
}

// Runs one command body; exceptions become an error report.
Report guarded(std::string_view name, const std::vector<std::string>& args, const Options& opt,
               const std::function<Json(Json& body)>& fn) {
  Report r;
  r.body = {{"command", {{"name", std::string(name)}, {"args", args}}},
            {"config", config_json(opt)},
            {"input_sha256", nullptr}};
  try {
    Json result = fn(r.body);
    const bool passed = result.value("passed", true);
    r.body["result"] = std::move(result);
    r.body["status"] = passed ? "pass" : "fail";
    r.exit_code = passed ? kPass : kNumericalFailure;
  } catch (const std::exception& e) {
    r.body["result"] = {{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
    r.body["status"] = "error";
    r.exit_code = is_input_error(e) ? kInputError : kNumericalFailure;
  }
  return r;
}

Json trace_json(const RecursionTrace& t) {
  Json levels = Json::array();
  for (const auto& l : t.levels) {
    Json j = {{"dim", l.dim},
              {"branch", std::string(to_string(l.branch))},
              {"lambda", to_json(l.lambda)},
              {"ete", to_json(l.ete)},
              {"x_strategy", std::string(to_string(l.x_strategy))},
              {"offblock", l.offblock}};
    if (l.alpha) j["alpha"] = *l.alpha;
    if (l.det_d) j["det_d"] = to_json(*l.det_d);
    levels.push_back(std::move(j));
  }
  return levels;
}

Json oracle_json(const Matrix& c, const FactorizationResult& primary, const ToleranceConfig& cfg) {
  const auto r = oracle::factor_via_ldlt(c);
  if (const auto* b = std::get_if<oracle::Breakdown>(&r)) {
    return {{"outcome", "breakdown"}, {"step", b->step}, {"remaining_norm", b->remaining_norm}};
  }
  const Verification v = verify_factorization(c, std::get<Matrix>(r), cfg);
  return {{"outcome", "factored"},
          {"residual", v.residual},
          {"relative_residual", v.relative_residual},
          {"passed", v.passed},
          {"agreement", v.passed == primary.passed}};
}

Json values_json(const std::vector<Complex>& values, const std::vector<std::size_t>& mult) {
  Json out = Json::array();
  for (std::size_t k = 0; k < values.size(); ++k)
    out.push_back({{"value", to_json(values[k])}, {"multiplicity", mult[k]}});
  return out;
}

// Eigenvalues grouped with the biorthonormal clustering gap, for operators
// whose eigenbasis is incomplete.
Json grouped_eigenvalues(const Matrix& h, const ToleranceConfig& cfg) {
  std::vector<Complex> vals = eigenvalues(h, cfg);
  std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  const double gap = cluster_threshold(h);
  std::vector<Complex> values;
  std::vector<std::size_t> mult;
  std::vector<bool> used(vals.size(), false);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (used[i]) continue;
    std::vector<Complex> group{vals[i]};
    used[i] = true;
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t j = 0; j < vals.size(); ++j) {
        if (used[j]) continue;
        if (std::any_of(group.begin(), group.end(), [&](Complex g) { return std::abs(g - vals[j]) <= gap; })) {
          group.push_back(vals[j]);
          used[j] = true;
          grew = true;
        }
      }
    }
    Complex sum{};
    for (Complex g : group) sum += g;
    values.push_back(sum / static_cast<double>(group.size()));
    mult.push_back(group.size());
  }
  return values_json(values, mult);
}

}  // namespace

Report cmd_factor(const std::string& path, const Options& opt) {
  return guarded("factor", {path}, opt, [&](Json& body) {
    const Loaded in = load(path);
    body["input_sha256"] = in.sha;
    const Matrix c = require_square(in.m, path);
    const FactorizationResult f = factor_symmetric(c, opt.cfg);
    Json result = {{"v", to_json(f.v)},
                   {"residual", f.residual},
                   {"relative_residual", f.relative_residual},
                   {"passed", f.passed},
                   {"trace", trace_json(f.trace)}};
    if (opt.oracle) result["oracle"] = oracle_json(c, f, opt.cfg);
    if (opt.emit_v) {
      std::ofstream out(*opt.emit_v, std::ios::binary);
      if (!(out << format_matrix(f.v))) throw ValidationError("cannot write '" + *opt.emit_v + "'");
      result["v_path"] = *opt.emit_v;
    }
    return result;
  });
}

Report cmd_verify(const std::string& path_c, const std::string& path_v, const Options& opt) {
  return guarded("verify", {path_c, path_v}, opt, [&](Json& body) {
    const Loaded c = load(path_c);
    body["input_sha256"] = c.sha;
    const Loaded v = load(path_v);
    const Verification ver = verify_factorization(require_square(c.m, path_c), v.m, opt.cfg);
    return Json{{"v_sha256", v.sha},
                {"residual", ver.residual},
                {"relative_residual", ver.relative_residual},
                {"passed", ver.passed}};
  });
}

Report cmd_analyze(const std::string& path, const Options& opt) {
  return guarded("analyze", {path}, opt, [&](Json& body) {
    const Loaded in = load(path);
    body["input_sha256"] = in.sha;
    const Matrix h = require_square(in.m, path);
    require_finite(h, "analyze");
    BiorthonormalSystem sys;
    try {
      sys = biorthonormal_system(h, opt.cfg);
    } catch (const DefectiveOperatorError&) {
      return Json{{"diagonalizable", false}, {"eigenvalues", grouped_eigenvalues(h, opt.cfg)}};
    }
    const double biorth = (sys.phi().adjoint() * sys.psi() - Matrix::identity(sys.dim)).frobenius_norm();
    Json result = {{"diagonalizable", true},
                   {"eigenvalues", values_json(sys.level_values(), sys.multiplicities())},
                   {"biorthonormality_residual", biorth}};
    const auto pairing = spectrum_pairing(sys);
    if (const auto* bad = std::get_if<Unpairable>(&pairing)) {
      Json offending = Json::array();
      for (Complex z : bad->offending) offending.push_back(to_json(z));
      result["pairing"] = {{"paired", false}, {"offending", offending}};
      return result;
    }
    const auto& p = std::get<SpectrumPairing>(pairing);
    std::vector<bool> real = p.real;
    result["pairing"] = {{"paired", true}, {"partner", p.partner}, {"real", real}};
    const AntilinearOp n = build_antilinear_symmetry(sys, p);
    const Residual comm = check_commutes(h, n);
    const double cond = condition_estimate(n.m);
    const bool passed = comm.relative <= opt.cfg.verify_tol && cond <= 1e6;
    result["symmetry"] = {{"n", to_json(n.m)},
                          {"commutation_residual", residual_json(comm)},
                          {"condition", cond}};
    result["passed"] = passed;
    return result;
  });
}

Report cmd_canonical(const std::string& path, const Options& opt) {
  return guarded("canonical", {path}, opt, [&](Json& body) {
    const Loaded in = load(path);
    body["input_sha256"] = in.sha;
    const Matrix h = require_square(in.m, path);
    Json result;
    AntilinearOp t;
    if (opt.selfadjoint) {
      t = canonical_t_selfadjoint(h, opt.cfg);
      const Residual inv = check_involution(t);
      const Residual comm = check_commutes(h, t);
      result["involution_residual"] = residual_json(inv);
      result["commutation_residual"] = residual_json(comm);
    } else {
      const BiorthonormalSystem sys = biorthonormal_system(h, opt.cfg);
      t = build_t(sys, identity_coeffs(sys));
    }
    const Residual ph = check_pseudo_hermitian(h, t);
    const Residual herm = hermiticity_residual(t);
    result["m"] = to_json(t.m);
    result["pseudo_hermiticity_residual"] = residual_json(ph);
    result["hermiticity_residual"] = residual_json(herm);
    bool passed = true;
    for (const char* key : {"pseudo_hermiticity_residual", "hermiticity_residual", "involution_residual",
                            "commutation_residual"}) {
      if (result.contains(key)) passed = passed && result[key]["relative"].get<double>() <= opt.cfg.verify_tol;
    }
    result["passed"] = passed;
    return result;
  });
}

std::vector<Report> run_batch(std::string_view command, const std::vector<std::string>& paths,
                              const Options& opt) {
  using Fn = Report (*)(const std::string&, const Options&);
  Fn fn = nullptr;
  if (command == "factor") fn = cmd_factor;
  else if (command == "analyze") fn = cmd_analyze;
  else if (command == "canonical") fn = cmd_canonical;
  else throw ValidationError("run_batch: unknown command '" + std::string(command) + "'");

  std::vector<std::future<Report>> pending;
  pending.reserve(paths.size());
  for (const auto& p : paths) pending.push_back(std::async(std::launch::async, fn, p, opt));
  std::vector<Report> out;
  out.reserve(paths.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

int render(const std::vector<Report>& reports, Format format, std::string& out) {
  int code = kPass;
  for (const auto& r : reports) code = std::max(code, r.exit_code);
  if (format == Format::Text) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i > 0) out += "\n";
      out += dump_text(reports[i].body);
    }
    return code;
  }
  if (reports.size() == 1) {
    out += dump_json(reports.front().body);
  } else {
    Json all = Json::array();
    for (const auto& r : reports) all.push_back(r.body);
    out += dump_json(all);
  }
  return code;
}

int run_cli(int argc, const char* const* argv, std::string& out, std::string& err) {
  Options opt;
  if (const char* env = std::getenv("SYMFACT_SEED")) {
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), opt.cfg.seed);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      err += "SYMFACT_SEED must be an unsigned 64-bit integer\n";
      return kInputError;
    }
  }

  CLI::App app{"Complex symmetric V V^T factorization and antilinear operator toolkit", "symfact"};
  app.require_subcommand(1);
  std::string format = "json";
  std::vector<std::string> paths;
  std::string path_c;
  std::string path_v;
  std::string emit_v;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", opt.cfg.verify_tol, "Relative residual bound (verify_tol)")->capture_default_str();
    sub->add_option("--iso-tol", opt.cfg.iso_tol, "Isotropy threshold on |e^T e|")->capture_default_str();
    sub->add_option("--det-tol", opt.cfg.det_tol, "Acceptance threshold for |det D|")->capture_default_str();
    sub->add_option("--seed", opt.cfg.seed, "Seed for every random stream")->capture_default_str();
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
  };

  auto* factor = app.add_subcommand("factor", "Factor C = V V^T");
  common(factor);
  factor->add_option("paths", paths, "Matrix files")->required();
  factor->add_flag("--oracle", opt.oracle, "Also run the LDL^T oracle and report agreement");
  factor->add_option("--emit-v", emit_v, "Write V to this file (single input only)");

  auto* verify = app.add_subcommand("verify", "Check C = V V^T");
  common(verify);
  verify->add_option("c", path_c, "Matrix C")->required();
  verify->add_option("v", path_v, "Factor V")->required();

  auto* analyze = app.add_subcommand("analyze", "Spectrum, diagonalizability and antilinear symmetry");
  common(analyze);
  analyze->add_option("paths", paths, "Matrix files")->required();

  auto* canonical = app.add_subcommand("canonical", "Canonical Hermitian antilinear T with H^* = T H T^{-1}");
  common(canonical);
  canonical->add_option("paths", paths, "Matrix files")->required();
  canonical->add_flag("--selfadjoint", opt.selfadjoint, "H is self-adjoint: T = Psi Psi^T with T^2 = I");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream r;
    const int code = app.exit(e, o, r);
    out += o.str();
    err += r.str();
    return code == 0 ? kPass : kInputError;
  }

  try {
    opt.cfg.validate();
  } catch (const ValidationError& e) {
    err += std::string(e.what()) + "\n";
    return kInputError;
  }
  opt.format = format == "text" ? Format::Text : Format::Json;
  if (!emit_v.empty()) {
    if (paths.size() != 1) {
      err += "--emit-v needs exactly one input file\n";
      return kInputError;
    }
    opt.emit_v = emit_v;
  }

  std::vector<Report> reports;
  if (verify->parsed()) {
    reports.push_back(cmd_verify(path_c, path_v, opt));
  } else {
    const std::string name = factor->parsed() ? "factor" : analyze->parsed() ? "analyze" : "canonical";
    reports = run_batch(name, paths, opt);
  }
  return render(reports, opt.format, out);
}

}  // namespace symfact::cli
