#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "pcfactor/index_engine.hpp"
#include "pcfactor/json_io.hpp"
#include "pcfactor/linalg.hpp"
#include "pcfactor/monodromy.hpp"
#include "pcfactor/reducibility.hpp"
#include "pcfactor/resolver.hpp"
#include "pcfactor/symbol.hpp"

namespace {

using nlohmann::json;
using namespace pcfactor;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& json_out) {
  if (json_out.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(json_out, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot open output file: " + json_out);
  out << text << "\n";
}

json cx_out(Cx v) { return json::array({v.real(), v.imag()}); }

json mat_out(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(cx_out(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct CommonFlags {
  double p = 2.0;
  bool p_set = false;
  double rel_tol = 1e-10;
  bool rel_tol_set = false;
  double scan_radius = 5.0;
  std::string json_out;
  std::uint64_t seed = 1;
};

IntegratorConfig integrator_for(const CommonFlags& flags) {
  IntegratorConfig cfg;
  cfg.rel_tol = flags.rel_tol;
  cfg.abs_tol = std::min(1e-12, flags.rel_tol * 0.01);
  return cfg;
}

ResolverConfig resolver_config_for(const CommonFlags& flags) {
  ResolverConfig cfg;
  cfg.scan_radius = flags.scan_radius;
  if (flags.rel_tol_set) cfg.integ = integrator_for(flags);
  return cfg;
}

int run_analyze(const std::string& input, bool do_resolve, const CommonFlags& flags) {
  std::string text = read_file(input);
  PiecewiseSymbol symbol;
  if (classify_input(text) == InputKind::System) {
    symbol = symbol_from_system(system_from_json(text), flags.p, integrator_for(flags));
  } else {
    symbol = symbol_from_json(text);
    if (flags.p_set) symbol.p = flags.p;
  }

  AnalysisReport rep;
  rep.p = symbol.p;
  rep.phi = phi_criterion(symbol);
  if (!rep.phi.ok) {
    emit(analysis_to_json(rep), flags.json_out);
    fail(ErrorCode::BranchOnBoundary, "symbol fails the solvability criterion");
  }
  DataPair data = extract_data(symbol);
  rep.data = data;
  const int m = symbol.arc_count();
  if (data.n == 1) {
    IndexResult r;
    r.kind = IndexKind::Determined;
    r.indices = {data.kappa};
    r.total = data.kappa;
    r.gap_bound = index_gap_bound(1, m).max_gap;
    rep.indices = r;
  } else if (data.n == 2) {
    rep.red2 = classify2(data);
    rep.indices = m == 4 ? indices_2x4(*rep.red2, data) : indices_2xm(*rep.red2, data.kappa, m);
  } else if (data.n == 3 && m == 3) {
    rep.red3 = classify3(data);
    rep.indices = indices_3x3(*rep.red3, data);
  }
  if (do_resolve && rep.indices && rep.indices->kind == IndexKind::Dichotomy &&
      rep.indices->request) {
    rep.verdict = resolve(*rep.indices->request, resolver_config_for(flags));
    if (rep.verdict->extremal_confirmed) {
      rep.indices->kind = IndexKind::Determined;
      rep.indices->indices = rep.indices->option_b;
    }
  }
  emit(analysis_to_json(rep), flags.json_out);
  return 0;
}

int run_generate(const std::string& shape, std::vector<long long> indices, int m,
                 unsigned coupling_mask, bool coupling_on, bool inner_lower,
                 const CommonFlags& flags) {
  Rng rng(flags.seed);
  const double lo = strip_lo(flags.p);
  RationalSystem sys;
  if (shape == "extremal") {
    const int n = int(indices.size());
    if (n < 2 || n > 3) fail(ErrorCode::InvalidArgument, "extremal shape needs 2 or 3 indices");
    long long gap = indices[0] - indices[n - 1];
    long long per = n == 2 ? gap : gap / 2;
    if (m == 0) m = int(per) + 2;
    for (int j = 0; j < n; ++j)
      if (indices[j] != indices[n - 1] + (long long)(n - 1 - j) * (m - 2))
        fail(ErrorCode::InvalidArgument, "extremal indices must step uniformly by m-2");
    auto eps = draw_extremal_exponents(n, m, indices[n - 1], lo, rng);
    sys = generate_extremal(n, m, indices[n - 1], eps, rng);
  } else {
    if (m == 0) m = 3;
    std::vector<Cx> sing = default_singularities(m);
    auto eps = draw_exponent_rows(int(indices.size()), m, indices, lo, rng);
    if (shape == "triangular2") {
      sys = generate_triangular_2(sing, indices, eps, rng);
    } else if (shape == "triangular3") {
      sys = generate_triangular_3(sing, indices, eps, coupling_mask, rng);
    } else if (shape == "block12") {
      sys = generate_block12_3(sing, indices, eps, coupling_on, inner_lower, rng);
    } else if (shape == "block21") {
      sys = generate_block21_3(sing, indices, eps, coupling_on, inner_lower, rng);
    } else {
      fail(ErrorCode::InvalidArgument, "unknown shape: " + shape);
    }
  }
  emit(system_to_json(sys), flags.json_out);
  return 0;
}

int run_monodromy(const std::string& input, const CommonFlags& flags) {
  RationalSystem sys = system_from_json(read_file(input));
  MonodromyTuple tuple = monodromy(sys, Cx(0.0, 0.0), integrator_for(flags));
  json out{{"base", cx_out(tuple.base)}, {"product_defect", tuple.product_defect}};
  json chis = json::array();
  for (const Mat& chi : tuple.chis) chis.push_back(mat_out(chi));
  out["chis"] = std::move(chis);
  emit(out.dump(2), flags.json_out);
  return 0;
}

double scalar_residual(const PiecewiseSymbol& symbol, const ScalarFactorization& f) {
  double worst = 0.0;
  const int m = symbol.arc_count();
  for (int k = 0; k < m; ++k) {
    double lo = symbol.jump_angles[std::size_t(k)];
    double hi = (k + 1 < m ? symbol.jump_angles[std::size_t(k + 1)]
                           : symbol.jump_angles[0] + 2.0 * kPi);
    for (int j = 0; j < 64; ++j) {
      double theta = lo + (hi - lo) * (j + 0.5) / 64.0;
      Cx t = std::polar(1.0, theta);
      Cx approx = f.plus(t) * cx_ipow(t, f.kappa) * f.minus(t);
      worst = std::max(worst, std::abs(approx - symbol.value_at_angle(theta)(0, 0)));
    }
  }
  return worst;
}

int run_factor(const std::string& input, const CommonFlags& flags) {
  std::string text = read_file(input);
  if (classify_input(text) == InputKind::System) {
    RationalSystem sys = system_from_json(text);
    FactorAssembly fa = factor_assembly(sys, flags.p, integrator_for(flags));
    json out{{"kind", "system"},
             {"indices", json(fa.powers)},
             {"residual", fa.residual}};
    out["symbol"] = json::parse(symbol_to_json(fa.symbol));
    emit(out.dump(2), flags.json_out);
    return 0;
  }
  PiecewiseSymbol symbol = symbol_from_json(text);
  if (flags.p_set) symbol.p = flags.p;
  if (symbol.n == 1) {
    ScalarFactorization f = scalar_factorize(symbol);
    json exps = json::array();
    for (Cx e : f.exponents) exps.push_back(cx_out(e));
    json out{{"constant", cx_out(f.constant)},
             {"exponents", std::move(exps)},
             {"kappa", f.kappa},
             {"kind", "scalar"},
             {"residual", scalar_residual(symbol, f)}};
    emit(out.dump(2), flags.json_out);
    return 0;
  }
  if (symbol.arc_count() == 2) {
    CommutingFactorization f = commuting_factorize_m2(symbol);
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      double lo = symbol.jump_angles[std::size_t(k)];
      double hi = k == 0 ? symbol.jump_angles[1] : symbol.jump_angles[0] + 2.0 * kPi;
      for (int j = 0; j < 64; ++j) {
        double theta = lo + (hi - lo) * (j + 0.5) / 64.0;
        Cx t = std::polar(1.0, theta);
        Mat lam = Mat::Zero(symbol.n, symbol.n);
        for (int i = 0; i < symbol.n; ++i) lam(i, i) = cx_ipow(t, f.indices[std::size_t(i)]);
        worst = std::max(worst,
                         (f.plus(t) * lam * f.minus(t) - symbol.value_at_angle(theta)).norm());
      }
    }
    json out{{"indices", json(f.indices)}, {"kind", "two_jump"}, {"residual", worst}};
    emit(out.dump(2), flags.json_out);
    return 0;
  }
  fail(ErrorCode::InvalidArgument,
       "direct factorization needs a scalar symbol, a two-jump symbol, or a system file");
}

int run_resolve(const std::string& input, const CommonFlags& flags) {
  ResolverRequest req = request_from_json(read_file(input));
  ResolverVerdict verdict = resolve(req, resolver_config_for(flags));
  json out = json::parse(verdict_to_json(verdict));
  out["option_a"] = json(req.option_a);
  out["option_b"] = json(req.option_b);
  out["chosen"] = verdict.extremal_confirmed ? json(req.option_b) : json(nullptr);
  emit(out.dump(2), flags.json_out);
  return 0;
}

int run_selftest(const CommonFlags& flags) {
  json checks = json::array();
  bool all_ok = true;
  auto record = [&](const std::string& name, bool ok, double residual) {
    checks.push_back(json{{"name", name}, {"ok", ok}, {"residual", residual}});
    all_ok = all_ok && ok;
  };

  {
    std::vector<Cx> pts = default_singularities(2);
    std::vector<Cx> eps{Cx(0.3, 0.05), Cx(-0.2, -0.1)};
    MonodromyTuple tuple = monodromy(scalar_field(pts, eps), build_loops(pts, Cx(0.0, 0.0)));
    double worst = 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k)
      worst = std::max(worst,
                       std::abs(tuple.chis[k](0, 0) - std::exp(-2.0 * kPi * kI * eps[k])));
    record("scalar_sign_convention", worst < 1e-8, worst);
  }
  {
    Rng rng(flags.seed);
    std::vector<Cx> sing = default_singularities(3);
    auto eps = draw_exponent_rows(2, 3, {1, 0}, strip_lo(1.2), rng);
    RationalSystem sys = generate_triangular_2(sing, {1, 0}, eps, rng);
    PiecewiseSymbol symbol = symbol_from_system(sys, 1.2);
    DataPair data = extract_data(symbol);
    Reducibility2 rep = classify2(data);
    IndexResult r = indices_2xm(rep, data.kappa, 3);
    bool ok = r.kind == IndexKind::Determined && r.indices == std::vector<long long>{1, 0};
    record("triangular_round_trip", ok, 0.0);
    MonodromyTuple tuple = monodromy(sys);
    record("product_identity", tuple.product_defect < 1e-8, tuple.product_defect);
  }
  {
    Rng rng(flags.seed + 1);
    PiecewiseSymbol symbol;
    symbol.n = 1;
    symbol.p = 2.0;
    symbol.jump_angles = {0.5, 2.0, 4.0};
    for (int k = 0; k < 3; ++k) {
      Mat v(1, 1);
      v(0, 0) = rng.annulus(0.5, 2.0);
      symbol.arc_values.push_back(v);
    }
    ScalarFactorization f = scalar_factorize(symbol);
    double res = scalar_residual(symbol, f);
    record("scalar_factorization", res < 1e-9, res);
  }
  {
    Mat j2(2, 2);
    j2 << 1.0, 1.0, 0.0, 1.0;
    Mat e = branch_log(j2, strip_lo(2.0));
    double res = (expm(-2.0 * kPi * kI * e) - j2).norm();
    record("branch_log_jordan", res < 1e-10, res);
  }

  json out{{"checks", std::move(checks)}, {"ok", all_ok}};
  emit(out.dump(2), flags.json_out);
  if (!all_ok) fail(ErrorCode::NonConvergence, "self-test failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise constant matrix symbol factorization toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string input;
  std::string shape;
  std::vector<long long> indices;
  int m = 0;
  unsigned coupling_mask = 7;
  bool coupling_on = true;
  bool inner_lower = false;
  bool do_resolve = false;

  std::vector<CLI::Option*> rtopts;
  auto add_common = [&](CLI::App* cmd, bool with_input) {
    if (with_input)
      cmd->add_option("input", input, "input JSON file")->required();
    cmd->add_option("--json-out", flags.json_out, "write the JSON report to this path");
    rtopts.push_back(cmd->add_option("--rel-tol", flags.rel_tol, "integrator relative tolerance"));
  };

  CLI::App* analyze = app.add_subcommand("analyze", "full pipeline on a symbol file");
  add_common(analyze, true);
  auto* popt = analyze->add_option("--p", flags.p, "Lebesgue exponent override");
  analyze->add_flag("--resolve", do_resolve, "run the scan resolver on dichotomies");
  analyze->add_option("--scan-radius", flags.scan_radius, "resolver scan radius");

  CLI::App* generate = app.add_subcommand("generate", "draw a random system of a given shape");
  generate->add_option("--shape", shape, "system shape")
      ->required()
      ->check(CLI::IsMember({"triangular2", "triangular3", "block12", "block21", "extremal"}));
  generate->add_option("--indices", indices, "declared indices, non-increasing")
      ->required()
      ->delimiter(',');
  generate->add_option("--m", m, "number of singular points");
  generate->add_option("--seed", flags.seed, "random seed");
  auto* gpopt = generate->add_option("--p", flags.p, "Lebesgue exponent for the strip");
  generate->add_option("--coupling-mask", coupling_mask, "triangular3 coupling bits");
  generate->add_flag("!--no-coupling", coupling_on, "disable the block coupling entries");
  generate->add_flag("--inner-lower", inner_lower, "lower-triangular inner block");
  generate->add_option("--json-out", flags.json_out, "write the JSON report to this path");

  CLI::App* mono = app.add_subcommand("monodromy", "monodromy tuple of a system file");
  add_common(mono, true);

  CLI::App* factor = app.add_subcommand("factor", "factorization from a symbol or system file");
  add_common(factor, true);
  auto* fpopt = factor->add_option("--p", flags.p, "Lebesgue exponent");

  CLI::App* resolve_cmd = app.add_subcommand("resolve", "scan a dichotomy request");
  add_common(resolve_cmd, true);
  resolve_cmd->add_option("--scan-radius", flags.scan_radius, "resolver scan radius");

  CLI::App* selftest = app.add_subcommand("selftest", "orientation oracle and fast checks");
  selftest->add_option("--seed", flags.seed, "random seed");
  selftest->add_option("--json-out", flags.json_out, "write the JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  flags.p_set = popt->count() > 0 || gpopt->count() > 0 || fpopt->count() > 0;
  for (const CLI::Option* o : rtopts) flags.rel_tol_set = flags.rel_tol_set || o->count() > 0;

  try {
    if (analyze->parsed()) return run_analyze(input, do_resolve, flags);
    if (generate->parsed())
      return run_generate(shape, indices, m, coupling_mask, coupling_on, inner_lower, flags);
    if (mono->parsed()) return run_monodromy(input, flags);
    if (factor->parsed()) return run_factor(input, flags);
    if (resolve_cmd->parsed()) return run_resolve(input, flags);
    if (selftest->parsed()) return run_selftest(flags);
  } catch (const pcfactor::Error& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump(2) << "\n";
    if (e.code() == pcfactor::ErrorCode::InvalidArgument) return 2;
    return e.is_domain_error() ? 3 : 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
