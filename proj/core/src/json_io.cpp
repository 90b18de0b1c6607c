#include "pcfactor/json_io.hpp"

#include <json.hpp>

namespace pcfactor {
namespace {

using nlohmann::json;

json cx_out(Cx v) { return json::array({v.real(), v.imag()}); }

Cx cx_in(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorCode::InvalidArgument, "expected a [re, im] pair");
  return Cx(j[0].get<double>(), j[1].get<double>());
}

json mat_out(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(cx_out(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_in(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorCode::InvalidArgument, "expected a matrix");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    fail(ErrorCode::InvalidArgument, "expected matrix rows");
  const std::size_t cols = j[0].size();
  Mat m = Mat::Zero(Eigen::Index(rows), Eigen::Index(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      fail(ErrorCode::InvalidArgument, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(Eigen::Index(i), Eigen::Index(c)) = cx_in(j[i][c]);
  }
  return m;
}

json cx_list_out(const std::vector<Cx>& v) {
  json out = json::array();
  for (Cx x : v) out.push_back(cx_out(x));
  return out;
}

std::vector<Cx> cx_list_in(const json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidArgument, "expected a complex list");
  std::vector<Cx> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(cx_in(e));
  return out;
}

json mat_list_out(const std::vector<Mat>& v) {
  json out = json::array();
  for (const Mat& m : v) out.push_back(mat_out(m));
  return out;
}

std::vector<Mat> mat_list_in(const json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidArgument, "expected a matrix list");
  std::vector<Mat> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(mat_in(e));
  return out;
}

json int_list_out(const std::vector<long long>& v) { return json(v); }

std::vector<long long> int_list_in(const json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidArgument, "expected an integer list");
  std::vector<long long> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) fail(ErrorCode::InvalidArgument, "expected an integer");
    out.push_back(e.get<long long>());
  }
  return out;
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::InvalidArgument, "malformed JSON");
  return j;
}

const json& need(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    fail(ErrorCode::InvalidArgument, std::string("missing key: ") + key);
  return *it;
}

double need_number(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) fail(ErrorCode::InvalidArgument, std::string("expected number: ") + key);
  return v.get<double>();
}

long long need_integer(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number_integer())
    fail(ErrorCode::InvalidArgument, std::string("expected integer: ") + key);
  return v.get<long long>();
}

json phi_out(const PhiReport& phi) {
  json failures = json::array();
  for (const PhiFailure& f : phi.failures)
    failures.push_back(json{{"distance", f.distance},
                            {"eigenvalue", cx_out(f.eigenvalue)},
                            {"jump", f.jump},
                            {"singular_arc", f.singular_arc}});
  return json{{"failures", std::move(failures)}, {"ok", phi.ok}};
}

PhiReport phi_in(const json& j) {
  PhiReport phi;
  phi.ok = need(j, "ok").get<bool>();
  for (const auto& f : need(j, "failures")) {
    PhiFailure pf;
    pf.distance = need_number(f, "distance");
    pf.eigenvalue = cx_in(need(f, "eigenvalue"));
    pf.jump = int(need_integer(f, "jump"));
    pf.singular_arc = need(f, "singular_arc").get<bool>();
    phi.failures.push_back(pf);
  }
  return phi;
}

json data_pair_out(const DataPair& d) {
  return json{{"es", mat_list_out(d.es)},   {"kappa", d.kappa}, {"ms", mat_list_out(d.ms)},
              {"n", d.n},                   {"p", d.p},         {"zetas", json(d.zetas)}};
}

DataPair data_pair_in(const json& j) {
  DataPair d;
  d.n = int(need_integer(j, "n"));
  d.p = need_number(j, "p");
  d.kappa = need_integer(j, "kappa");
  d.ms = mat_list_in(need(j, "ms"));
  d.es = mat_list_in(need(j, "es"));
  for (const auto& row : need(j, "zetas")) d.zetas.push_back(row.get<std::vector<double>>());
  return d;
}

const char* type2_name(ReducibilityType2 t) {
  switch (t) {
    case ReducibilityType2::A: return "A";
    case ReducibilityType2::B: return "B";
    case ReducibilityType2::C: return "C";
  }
  return "A";
}

ReducibilityType2 type2_parse(const std::string& s) {
  if (s == "A") return ReducibilityType2::A;
  if (s == "B") return ReducibilityType2::B;
  if (s == "C") return ReducibilityType2::C;
  fail(ErrorCode::InvalidArgument, "unknown 2x2 reducibility type: " + s);
}

const char* type3_name(ReducibilityType3 t) {
  switch (t) {
    case ReducibilityType3::A: return "A";
    case ReducibilityType3::B1: return "B1";
    case ReducibilityType3::B2: return "B2";
    case ReducibilityType3::B3: return "B3";
    case ReducibilityType3::C: return "C";
    case ReducibilityType3::C1: return "C1";
    case ReducibilityType3::C2: return "C2";
    case ReducibilityType3::C3: return "C3";
    case ReducibilityType3::D: return "D";
  }
  return "A";
}

ReducibilityType3 type3_parse(const std::string& s) {
  if (s == "A") return ReducibilityType3::A;
  if (s == "B1") return ReducibilityType3::B1;
  if (s == "B2") return ReducibilityType3::B2;
  if (s == "B3") return ReducibilityType3::B3;
  if (s == "C") return ReducibilityType3::C;
  if (s == "C1") return ReducibilityType3::C1;
  if (s == "C2") return ReducibilityType3::C2;
  if (s == "C3") return ReducibilityType3::C3;
  if (s == "D") return ReducibilityType3::D;
  fail(ErrorCode::InvalidArgument, "unknown 3x3 reducibility type: " + s);
}

json red2_out(const Reducibility2& r) {
  return json{{"line_continuum", r.line_continuum},
              {"lines", mat_list_out(r.lines)},
              {"n1", r.n1},
              {"n2", r.n2},
              {"type", type2_name(r.type)}};
}

Reducibility2 red2_in(const json& j) {
  Reducibility2 r;
  r.type = type2_parse(need(j, "type").get<std::string>());
  r.n1 = need_integer(j, "n1");
  r.n2 = need_integer(j, "n2");
  r.lines = mat_list_in(need(j, "lines"));
  r.line_continuum = need(j, "line_continuum").get<bool>();
  return r;
}

json red3_out(const Reducibility3& r) {
  return json{{"N", r.N},
              {"line_continuum", r.line_continuum},
              {"lines", mat_list_out(r.lines)},
              {"n1", r.n1},
              {"n2", r.n2},
              {"n3", r.n3},
              {"nu", r.nu},
              {"nu1", r.nu1},
              {"nu2", r.nu2},
              {"nu_sharp", r.nu_sharp},
              {"plane_continuum", r.plane_continuum},
              {"planes", mat_list_out(r.planes)},
              {"type", type3_name(r.type)}};
}

Reducibility3 red3_in(const json& j) {
  Reducibility3 r;
  r.type = type3_parse(need(j, "type").get<std::string>());
  r.nu = need_integer(j, "nu");
  r.N = need_integer(j, "N");
  r.n1 = need_integer(j, "n1");
  r.n2 = need_integer(j, "n2");
  r.n3 = need_integer(j, "n3");
  r.nu1 = need_integer(j, "nu1");
  r.nu2 = need_integer(j, "nu2");
  r.nu_sharp = need_integer(j, "nu_sharp");
  r.lines = mat_list_in(need(j, "lines"));
  r.planes = mat_list_in(need(j, "planes"));
  r.line_continuum = need(j, "line_continuum").get<bool>();
  r.plane_continuum = need(j, "plane_continuum").get<bool>();
  return r;
}

json request_out(const ResolverRequest& req) {
  json exps = json::array();
  for (const auto& row : req.exponents) exps.push_back(cx_list_out(row));
  return json{{"exponents", std::move(exps)},
              {"kappa", req.kappa},
              {"m", req.m},
              {"ms", mat_list_out(req.ms)},
              {"n", req.n},
              {"option_a", int_list_out(req.option_a)},
              {"option_b", int_list_out(req.option_b)},
              {"singularities", cx_list_out(req.singularities)}};
}

ResolverRequest request_in(const json& j) {
  ResolverRequest req;
  req.n = int(need_integer(j, "n"));
  req.m = int(need_integer(j, "m"));
  req.kappa = need_integer(j, "kappa");
  req.option_a = int_list_in(need(j, "option_a"));
  req.option_b = int_list_in(need(j, "option_b"));
  for (const auto& row : need(j, "exponents")) req.exponents.push_back(cx_list_in(row));
  req.ms = mat_list_in(need(j, "ms"));
  req.singularities = cx_list_in(need(j, "singularities"));
  return req;
}

const char* kind_name(IndexKind k) {
  switch (k) {
    case IndexKind::Determined: return "determined";
    case IndexKind::Dichotomy: return "dichotomy";
    case IndexKind::Constraints: return "constraints";
  }
  return "determined";
}

IndexKind kind_parse(const std::string& s) {
  if (s == "determined") return IndexKind::Determined;
  if (s == "dichotomy") return IndexKind::Dichotomy;
  if (s == "constraints") return IndexKind::Constraints;
  fail(ErrorCode::InvalidArgument, "unknown index result kind: " + s);
}

json index_result_out(const IndexResult& r) {
  json out{{"gap_bound", r.gap_bound},
           {"indices", int_list_out(r.indices)},
           {"kind", kind_name(r.kind)},
           {"option_a", int_list_out(r.option_a)},
           {"option_b", int_list_out(r.option_b)},
           {"total", r.total}};
  out["request"] = r.request ? request_out(*r.request) : json(nullptr);
  return out;
}

IndexResult index_result_in(const json& j) {
  IndexResult r;
  r.kind = kind_parse(need(j, "kind").get<std::string>());
  r.indices = int_list_in(need(j, "indices"));
  r.option_a = int_list_in(need(j, "option_a"));
  r.option_b = int_list_in(need(j, "option_b"));
  r.total = need_integer(j, "total");
  r.gap_bound = need_integer(j, "gap_bound");
  const json& rq = need(j, "request");
  if (!rq.is_null()) r.request = request_in(rq);
  return r;
}

json verdict_out(const ResolverVerdict& v) {
  return json{{"defect", v.defect},
              {"evaluated", v.evaluated},
              {"extremal_confirmed", v.extremal_confirmed},
              {"parameter", cx_out(v.parameter)},
              {"skipped", v.skipped}};
}

ResolverVerdict verdict_in(const json& j) {
  ResolverVerdict v;
  v.extremal_confirmed = need(j, "extremal_confirmed").get<bool>();
  v.parameter = cx_in(need(j, "parameter"));
  v.defect = need_number(j, "defect");
  v.evaluated = int(need_integer(j, "evaluated"));
  v.skipped = int(need_integer(j, "skipped"));
  return v;
}

}  // namespace

std::string symbol_to_json(const PiecewiseSymbol& symbol, int indent) {
  json j{{"arc_values", mat_list_out(symbol.arc_values)},
         {"jump_angles", json(symbol.jump_angles)},
         {"n", symbol.n},
         {"p", symbol.p}};
  return j.dump(indent);
}

PiecewiseSymbol symbol_from_json(const std::string& text) {
  json j = parse(text);
  PiecewiseSymbol s;
  s.n = int(need_integer(j, "n"));
  s.p = need_number(j, "p");
  for (const auto& a : need(j, "jump_angles")) {
    if (!a.is_number()) fail(ErrorCode::InvalidArgument, "jump_angles must be numbers");
    s.jump_angles.push_back(a.get<double>());
  }
  s.arc_values = mat_list_in(need(j, "arc_values"));
  s.validate();
  return s;
}

std::string system_to_json(const RationalSystem& sys, int indent) {
  json numerators = json::array();
  for (const auto& row : sys.numerators) {
    json jrow = json::array();
    for (const Poly& p : row) jrow.push_back(cx_list_out(p.c));
    numerators.push_back(std::move(jrow));
  }
  json j{{"indices", int_list_out(sys.indices)},
         {"n", sys.n},
         {"numerators", std::move(numerators)},
         {"singularities", cx_list_out(sys.singularities)}};
  return j.dump(indent);
}

RationalSystem system_from_json(const std::string& text) {
  json j = parse(text);
  RationalSystem sys;
  sys.n = int(need_integer(j, "n"));
  sys.indices = int_list_in(need(j, "indices"));
  sys.singularities = cx_list_in(need(j, "singularities"));
  const json& rows = need(j, "numerators");
  if (!rows.is_array() || int(rows.size()) != sys.n)
    fail(ErrorCode::InvalidArgument, "numerators must form an n x n grid");
  for (const auto& row : rows) {
    if (!row.is_array() || int(row.size()) != sys.n)
      fail(ErrorCode::InvalidArgument, "numerators must form an n x n grid");
    std::vector<Poly> polys;
    for (const auto& cell : row) polys.push_back(Poly(cx_list_in(cell)));
    sys.numerators.push_back(std::move(polys));
  }
  return sys;
}

std::string data_pair_to_json(const DataPair& data, int indent) {
  return data_pair_out(data).dump(indent);
}

std::string reducibility2_to_json(const Reducibility2& rep, int indent) {
  return red2_out(rep).dump(indent);
}

std::string reducibility3_to_json(const Reducibility3& rep, int indent) {
  return red3_out(rep).dump(indent);
}

std::string index_result_to_json(const IndexResult& result, int indent) {
  return index_result_out(result).dump(indent);
}

std::string request_to_json(const ResolverRequest& req, int indent) {
  return request_out(req).dump(indent);
}

ResolverRequest request_from_json(const std::string& text) { return request_in(parse(text)); }

std::string verdict_to_json(const ResolverVerdict& verdict, int indent) {
  return verdict_out(verdict).dump(indent);
}

std::string analysis_to_json(const AnalysisReport& report, int indent) {
  json j{{"p", report.p}, {"phi", phi_out(report.phi)}};
  j["data"] = report.data ? data_pair_out(*report.data) : json(nullptr);
  j["reducibility2"] = report.red2 ? red2_out(*report.red2) : json(nullptr);
  j["reducibility3"] = report.red3 ? red3_out(*report.red3) : json(nullptr);
  j["indices"] = report.indices ? index_result_out(*report.indices) : json(nullptr);
  j["verdict"] = report.verdict ? verdict_out(*report.verdict) : json(nullptr);
  return j.dump(indent);
}

AnalysisReport analysis_from_json(const std::string& text) {
  json j = parse(text);
  AnalysisReport rep;
  rep.p = need_number(j, "p");
  rep.phi = phi_in(need(j, "phi"));
  if (!need(j, "data").is_null()) rep.data = data_pair_in(j["data"]);
  if (!need(j, "reducibility2").is_null()) rep.red2 = red2_in(j["reducibility2"]);
  if (!need(j, "reducibility3").is_null()) rep.red3 = red3_in(j["reducibility3"]);
  if (!need(j, "indices").is_null()) rep.indices = index_result_in(j["indices"]);
  if (!need(j, "verdict").is_null()) rep.verdict = verdict_in(j["verdict"]);
  return rep;
}

InputKind classify_input(const std::string& text) {
  json j = parse(text);
  if (j.contains("arc_values")) return InputKind::Symbol;
  if (j.contains("numerators")) return InputKind::System;
  fail(ErrorCode::InvalidArgument, "input is neither a symbol nor a system file");
}

}  // namespace pcfactor
