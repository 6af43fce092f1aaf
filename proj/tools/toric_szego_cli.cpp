// toric-szego: command-line driver for the toric Szegő kernel library.
//
// Exit codes: 0 pass, 1 check failure, 2 parse error, 3 validation error,
// 4 numeric flag.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include <toric_szego/toric_szego.hpp>

namespace ts = toric_szego;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kParse = 2, kValidation = 3, kNumeric = 4 };

struct Options {
  std::string file;
  int dilation = 0;
  std::string range;
  std::string levels;
  double tol = 1e-8;
  int samples = 20;
  std::uint64_t seed = 0;
  int threads = 0;
  bool allow_flagged = false;
  bool no_closed_form = false;
  std::string out_dir;
  std::string ray;
  std::string phi;
  int grid = 8;
};

// Input file with its git-style blob hash.
struct Input {
  std::string path;
  std::string text;
  std::string sha1;
  ts::LatticePolytope polytope;
};

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw ts::NumericError("cannot allocate hash context");
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

Input load_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ts::ParseError("cannot read polytope file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::string sha1 = git_blob_sha1(text);
  auto poly = ts::parse_polytope(text);
  return Input{path, std::move(text), std::move(sha1), std::move(poly)};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ts::ParseError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ts::ParseError("not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ts::ParseError("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw ts::ParseError("not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> v;
  for (const auto& t : split(s, ',')) v.push_back(parse_double(t));
  return v;
}

// -N, --range A..B, or the given default list.
std::vector<int> resolve_levels(const Options& o, std::vector<int> fallback) {
  std::vector<int> out;
  if (!o.levels.empty()) {
    for (const auto& t : split(o.levels, ',')) out.push_back(parse_int(t));
  } else if (!o.range.empty()) {
    const auto dots = o.range.find("..");
    if (dots == std::string::npos) throw ts::ParseError("range must look like A..B");
    const int a = parse_int(o.range.substr(0, dots)), b = parse_int(o.range.substr(dots + 2));
    if (a > b) throw ts::ValidationError("empty range " + o.range);
    for (int n = a; n <= b; ++n) out.push_back(n);
  } else if (o.dilation > 0) {
    out.push_back(o.dilation);
  } else {
    out = std::move(fallback);
  }
  for (int n : out)
    if (n < 1) throw ts::ValidationError("dilation must be >= 1");
  return out;
}

int resolve_threads(const Options& o) {
  if (o.threads > 0) return o.threads;
  if (const char* env = std::getenv("TORIC_SZEGO_THREADS")) {
    const int t = parse_int(env);
    if (t < 1) throw ts::ValidationError("TORIC_SZEGO_THREADS must be positive");
    return t;
  }
  return 1;
}

ts::QuadratureConfig quadrature_config(const Options& o) {
  ts::QuadratureConfig c;
  c.rel_tol = o.tol;
  c.seed = o.seed;
  c.threads = resolve_threads(o);
  c.allow_closed_form = !o.no_closed_form;
  c.validate();
  return c;
}

json config_json(const Options& o, const Input& in, const std::string& command) {
  json c;
  c["command"] = command;
  c["polytope"] = in.path;
  c["input_sha1"] = in.sha1;
  c["tol"] = o.tol;
  c["seed"] = o.seed;
  c["samples"] = o.samples;
  c["threads"] = resolve_threads(o);
  c["closed_form"] = !o.no_closed_form;
  c["allow_flagged"] = o.allow_flagged;
  return c;
}

json complex_json(const ts::Complex& z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json point_json(const ts::OrbitPoint& x) {
  return {{"rho", std::vector<double>(x.rho.data(), x.rho.data() + x.rho.size())},
          {"phi", std::vector<double>(x.phi.data(), x.phi.data() + x.phi.size())},
          {"theta", x.theta}};
}

// Write to out_dir/name when an output directory is set, else to stdout.
void emit(const Options& o, const std::string& name, const std::string& content) {
  if (o.out_dir.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(o.out_dir);
  const fs::path p = fs::path(o.out_dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ts::ValidationError("cannot write " + p.string());
  out << content;
  std::cerr << "wrote " << p.string() << '\n';
}

std::string dump(const json& j) { return j.dump(2) + '\n'; }

int flag_exit(const Options& o, bool flagged, const std::string& what) {
  if (!flagged) return kPass;
  std::cerr << "numeric flag: " << what << (o.allow_flagged ? " (allowed)" : "") << '\n';
  return o.allow_flagged ? kPass : kNumeric;
}

// ---------------------------------------------------------------------------
// polytope

json polytope_summary(const ts::LatticePolytope& p, const std::vector<int>& levels) {
  json j;
  j["dim"] = p.dim();
  j["vertices"] = p.vertices();
  json facets = json::array();
  for (const auto& f : p.facets()) facets.push_back({{"normal", f.normal}, {"offset", f.offset}});
  j["facets"] = facets;
  const auto vol = ts::euclidean_volume(p);
  j["volume"] = vol.str();
  j["volume_float"] = vol.convert_to<double>();
  j["unit_weights"] = p.unit_weights();
  j["delzant"] = ts::is_delzant(p).delzant;
  json counts = json::array();
  for (int n : levels) counts.push_back({{"N", n}, {"lattice_points", ts::ehrhart_count(p, n)}});
  j["lattice_counts"] = counts;
  return j;
}

int cmd_polytope_info(const Options& o) {
  const auto in = load_input(o.file);
  const auto& p = in.polytope;
  const auto levels = resolve_levels(o, {1});
  std::cout << "dimension: " << p.dim() << '\n' << "vertices:";
  for (const auto& v : p.vertices()) std::cout << ' ' << ts::to_string(v);
  std::cout << "\nfacets:\n";
  for (const auto& f : p.facets()) std::cout << "  <" << ts::to_string(f.normal) << ", x> <= " << f.offset << '\n';
  std::cout << "volume: " << ts::euclidean_volume(p) << '\n';
  std::cout << "delzant: " << (ts::is_delzant(p).delzant ? "yes" : "no") << '\n';
  for (int n : levels) std::cout << "N=" << n << ": " << ts::ehrhart_count(p, n) << " lattice points\n";
  if (!o.out_dir.empty()) {
    json j = polytope_summary(p, levels);
    j["config"] = config_json(o, in, "polytope info");
    emit(o, "polytope.json", dump(j));
  }
  return kPass;
}

int cmd_polytope_delzant(const Options& o) {
  const auto in = load_input(o.file);
  const auto cert = ts::is_delzant(in.polytope);
  if (cert.delzant) {
    std::cout << "Delzant\n";
  } else {
    const auto* bad = cert.first_failure();
    std::cout << "NOT Delzant (vertex " << ts::to_string(bad->vertex) << ": |det|=" << std::abs(bad->determinant)
              << ")\n";
  }
  json verts = json::array();
  for (const auto& v : cert.vertices) {
    std::cout << "  vertex " << ts::to_string(v.vertex) << " edges";
    for (const auto& e : v.edges) std::cout << ' ' << ts::to_string(e);
    std::cout << " |det|=" << std::abs(v.determinant) << (v.smooth ? "" : "  <- fails") << '\n';
    verts.push_back({{"vertex", v.vertex}, {"edges", v.edges}, {"det", v.determinant}, {"smooth", v.smooth}});
  }
  if (!o.out_dir.empty()) {
    json j{{"delzant", cert.delzant}, {"vertices", verts}, {"config", config_json(o, in, "polytope delzant")}};
    emit(o, "delzant.json", dump(j));
  }
  return kPass;
}

// ---------------------------------------------------------------------------
// tables

int cmd_partition(const Options& o) {
  const auto in = load_input(o.file);
  for (int n : resolve_levels(o, {1})) {
    std::ostringstream os;
    ts::write_partition_csv(os, ts::partition_counts(in.polytope, n));
    emit(o, "partition_N" + std::to_string(n) + ".csv", os.str());
  }
  return kPass;
}

int cmd_norms(const Options& o) {
  const auto in = load_input(o.file);
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  bool flagged = false;
  for (int n : resolve_levels(o, {1})) {
    const auto t = ts::norm_table(pot, n, cfg);
    flagged = flagged || t.any_flagged();
    std::ostringstream os;
    ts::write_norms_csv(os, t);
    emit(o, "norms_N" + std::to_string(n) + ".csv", os.str());
  }
  return flag_exit(o, flagged, "unconverged norm entries");
}

int cmd_multiplier(const Options& o) {
  const auto in = load_input(o.file);
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  bool flagged = false;
  const int m = in.polytope.dim();
  for (int n : resolve_levels(o, {1})) {
    const auto part = ts::partition_counts(in.polytope, n);
    const auto norms = ts::norm_table(pot, n, cfg);
    flagged = flagged || norms.any_flagged();
    const auto mult = ts::multiplier_table(part, norms);
    std::ostringstream os;
    for (int j = 0; j < m; ++j) os << "alpha_" << (j + 1) << ',';
    os << "P,Q,eigenvalue,symbol\n" << std::setprecision(17);
    for (const auto& e : mult.entries) {
      for (auto a : e.alpha) os << a << ',';
      os << e.partition << ',' << e.norm << ',' << e.eigenvalue << ',' << e.symbol << '\n';
    }
    for (const auto& a : mult.excluded)
      std::cerr << "N=" << n << ": excluded " << ts::to_string(a) << " (partition count 0, multiplier undefined)\n";
    emit(o, "multiplier_N" + std::to_string(n) + ".csv", os.str());
  }
  return flag_exit(o, flagged, "unconverged norm entries");
}

// Random pairs with Pi_N, Pi_1^N, and the projective closed form where it applies.
int cmd_kernel(const Options& o) {
  const auto in = load_input(o.file);
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  const int m = in.polytope.dim();
  const auto scale = ts::projective_scale(in.polytope);
  const bool projective = scale && *scale == 1;
  bool flagged = false;
  for (int n : resolve_levels(o, {1})) {
    const auto norms = ts::norm_table(pot, n, cfg);
    flagged = flagged || norms.any_flagged();
    ts::OrbitSampler sampler(pot, o.seed);
    std::ostringstream os;
    os << "pair";
    for (const char* side : {"x", "y"}) {
      for (int j = 1; j <= m; ++j) os << ",rho" << j << '_' << side;
      for (int j = 1; j <= m; ++j) os << ",phi" << j << '_' << side;
      os << ",theta_" << side;
    }
    os << ",re_pi_N,im_pi_N,re_pi1_N,im_pi1_N";
    if (projective) os << ",re_projective,im_projective";
    os << '\n' << std::setprecision(17);
    for (int k = 0; k < o.samples; ++k) {
      const auto x = sampler.next();
      const auto y = sampler.next();
      os << k;
      for (const auto* p : {&x, &y}) {
        for (int j = 0; j < m; ++j) os << ',' << p->rho[j];
        for (int j = 0; j < m; ++j) os << ',' << p->phi[j];
        os << ',' << p->theta;
      }
      const auto pi = ts::szego_kernel(pot, n, norms, x, y);
      const auto pw = ts::pullback_kernel_N(pot, n, x, y);
      os << ',' << pi.real() << ',' << pi.imag() << ',' << pw.real() << ',' << pw.imag();
      if (projective) {
        const auto pr = ts::projective_szego(m, n, x, y);
        os << ',' << pr.real() << ',' << pr.imag();
      }
      os << '\n';
    }
    emit(o, "kernel_N" + std::to_string(n) + ".csv", os.str());
  }
  return flag_exit(o, flagged, "unconverged norm entries");
}

// ---------------------------------------------------------------------------
// verify

struct Checks {
  json list = json::array();
  bool pass = true;
  bool flagged = false;

  void add(const std::string& name, bool ok, double value, double tolerance, const std::string& detail = "") {
    list.push_back({{"name", name}, {"pass", ok}, {"value", value}, {"tolerance", tolerance}, {"detail", detail}});
    pass = pass && ok;
    std::cerr << (ok ? "PASS " : "FAIL ") << name << "  value=" << std::setprecision(6) << value
              << " tol=" << tolerance << (detail.empty() ? "" : "  " + detail) << '\n';
  }
};

json factorization_suite(const Options& o, const Input& in, Checks& checks) {
  const auto cfg = quadrature_config(o);
  ts::require_factorization_setting(in.polytope);
  const ts::KahlerPotential pot(in.polytope);
  json reports = json::array();
  double overall = 0.0;
  const auto levels = resolve_levels(o, {1, 2, 3, 4, 5, 6});
  for (int n : levels) {
    const auto part = ts::power_expansion_coefficients(in.polytope, n);
    const auto norms = ts::norm_table(pot, n, cfg);
    checks.flagged = checks.flagged || norms.any_flagged();
    bool exact = true;
    for (const auto& e : norms.entries) exact = exact && e.exact.has_value();
    const auto rep = ts::evaluate_factorization(pot, part, norms, o.samples, o.seed, cfg.threads);
    json pairs = json::array();
    for (const auto& pr : rep.pairs)
      pairs.push_back({{"x", point_json(pr.x)},
                       {"y", point_json(pr.y)},
                       {"pi_direct", complex_json(pr.direct)},
                       {"pi_factored", complex_json(pr.factored)},
                       {"pi_power", complex_json(pr.power)},
                       {"resid_abs", pr.resid_abs},
                       {"resid_rel", pr.resid_rel},
                       {"expansion_resid_rel", pr.expansion_resid_rel},
                       {"hermitian_resid", pr.hermitian_resid}});
    reports.push_back({{"N", n},
                       {"seed", rep.seed},
                       {"exact_norms", exact},
                       {"pairs", pairs},
                       {"max_resid_rel", rep.max_resid_rel},
                       {"max_expansion_resid_rel", rep.max_expansion_resid_rel},
                       {"max_hermitian_resid", rep.max_hermitian_resid}});
    overall = std::max(overall, rep.max_resid_rel);
    const std::string tag = "N=" + std::to_string(n);
    const double tol = exact ? 1e-10 : 1e-6;
    checks.add("factorization " + tag, rep.max_resid_rel <= tol, rep.max_resid_rel, tol,
               exact ? "exact-rational norms" : "quadrature norms");
    checks.add("power expansion " + tag, rep.max_expansion_resid_rel <= 1e-6, rep.max_expansion_resid_rel, 1e-6);
    checks.add("hermitian symmetry " + tag, rep.max_hermitian_resid <= 1e-10, rep.max_hermitian_resid, 1e-10);
    const auto mult = ts::multiplier_table(part, norms);
    bool positive = mult.excluded.empty();
    for (const auto& e : mult.entries) positive = positive && e.eigenvalue > 0.0;
    checks.add("multiplier positive " + tag, positive, positive ? 1.0 : 0.0, 1.0);
  }
  return {{"N", levels}, {"seed", o.seed}, {"max_resid_rel", overall}, {"reports", reports}};
}

std::vector<std::vector<double>> random_phis(int m, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::vector<double>> out;
  for (int k = 0; k < count; ++k) {
    std::vector<double> phi;
    for (int j = 0; j < m; ++j) phi.push_back(2.0 * std::numbers::pi * static_cast<double>(rng() >> 11) * 0x1.0p-53);
    out.push_back(std::move(phi));
  }
  return out;
}

json characters_suite(const Options& o, const Input& in, Checks& checks) {
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  const int m = in.polytope.dim();
  const int count = o.samples > 0 ? std::min(o.samples, 5) : 5;
  json values = json::array();
  const auto levels = resolve_levels(o, {1, 2, 3, 4});
  for (int n : levels) {
    const auto norms = ts::norm_table(pot, n, cfg);
    checks.flagged = checks.flagged || norms.any_flagged();
    const std::string tag = "N=" + std::to_string(n);
    const auto zero = ts::character_exact(in.polytope, n, std::vector<double>(static_cast<std::size_t>(m), 0.0));
    const auto count_n = static_cast<double>(ts::ehrhart_count(in.polytope, n));
    checks.add("exact character at 0 " + tag, zero.real() == count_n && zero.imag() == 0.0, zero.real(), 0.0);
    auto phis = random_phis(m, count, o.seed + static_cast<std::uint64_t>(n));
    phis.insert(phis.begin(), std::vector<double>(static_cast<std::size_t>(m), 0.0));
    double worst = 0.0, worst_conj = 0.0;
    for (const auto& phi : phis) {
      const auto v = ts::character_value(pot, norms, phi, cfg);
      checks.flagged = checks.flagged || v.flagged;
      worst = std::max(worst, v.gap_trace);
      std::vector<double> neg;
      for (double p : phi) neg.push_back(-p);
      const auto tn = ts::character_trace(pot, norms, neg, cfg).value;
      worst_conj = std::max(worst_conj, std::abs(tn - std::conj(v.trace)) / std::max(std::abs(v.exact), 1.0));
      values.push_back({{"N", n},
                        {"phi", phi},
                        {"exact", complex_json(v.exact)},
                        {"trace", complex_json(v.trace)},
                        {"leading", complex_json(v.leading)},
                        {"gap_trace", v.gap_trace},
                        {"gap_leading", v.gap_leading}});
    }
    checks.add("trace vs exact " + tag, worst <= 1e-5, worst, 1e-5);
    checks.add("trace conjugation " + tag, worst_conj <= 1e-5, worst_conj, 1e-5);
  }

  // leading-order path at phi = 0 against the Ehrhart count
  json leading = json::array();
  std::vector<double> gaps;
  const std::vector<int> big = {8, 16, 32};
  for (int n : big) {
    const std::vector<double> zero(static_cast<std::size_t>(m), 0.0);
    const auto l = ts::character_leading(pot, n, zero, cfg);
    checks.flagged = checks.flagged || !l.converged;
    const double ex = static_cast<double>(ts::ehrhart_count(in.polytope, n));
    const double gap = std::abs(ex - l.value.real()) / std::abs(l.value);
    gaps.push_back(gap);
    leading.push_back({{"N", n}, {"leading", complex_json(l.value)}, {"exact", ex}, {"gap", gap}});
  }
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    const double r = gaps[k - 1] / gaps[k];
    checks.add("leading gap halving N=" + std::to_string(big[k - 1]) + "->" + std::to_string(big[k]),
               r >= 1.7 && r <= 2.3, r, 0.3, "ratio must lie in [1.7, 2.3]");
  }
  return {{"N", levels}, {"seed", o.seed}, {"values", values}, {"leading_at_zero", leading}};
}

json asymptotics_suite(const Options& o, const Input& in, Checks& checks) {
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  const int m = in.polytope.dim();
  std::vector<double> ray;
  if (o.ray.empty()) {
    const auto b = ts::detail::vertex_barycenter(in.polytope);
    ray.assign(b.data(), b.data() + m);
  } else {
    ray = parse_reals(o.ray);
  }
  const auto levels = resolve_levels(o, {8, 16, 32});
  const auto s = ts::symbol_ratio(pot, ray, levels, cfg);
  json entries = json::array();
  bool positive = true;
  for (const auto& e : s.entries) {
    checks.flagged = checks.flagged || e.flagged;
    positive = positive && e.ratio > 0.0;
    json j{{"N", e.dilation},
           {"alpha", e.alpha},
           {"partition", e.partition.str()},
           {"Q", e.norm},
           {"ratio", e.ratio},
           {"flagged", e.flagged}};
    if (e.exact_ratio) j["exact_ratio"] = e.exact_ratio->str();
    entries.push_back(j);
  }
  checks.add("symbol ratios positive", positive, positive ? 1.0 : 0.0, 1.0);

  // on CP^m with unit weights the ratio is N^m N!/(N+m)! exactly
  if (const auto p = ts::projective_scale(in.polytope); p && *p == 1 && !o.no_closed_form) {
    bool exact = true;
    for (const auto& e : s.entries) {
      ts::BigInt num = 1, den = 1;
      for (int j = 1; j <= m; ++j) {
        num *= e.dilation;
        den *= e.dilation + j;
      }
      exact = exact && e.exact_ratio && *e.exact_ratio == ts::Rational(num, den);
    }
    checks.add("symbol ratio closed form", exact, exact ? 1.0 : 0.0, 1.0, "N^m N!/(N+m)! on the rational path");
  }
  for (std::size_t k = 1; k < s.differences.size(); ++k) {
    const double r = std::abs(s.differences[k - 1]) / std::abs(s.differences[k]);
    checks.add("first differences shrink N=" + std::to_string(s.entries[k].dilation) + "->" +
                   std::to_string(s.entries[k + 1].dilation),
               r > 1.0, r, 1.0, "ratio of successive first differences");
  }
  bool monotone = true;
  for (std::size_t k = 1; k < s.entries.size(); ++k)
    monotone = monotone && std::abs(s.entries[k].ratio - s.richardson_limit) <
                               std::abs(s.entries[k - 1].ratio - s.richardson_limit);
  checks.add("distance to Richardson limit decreases", monotone, s.richardson_limit, 0.0);
  return {{"ray", ray},
          {"N", levels},
          {"entries", entries},
          {"differences", s.differences},
          {"richardson_limit", s.richardson_limit}};
}

int finish_verify(const Options& o, const Input& in, const std::string& kind, json body, const Checks& checks) {
  body["config"] = config_json(o, in, "verify " + kind);
  body["checks"] = checks.list;
  body["pass"] = checks.pass;
  body["flagged"] = checks.flagged;
  emit(o, "verify_" + kind + ".json", dump(body));
  if (!checks.pass) return kCheckFailed;
  return flag_exit(o, checks.flagged, "quadrature tolerance not met");
}

int cmd_verify(const Options& o, const std::string& kind) {
  const auto in = load_input(o.file);
  Checks checks;
  json body;
  if (kind == "factorization") {
    body = factorization_suite(o, in, checks);
  } else if (kind == "characters") {
    body = characters_suite(o, in, checks);
  } else if (kind == "asymptotics") {
    body = asymptotics_suite(o, in, checks);
  } else {
    Options sub = o;
    sub.dilation = 0;
    sub.range.clear();
    sub.levels.clear();
    if (in.polytope.unit_weights() && ts::is_delzant(in.polytope).delzant)
      body["factorization"] = factorization_suite(sub, in, checks);
    body["characters"] = characters_suite(sub, in, checks);
    body["asymptotics"] = asymptotics_suite(sub, in, checks);
  }
  return finish_verify(o, in, kind, std::move(body), checks);
}

// ---------------------------------------------------------------------------
// character

std::vector<double> resolve_phi(const Options& o, int m) {
  if (o.phi.empty()) return std::vector<double>(static_cast<std::size_t>(m), 0.0);
  auto phi = parse_reals(o.phi);
  if (static_cast<int>(phi.size()) != m) throw ts::ValidationError("--phi needs " + std::to_string(m) + " values");
  return phi;
}

int cmd_character(const Options& o, const std::string& kind) {
  const auto in = load_input(o.file);
  const int m = in.polytope.dim();
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  bool flagged = false;
  std::cout << std::setprecision(17);
  for (int n : resolve_levels(o, {1})) {
    if (kind == "exact") {
      const auto v = ts::character_exact(in.polytope, n, resolve_phi(o, m));
      std::cout << "N=" << n << " exact " << v.real() << ' ' << v.imag() << '\n';
    } else if (kind == "trace") {
      const auto norms = ts::norm_table(pot, n, cfg);
      const auto r = ts::character_trace(pot, norms, resolve_phi(o, m), cfg);
      flagged = flagged || !r.converged || norms.any_flagged();
      std::cout << "N=" << n << " trace " << r.value.real() << ' ' << r.value.imag() << " err " << r.error << '\n';
    } else if (kind == "leading") {
      const auto r = ts::character_leading(pot, n, resolve_phi(o, m), cfg);
      flagged = flagged || !r.converged;
      std::cout << "N=" << n << " leading " << r.value.real() << ' ' << r.value.imag() << " err " << r.error << '\n';
    } else {
      const auto norms = ts::norm_table(pot, n, cfg);
      const auto values = ts::character_sweep(pot, norms, ts::phi_grid(m, o.grid), cfg);
      for (const auto& v : values) flagged = flagged || v.flagged;
      std::ostringstream os;
      ts::write_character_csv(os, values, m);
      emit(o, "characters_N" + std::to_string(n) + ".csv", os.str());
    }
  }
  return flag_exit(o, flagged, "quadrature tolerance not met");
}

// ---------------------------------------------------------------------------
// report: every table for one polytope into an output directory

int cmd_report(const Options& o) {
  if (o.out_dir.empty()) throw ts::ValidationError("report needs -o/--out-dir");
  const auto in = load_input(o.file);
  const auto cfg = quadrature_config(o);
  const ts::KahlerPotential pot(in.polytope);
  const int m = in.polytope.dim();
  const auto levels = resolve_levels(o, {1, 2, 3});
  bool flagged = false;
  json manifest;
  manifest["config"] = config_json(o, in, "report");
  manifest["N"] = levels;
  json files = json::array();
  auto put = [&](const std::string& name, const std::string& content) {
    emit(o, name, content);
    files.push_back({{"name", name}, {"sha1", git_blob_sha1(content)}});
  };
  put("polytope.json", dump(polytope_summary(in.polytope, levels)));
  const bool factorizable = in.polytope.unit_weights() && ts::is_delzant(in.polytope).delzant;
  for (int n : levels) {
    const std::string tag = "_N" + std::to_string(n);
    const auto part = ts::partition_counts(in.polytope, n);
    const auto norms = ts::norm_table(pot, n, cfg);
    flagged = flagged || norms.any_flagged();
    std::ostringstream p, q, c;
    ts::write_partition_csv(p, part);
    ts::write_norms_csv(q, norms);
    put("partition" + tag + ".csv", p.str());
    put("norms" + tag + ".csv", q.str());
    const auto values = ts::character_sweep(pot, norms, ts::phi_grid(m, o.grid), cfg);
    for (const auto& v : values) flagged = flagged || v.flagged;
    ts::write_character_csv(c, values, m);
    put("characters" + tag + ".csv", c.str());
    if (factorizable) {
      const auto rep = ts::evaluate_factorization(pot, part, norms, o.samples, o.seed, cfg.threads);
      json pairs = json::array();
      for (const auto& pr : rep.pairs)
        pairs.push_back({{"x", point_json(pr.x)},
                         {"y", point_json(pr.y)},
                         {"pi_direct", complex_json(pr.direct)},
                         {"pi_factored", complex_json(pr.factored)},
                         {"resid_abs", pr.resid_abs},
                         {"resid_rel", pr.resid_rel}});
      put("kernel" + tag + ".json",
          dump({{"N", n}, {"seed", rep.seed}, {"pairs", pairs}, {"max_resid_rel", rep.max_resid_rel}}));
    }
  }
  manifest["files"] = files;
  emit(o, "manifest.json", dump(manifest));
  return flag_exit(o, flagged, "quadrature tolerance not met");
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* app, Options& o) {
  app->add_option("polytope", o.file, "Polytope JSON file")->required();
  app->add_option("-N,--dilation,--dilate", o.dilation, "Dilation level N");
  app->add_option("--range", o.range, "Range of dilations A..B");
  app->add_option("--levels", o.levels, "Comma-separated dilation list, e.g. 8,16,32 (also accepted as --N)");
  app->add_option("--tol", o.tol, "Relative quadrature tolerance");
  app->add_option("--samples", o.samples, "Number of random samples");
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--threads", o.threads, "Worker threads (default: TORIC_SZEGO_THREADS or 1)");
  app->add_flag("--allow-flagged", o.allow_flagged, "Do not fail on unconverged quadrature");
  app->add_flag("--no-closed-form", o.no_closed_form, "Always use quadrature for norms");
  app->add_option("-o,--out-dir", o.out_dir, "Output directory");
  app->add_option("--ray", o.ray, "Interior ray direction, comma separated");
  app->add_option("--phi", o.phi, "Torus angle, comma separated");
  app->add_option("--grid", o.grid, "Grid points per axis for sweeps");
}

}  // namespace

int main(int argc, char** argv) {
  // "--N 8,16,32" is the documented spelling for a dilation list; CLI11
  // reserves one-letter names for short options
  std::vector<std::string> args(argv, argv + argc);
  for (auto& a : args) {
    if (a == "--N") a = "--levels";
    else if (a.rfind("--N=", 0) == 0) a = "--levels=" + a.substr(4);
  }

  CLI::App app{"Toric Szegő kernels, partition and norming functions, polytope characters", "toric-szego"};
  app.require_subcommand(1);
  Options o;
  std::function<int()> action;

  auto* poly = app.add_subcommand("polytope", "Polytope summary and Delzant certificate");
  poly->require_subcommand(1);
  auto* info = poly->add_subcommand("info", "Vertices, facets, volume, lattice counts");
  add_common(info, o);
  info->callback([&] { action = [&] { return cmd_polytope_info(o); }; });
  auto* delz = poly->add_subcommand("delzant", "Delzant test with per-vertex certificate");
  add_common(delz, o);
  delz->callback([&] { action = [&] { return cmd_polytope_delzant(o); }; });

  auto* part = app.add_subcommand("partition", "Partition function table (CSV)");
  add_common(part, o);
  part->callback([&] { action = [&] { return cmd_partition(o); }; });
  auto* norms = app.add_subcommand("norms", "Norming function table (CSV)");
  add_common(norms, o);
  norms->callback([&] { action = [&] { return cmd_norms(o); }; });
  auto* mult = app.add_subcommand("multiplier", "Multiplier eigenvalues 1/(P Q) (CSV)");
  add_common(mult, o);
  mult->callback([&] { action = [&] { return cmd_multiplier(o); }; });
  auto* kern = app.add_subcommand("kernel", "Kernel values at random orbit pairs (CSV)");
  add_common(kern, o);
  kern->callback([&] { action = [&] { return cmd_kernel(o); }; });

  auto* verify = app.add_subcommand("verify", "Verification suites with JSON reports");
  verify->require_subcommand(1);
  for (const char* kind : {"factorization", "characters", "asymptotics", "all"}) {
    auto* sub = verify->add_subcommand(kind, std::string("Verify ") + kind);
    add_common(sub, o);
    const std::string k = kind;
    sub->callback([&, k] { action = [&, k] { return cmd_verify(o, k); }; });
  }

  auto* chr = app.add_subcommand("character", "Polytope characters");
  chr->require_subcommand(1);
  for (const char* kind : {"exact", "trace", "leading", "sweep"}) {
    auto* sub = chr->add_subcommand(kind, std::string("Character by the ") + kind + " path");
    add_common(sub, o);
    const std::string k = kind;
    sub->callback([&, k] { action = [&, k] { return cmd_character(o, k); }; });
  }

  auto* rep = app.add_subcommand("report", "Write every table for a polytope to an output directory");
  add_common(rep, o);
  rep->callback([&] { action = [&] { return cmd_report(o); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    return action();
  } catch (const ts::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ts::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ts::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
