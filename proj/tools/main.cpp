#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcl/arith.hpp"
#include "pcl/cluster.hpp"
#include "pcl/dist.hpp"
#include "pcl/errors.hpp"
#include "pcl/integrals.hpp"
#include "pcl/multfunc.hpp"
#include "pcl/tuples.hpp"
#include "pcl/verify.hpp"
#include "pcl/weights.hpp"

namespace {

using json = nlohmann::ordered_json;
using std::int64_t;

constexpr std::size_t kJsonListCap = 10000;

// All CLI knobs with their resolved values; echoed verbatim into reports.
struct Options {
  std::string tuple_text = "1 0;1 2";
  std::string tuple_file;
  std::string x_text = "1e6";
  double r_exp = 0.1;
  double theta = 0.5;
  int64_t B = 1;
  double rho = 0.05;
  double xi = 0.04;
  int64_t D = 1;
  int64_t q = 1;
  int64_t a = 0;
  int m = 1;
  int m_index = 0;
  int k = 2;
  int64_t lo = 2;
  int64_t y = 0;
  int64_t threshold = 1;
  double epsilon = std::numeric_limits<double>::infinity();
  std::string l0_text;
  std::string p0_text = "1e6";
  int grid_log2 = 11;
  std::string mc_text = "1e7";
  std::uint64_t seed = 0x5EED'0F1E'1D5EED5EULL;
  int jobs = 0;  // 0 -> logical CPU count
  std::string mode = "basic";
  double eta = 0.0;
  std::string kind = "both";
  std::string out;
  std::string csv;
  bool timing = false;
};

// Counts like "1e6" or "250000"; must be integral and fit in int64.
int64_t parse_count(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  long double v = std::strtold(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw pcl::ParseError("not a count: '" + text + "'");
  }
  if (!(v >= 0) || v > 9.2e18L || v != std::floor(v)) {
    throw pcl::ParseError("count out of range or not integral: '" + text + "'");
  }
  return static_cast<int64_t>(v);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

pcl::AdmissibleTuple resolve_tuple(const Options& o) {
  std::vector<pcl::LinearFunction> funcs = o.tuple_file.empty()
                                               ? pcl::parse_tuple_text(o.tuple_text)
                                               : pcl::parse_tuple_file(o.tuple_file);
  return pcl::make_tuple(std::move(funcs));
}

pcl::LinearFunction resolve_l0(const Options& o) {
  if (o.l0_text.empty()) throw pcl::ParseError("this command needs --l0 \"a b\"");
  auto funcs = pcl::parse_tuple_text(o.l0_text);
  if (funcs.size() != 1) throw pcl::ParseError("--l0 takes exactly one component");
  return funcs[0];
}

json functions_json(const pcl::AdmissibleTuple& tuple) {
  json arr = json::array();
  for (const auto& f : tuple.funcs) arr.push_back(pcl::format_function(f));
  return arr;
}

json config_json(const Options& o) {
  json c;
  c["tuple"] = o.tuple_text;
  c["tuple_file"] = o.tuple_file;
  c["x"] = parse_count(o.x_text);
  c["r_exp"] = o.r_exp;
  c["theta"] = o.theta;
  c["B"] = o.B;
  c["rho"] = o.rho;
  c["xi"] = o.xi;
  c["D"] = o.D;
  c["q"] = o.q;
  c["a"] = o.a;
  c["m"] = o.m;
  c["m_index"] = o.m_index;
  c["k"] = o.k;
  c["lo"] = o.lo;
  c["y"] = o.y;
  c["threshold"] = o.threshold;
  c["epsilon"] = finite_or_string(o.epsilon);
  c["l0"] = o.l0_text;
  c["P0"] = parse_count(o.p0_text);
  c["grid_log2"] = o.grid_log2;
  c["mc_samples"] = parse_count(o.mc_text);
  c["seed"] = o.seed;
  c["jobs"] = o.jobs;
  c["mode"] = o.mode;
  c["eta"] = o.eta;
  c["kind"] = o.kind;
  c["out"] = o.out;
  c["csv"] = o.csv;
  c["timing"] = o.timing;
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw pcl::ResourceError("cannot open output file: " + path);
  f << text;
}

void emit(const Options& o, const std::string& command, json result) {
  json env;
  env["artifact"] = {{"name", "primecluster"}, {"version", PCL_VERSION}};
  env["command"] = command;
  env["config"] = config_json(o);
  env["result"] = std::move(result);
  std::string text = env.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
}

json prop_json(const pcl::PropReport& r, bool timing) {
  json j;
  j["which"] = r.which;
  j["empirical"] = r.empirical;
  j["predicted"] = r.predicted;
  j["ratio"] = r.ratio;
  j["parameters"] = {{"x", r.parameters.x},     {"R", r.parameters.R},
                     {"k", r.parameters.k},     {"B", r.parameters.B},
                     {"rho", r.parameters.rho}, {"xi", r.parameters.xi},
                     {"D", r.parameters.D}};
  j["m_index"] = r.m_index;
  j["set_count"] = r.set_count;
  j["nonzero_weights"] = r.nonzero_weights;
  j["discrete_available"] = r.discrete_available;
  j["discrete_predicted"] = r.discrete_predicted;
  j["discrete_ratio"] = r.discrete_ratio;
  j["flagged_empty"] = r.flagged_empty;
  j["note"] = r.note;
  if (timing) j["runtime"] = r.runtime;
  return j;
}

json bv_json(const pcl::BVReport& r) {
  json j;
  j["kind"] = r.kind;
  j["x"] = r.x;
  j["q_max"] = r.q_max;
  j["normalization"] = r.normalization;
  j["total"] = r.total;
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"q", row.q},
                    {"e_q", row.e_q},
                    {"worst_a", row.worst_a},
                    {"concentration", row.concentration}});
  }
  j["rows"] = std::move(rows);
  return j;
}

void write_bv_csv(const std::string& path, const pcl::BVReport& r) {
  std::string text = "q,e_q\n";
  for (const auto& row : r.rows) {
    text += std::to_string(row.q) + "," + fmt17(row.e_q) + "\n";
  }
  write_text(path, text);
}

// Shared context for the verify subcommands.
pcl::VerifyContext make_context(const Options& o) {
  auto tuple = resolve_tuple(o);
  if (!tuple.admissible) throw pcl::DomainError("tuple is not admissible");
  auto setup = std::make_shared<const pcl::SieveSetup>(std::move(tuple), o.B);
  int64_t x = parse_count(o.x_text);
  if (x < 2) throw pcl::DomainError("x must be >= 2");
  double R = std::pow(static_cast<double>(x), o.r_exp);
  pcl::WeightParams params = pcl::make_weight_params(setup, R, parse_count(o.p0_text));
  pcl::LambdaTable table = pcl::build_lambda_table(params);
  return pcl::VerifyContext{std::move(params), std::move(table), pcl::IntegerSetSpec::interval(),
                            pcl::PrimeSubsetSpec::all(), x, o.theta, o.jobs};
}

int run_admissible(const Options& o) {
  auto tuple = resolve_tuple(o);
  json j;
  j["k"] = tuple.k;
  j["functions"] = functions_json(tuple);
  j["admissible"] = tuple.admissible;
  json omegas = json::array();
  int64_t bound = 2 * static_cast<int64_t>(tuple.k) * tuple.k;
  pcl::for_each_prime(2, bound + 1, [&](int64_t p) {
    omegas.push_back({{"p", p}, {"omega", pcl::omega_p(tuple.funcs, p)}});
  });
  j["omega"] = std::move(omegas);
  emit(o, "admissible", std::move(j));
  return 0;
}

int run_greedy(Options& o) {
  if (o.y <= 0) o.y = 1000;  // default interval length
  pcl::GreedyResult g = pcl::greedy_admissible(o.k, o.y, o.q, o.a);
  json j;
  j["k"] = g.tuple.k;
  j["interval_length"] = o.y;
  j["q"] = o.q;
  j["a"] = o.a;
  j["shifts"] = g.shifts;
  j["functions"] = functions_json(g.tuple);
  j["admissible"] = g.tuple.admissible;
  j["survivors"] = g.survivors;
  j["survivor_lower_bound"] = g.survivor_lower_bound;
  emit(o, "greedy", std::move(j));
  return 0;
}

int run_singular(const Options& o) {
  auto tuple = resolve_tuple(o);
  if (!tuple.admissible) throw pcl::DomainError("tuple is not admissible");
  pcl::SieveSetup setup(std::move(tuple), o.B);
  pcl::SingularSeries s = pcl::singular_series(setup, o.D, parse_count(o.p0_text));
  json j;
  j["value"] = s.value;
  j["truncation_prime"] = s.truncation_prime;
  j["tail_log_bound"] = s.tail_log_bound;
  emit(o, "singular", std::move(j));
  return 0;
}

int run_integrals(const Options& o) {
  pcl::IntegralOptions opts;
  opts.grid_log2 = o.grid_log2;
  opts.mc_samples = parse_count(o.mc_text);
  opts.seed = o.seed;
  json rows = json::array();
  auto kind_name = [](pcl::IntegralKind k) { return k == pcl::IntegralKind::I ? "I" : "J"; };
  struct VariantRow {
    pcl::ProfileVariant v;
    const char* name;
  };
  const VariantRow variants[] = {{pcl::ProfileVariant::Full, "full"},
                                 {pcl::ProfileVariant::NoOuter, "no_outer"},
                                 {pcl::ProfileVariant::Telescope, "telescope"}};
  for (auto kind : {pcl::IntegralKind::I, pcl::IntegralKind::J}) {
    for (const auto& vr : variants) {
      std::vector<std::pair<const char*, pcl::IntegralMethod>> methods = {
          {"convolution", pcl::IntegralMethod::Convolution},
          {"monte_carlo", pcl::IntegralMethod::MonteCarlo}};
      if (o.k <= 3) methods.insert(methods.begin() + 1,
                                   {"quadrature", pcl::IntegralMethod::Quadrature});
      for (const auto& [mname, method] : methods) {
        pcl::IntegralEstimate est = pcl::profile_integral(o.k, kind, vr.v, method, opts);
        rows.push_back({{"kind", kind_name(kind)},
                        {"variant", vr.name},
                        {"method", mname},
                        {"value", est.value},
                        {"error_estimate", est.error_estimate}});
      }
    }
  }
  json j;
  j["k"] = o.k;
  j["values"] = std::move(rows);
  emit(o, "integrals", std::move(j));
  return 0;
}

int run_lambda(const Options& o) {
  auto tuple = resolve_tuple(o);
  if (!tuple.admissible) throw pcl::DomainError("tuple is not admissible");
  auto setup = std::make_shared<const pcl::SieveSetup>(std::move(tuple), o.B);
  int64_t x = parse_count(o.x_text);
  double R = std::pow(static_cast<double>(x), o.r_exp);
  pcl::WeightParams params = pcl::make_weight_params(setup, R, parse_count(o.p0_text));
  pcl::LambdaTable table = pcl::build_lambda_table(params);
  pcl::RoundtripReport rt = pcl::roundtrip_check(params, table);

  double max_abs_lambda = 0.0;
  for (const auto& e : table.entries) max_abs_lambda = std::max(max_abs_lambda, std::fabs(e.lambda));

  json j;
  j["R"] = params.R;
  j["log_R"] = params.log_R;
  j["normalization"] = params.normalization;
  j["series"] = {{"value", params.series_wb.value},
                 {"truncation_prime", params.series_wb.truncation_prime},
                 {"tail_log_bound", params.series_wb.tail_log_bound}};
  json sup = json::array();
  for (const auto& sp : table.support_primes) {
    sup.push_back({{"p", sp.p}, {"components", sp.components}});
  }
  j["support_primes"] = std::move(sup);
  j["size"] = table.size();
  j["max_abs_lambda"] = max_abs_lambda;
  j["roundtrip"] = {{"max_rel_err", rt.max_rel_err}, {"checked", rt.checked}};
  json entries = json::array();
  for (std::size_t i = 0; i < table.entries.size() && i < kJsonListCap; ++i) {
    const auto& e = table.entries[i];
    entries.push_back({{"d", e.d}, {"y", e.y}, {"lambda", e.lambda}});
  }
  j["entries"] = std::move(entries);
  j["entries_truncated"] = table.size() > kJsonListCap;

  if (!o.csv.empty()) {
    std::string text;
    for (int i = 1; i <= setup->k(); ++i) {
      text += "d_" + std::to_string(i) + ",";
    }
    text += "lambda\n";
    for (const auto& e : table.entries) {
      for (int64_t di : e.d) text += std::to_string(di) + ",";
      text += fmt17(e.lambda) + "\n";
    }
    write_text(o.csv, text);
  }
  emit(o, "lambda", std::move(j));
  return 0;
}

int run_verify_prop(const Options& o, const std::string& which) {
  pcl::VerifyContext ctx = make_context(o);
  pcl::PropReport rep;
  if (which == "s1") {
    rep = pcl::sum_S1(ctx);
  } else if (which == "s2") {
    rep = pcl::sum_S2(ctx, o.m_index);
  } else if (which == "s3") {
    rep = pcl::sum_S3(ctx, resolve_l0(o), o.xi, o.D);
  } else {
    rep = pcl::sum_S4(ctx, o.m_index, o.rho);
  }
  emit(o, "verify " + which, prop_json(rep, o.timing));
  return 0;
}

int run_verify_extract(const Options& o) {
  pcl::VerifyContext ctx = make_context(o);
  pcl::ExtractMode mode =
      o.mode == "consecutive" ? pcl::ExtractMode::Consecutive : pcl::ExtractMode::Basic;
  pcl::ExtractionResult res = pcl::combined_extract(ctx, o.m, o.rho, mode, o.eta);
  json j;
  j["m"] = res.m;
  j["mode"] = res.mode == pcl::ExtractMode::Consecutive ? "consecutive" : "basic";
  j["rho"] = res.rho;
  j["eta"] = res.eta;
  j["s_value"] = res.s_value;
  j["violations"] = res.violations;
  j["nonzero_weights"] = res.nonzero_weights;
  j["extracted_count"] = res.extracted.size();
  json pts = json::array();
  for (std::size_t i = 0; i < res.extracted.size() && i < kJsonListCap; ++i) {
    const auto& pt = res.extracted[i];
    pts.push_back({{"n", pt.n},
                   {"prime_hits", pt.prime_hits},
                   {"weight", pt.weight},
                   {"bracket", pt.bracket},
                   {"prime_values", pt.prime_values}});
  }
  j["extracted"] = std::move(pts);
  j["extracted_truncated"] = res.extracted.size() > kJsonListCap;
  emit(o, "verify extract", std::move(j));
  return res.violations > 0 ? 1 : 0;
}

int run_bv(const Options& o) {
  int64_t x = parse_count(o.x_text);
  pcl::IntegerSetSpec A = pcl::IntegerSetSpec::interval();
  json j;
  json scans = json::array();
  if (o.kind == "a" || o.kind == "both") {
    pcl::BVReport rep = pcl::bv_scan_A(A, x, o.q, o.jobs);
    if (!o.csv.empty() && o.kind == "a") write_bv_csv(o.csv, rep);
    scans.push_back(bv_json(rep));
  }
  if (o.kind == "p" || o.kind == "both") {
    auto tuple = resolve_tuple(o);
    if (!tuple.admissible) throw pcl::DomainError("tuple is not admissible");
    if (o.m_index < 0 || o.m_index >= tuple.k) {
      throw pcl::DomainError("component index out of range");
    }
    pcl::LinearFunction L = tuple.funcs[static_cast<std::size_t>(o.m_index)];
    pcl::BVReport rep = pcl::bv_scan_P(pcl::PrimeSubsetSpec::all(), L, A, x, o.q, o.B, o.jobs);
    if (!o.csv.empty() && o.kind == "p") write_bv_csv(o.csv, rep);
    scans.push_back(bv_json(rep));
  }
  if (!o.csv.empty() && o.kind == "both") {
    throw pcl::DomainError("csv export needs --kind a or --kind p");
  }
  j["scans"] = std::move(scans);
  emit(o, "bv", std::move(j));
  return 0;
}

int run_scan_intervals(const Options& o) {
  int64_t hi = parse_count(o.x_text);
  std::vector<pcl::ClusterHit> hits = pcl::scan_dense_intervals(o.lo, hi, o.y, o.threshold);
  json j;
  j["count"] = hits.size();
  j["density"] = hi > o.lo ? static_cast<double>(hits.size()) /
                                 static_cast<double>(hi - o.lo + 1)
                           : 0.0;
  json arr = json::array();
  for (std::size_t i = 0; i < hits.size() && i < kJsonListCap; ++i) {
    const auto& h = hits[i];
    arr.push_back({{"x0", h.x0}, {"y", h.y}, {"count", h.count}, {"primes", h.primes}});
  }
  j["hits"] = std::move(arr);
  j["hits_truncated"] = hits.size() > kJsonListCap;
  if (!o.csv.empty()) {
    std::string text = "x0,count\n";
    for (const auto& h : hits) {
      text += std::to_string(h.x0) + "," + std::to_string(h.count) + "\n";
    }
    write_text(o.csv, text);
  }
  emit(o, "scan-intervals", std::move(j));
  return 0;
}

int run_scan_strings(const Options& o) {
  int64_t x_hi = parse_count(o.x_text);
  pcl::StringScan scan = pcl::scan_congruent_strings(x_hi, o.q, o.a, o.m, o.epsilon);
  json j;
  j["count"] = scan.count;
  json arr = json::array();
  for (std::size_t i = 0; i < scan.hits.size() && i < kJsonListCap; ++i) {
    const auto& h = scan.hits[i];
    arr.push_back(
        {{"p_start", h.p_start}, {"m", h.m}, {"q", h.q}, {"a", h.a}, {"gap", h.gap}});
  }
  j["hits"] = std::move(arr);
  j["hits_truncated"] = scan.hits.size() > kJsonListCap;
  if (!o.csv.empty()) {
    std::string text = "p_n,gap\n";
    for (const auto& h : scan.hits) {
      text += std::to_string(h.p_start) + "," + std::to_string(h.gap) + "\n";
    }
    write_text(o.csv, text);
  }
  emit(o, "scan-strings", std::move(j));
  return 0;
}

int run_selfcheck(const Options& o) {
  json checks = json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, bool pass, json detail) {
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
    all_pass = all_pass && pass;
  };

  {
    pcl::LocalSumGrid grid = pcl::sp_identity_grid(3, {5, 7, 11, 13});
    record("local_sum_identities", grid.mismatches == 0,
           {{"cases", grid.cases}, {"mismatches", grid.mismatches}});
  }
  {
    json detail = json::array();
    bool pass = true;
    const char* tuples[] = {"1 0;1 2", "1 1;2 1;4 1"};
    for (const char* text : tuples) {
      auto tuple = pcl::make_tuple(pcl::parse_tuple_text(text));
      auto setup = std::make_shared<const pcl::SieveSetup>(std::move(tuple), int64_t{1});
      pcl::WeightParams params = pcl::make_weight_params(setup, 100.0);
      pcl::LambdaTable table = pcl::build_lambda_table(params);
      pcl::RoundtripReport rt = pcl::roundtrip_check(params, table);
      pass = pass && rt.max_rel_err <= 1e-9;
      detail.push_back({{"tuple", text},
                        {"max_rel_err", rt.max_rel_err},
                        {"checked", rt.checked}});
    }
    record("moebius_roundtrip", pass, std::move(detail));
  }
  {
    json detail = json::array();
    bool pass = true;
    for (int k : {2, 3}) {
      for (auto kind : {pcl::IntegralKind::I, pcl::IntegralKind::J}) {
        double conv = pcl::profile_integral(k, kind, pcl::ProfileVariant::Full,
                                            pcl::IntegralMethod::Convolution)
                          .value;
        double quad = pcl::profile_integral(k, kind, pcl::ProfileVariant::Full,
                                            pcl::IntegralMethod::Quadrature)
                          .value;
        double rel = std::fabs(conv - quad) / std::max(std::fabs(quad), 1e-300);
        pass = pass && rel <= 1e-6;
        detail.push_back({{"k", k},
                          {"kind", kind == pcl::IntegralKind::I ? "I" : "J"},
                          {"convolution", conv},
                          {"quadrature", quad},
                          {"rel_diff", rel}});
      }
    }
    record("integral_cross_check", pass, std::move(detail));
  }
  {
    double mid = pcl::psi_cutoff(0.95);
    record("cutoff_midpoint", std::fabs(mid - 0.5) <= 1e-12, {{"psi_095", mid}});
  }

  json j;
  j["checks"] = std::move(checks);
  j["all_pass"] = all_pass;
  emit(o, "selfcheck", std::move(j));
  return all_pass ? 0 : 1;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = logical CPU count)");
  cmd->add_option("--out", o.out, "write the JSON report here instead of stdout");
  cmd->add_option("--csv", o.csv, "also export the tabular part as CSV");
  cmd->add_flag("--timing", o.timing, "include wall-clock runtimes in reports");
}

void add_tuple(CLI::App* cmd, Options& o) {
  cmd->add_option("--tuple", o.tuple_text, "inline tuple \"a b;a b;...\" (default \"1 0;1 2\")");
  cmd->add_option("--tuple-file", o.tuple_file, "tuple file, one \"a b\" per line");
}

void add_weight(CLI::App* cmd, Options& o) {
  cmd->add_option("--x", o.x_text, "scale x, accepts 1e6 style (default 1e6)");
  cmd->add_option("--r-exp", o.r_exp, "level exponent: R = x^r_exp (default 0.1)");
  cmd->add_option("--B", o.B, "exceptional modulus B (default 1)");
  cmd->add_option("--P0", o.p0_text, "series truncation bound (default 1e6)");
  cmd->add_option("--theta", o.theta, "distribution exponent policy (default 0.5)");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"sieve-weight machinery for dense prime clusters: admissible tuples, "
               "divisor weights, proposition sums, and cluster scanners"};
  app.require_subcommand(1);

  CLI::App* adm = app.add_subcommand("admissible", "parse a tuple and report admissibility");
  add_tuple(adm, o);
  add_common(adm, o);

  CLI::App* gre = app.add_subcommand("greedy", "greedy admissible tuple in a progression");
  gre->add_option("--k", o.k, "tuple size (default 2)");
  gre->add_option("--y", o.y, "interval length to select shifts from (default 1000)");
  gre->add_option("--q", o.q, "progression modulus (default 1)");
  gre->add_option("--a", o.a, "progression residue (default 0)");
  add_common(gre, o);

  CLI::App* sin = app.add_subcommand("singular", "singular series with certified tail");
  add_tuple(sin, o);
  sin->add_option("--D", o.D, "exclude primes dividing D (default 1)");
  sin->add_option("--P0", o.p0_text, "truncation bound (default 1e6)");
  sin->add_option("--B", o.B, "exceptional modulus B (default 1)");
  add_common(sin, o);

  CLI::App* inte = app.add_subcommand("integrals", "profile integrals I_k and J_k");
  inte->add_option("--k", o.k, "dimension (default 2)");
  inte->add_option("--grid-step", o.grid_log2, "log2 of the convolution grid (default 11)");
  inte->add_option("--mc-samples", o.mc_text, "Monte Carlo samples (default 1e7)");
  inte->add_option("--seed", o.seed, "Monte Carlo seed");
  add_common(inte, o);

  CLI::App* lam = app.add_subcommand("lambda", "materialize the divisor-weight table");
  add_tuple(lam, o);
  add_weight(lam, o);
  add_common(lam, o);

  CLI::App* ver = app.add_subcommand("verify", "empirical proposition sums and extraction");
  ver->require_subcommand(1);
  const char* prop_names[] = {"s1", "s2", "s3", "s4"};
  for (const char* name : prop_names) {
    CLI::App* sub = ver->add_subcommand(name, std::string("proposition sum ") + name);
    add_tuple(sub, o);
    add_weight(sub, o);
    if (std::string(name) == "s2" || std::string(name) == "s4") {
      sub->add_option("--m-index", o.m_index, "0-based component index (default 0)");
    }
    if (std::string(name) == "s3") {
      sub->add_option("--l0", o.l0_text, "extra component \"a b\" (required)");
      sub->add_option("--xi", o.xi, "roughness exponent (default 0.04)");
      sub->add_option("--D", o.D, "smooth modulus excluded from roughness (default 1)");
    }
    if (std::string(name) == "s4") {
      sub->add_option("--rho", o.rho, "small-prime exponent (default 0.05)");
    }
    add_common(sub, o);
  }
  CLI::App* ext = ver->add_subcommand("extract", "pigeonhole extraction of prime clusters");
  add_tuple(ext, o);
  add_weight(ext, o);
  ext->add_option("--m", o.m, "extract points with at least m+1 prime values (default 1)");
  ext->add_option("--rho", o.rho, "small-prime exponent (default 0.05)");
  ext->add_option("--mode", o.mode, "basic | consecutive (default basic)")
      ->check(CLI::IsMember({"basic", "consecutive"}));
  ext->add_option("--eta", o.eta, "consecutive-mode shift budget eta (default 0)");
  add_common(ext, o);

  CLI::App* bv = app.add_subcommand("bv", "equidistribution scans over moduli");
  add_tuple(bv, o);
  bv->add_option("--x", o.x_text, "scale x (default 1e6)");
  bv->add_option("--q", o.q, "largest modulus scanned (default 1)");
  bv->add_option("--B", o.B, "exceptional modulus B (default 1)");
  bv->add_option("--m-index", o.m_index, "component used by the prime-side scan (default 0)");
  bv->add_option("--kind", o.kind, "a | p | both (default both)")
      ->check(CLI::IsMember({"a", "p", "both"}));
  add_common(bv, o);

  CLI::App* sci = app.add_subcommand("scan-intervals", "dense prime windows by direct sieve");
  sci->add_option("--lo", o.lo, "scan start (default 2)");
  sci->add_option("--x", o.x_text, "scan end, inclusive (default 1e6)");
  sci->add_option("--y", o.y, "window length; windows are [x0, x0+y] (default 0)");
  sci->add_option("--threshold", o.threshold, "minimum primes per window (default 1)");
  add_common(sci, o);

  CLI::App* scs = app.add_subcommand("scan-strings", "congruent runs of consecutive primes");
  scs->add_option("--x", o.x_text, "scan primes below x (default 1e6)");
  scs->add_option("--q", o.q, "modulus (default 1)");
  scs->add_option("--a", o.a, "residue class (default 0)");
  scs->add_option("--m", o.m, "run length is m+1 consecutive primes (default 1)");
  scs->add_option("--epsilon", o.epsilon, "gap budget: gap <= epsilon*log(p) (default inf)");
  add_common(scs, o);

  CLI::App* sc = app.add_subcommand("selfcheck", "identity suite: local sums, roundtrip, integrals");
  add_common(sc, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  if (o.jobs <= 0) {
    o.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }

  try {
    if (*adm) return run_admissible(o);
    if (*gre) return run_greedy(o);
    if (*sin) return run_singular(o);
    if (*inte) return run_integrals(o);
    if (*lam) return run_lambda(o);
    if (*ver) {
      for (const char* name : prop_names) {
        if (ver->got_subcommand(name)) return run_verify_prop(o, name);
      }
      return run_verify_extract(o);
    }
    if (*bv) return run_bv(o);
    if (*sci) return run_scan_intervals(o);
    if (*scs) return run_scan_strings(o);
    return run_selfcheck(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
