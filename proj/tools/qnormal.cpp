// qnormal: build point sets and zero schedules, evaluate the products, run
// probes and the acceptance suite. Every output file gets a manifest.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "qnormal/acceptance.hpp"
#include "qnormal/evaluator.hpp"
#include "qnormal/pointset.hpp"
#include "qnormal/probe.hpp"
#include "qnormal/schedule.hpp"

namespace qn::cli {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitSuiteFailed = 1;

const char* kPrecisionEnv = "QNORMAL_PRECISION_BITS";

nlohmann::json read_json(const std::string& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw DomainError(flag + ": cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(flag + ": '" + path + "' is not valid JSON (" + e.what() + ")");
  }
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text, const std::string& flag) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      std::size_t v = std::stoul(text);
      return {v, v};
    }
    std::size_t a = std::stoul(text.substr(0, dots)), b = std::stoul(text.substr(dots + 2));
    if (b < a) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::logic_error&) {
    throw DomainError(flag + ": expected a range like 4..10, got '" + text + "'");
  }
}

Ordinal parse_ordinal(const std::string& text, const std::string& flag) {
  try {
    return Ordinal::parse(text);
  } catch (const DomainError& e) {
    throw DomainError(flag + ": " + e.what());
  }
}

Rational parse_rational_flag(const std::string& text, const std::string& flag) {
  try {
    return parse_rational(text);
  } catch (const DomainError& e) {
    throw DomainError(flag + ": " + e.what());
  }
}

std::string csv_real(const Real& x) {
  if (isinf(x)) return x < 0 ? "-inf" : "inf";
  return format_real(x);
}

// Grid strings: "annulus:n=3,samples=64" walks the annulus a_n < |z| <= a_{n+1}
// with radius and angle advancing together; "ring:a3[,samples=64]" samples
// |z| = a_3 at equally spaced turns.
std::vector<std::pair<Rational, Rational>> parse_grid(const std::string& text, const RadiiSequence& radii) {
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::size_t samples = 64, n = 0;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      if (item.rfind("n=", 0) == 0)
        n = std::stoul(item.substr(2));
      else if (item.rfind("samples=", 0) == 0)
        samples = std::stoul(item.substr(8));
      else if (kind == "ring" && item.size() > 1 && item[0] == 'a')
        n = std::stoul(item.substr(1));
      else
        throw DomainError("");
    } catch (const std::exception&) {
      throw DomainError("--grid: cannot read '" + item + "' in '" + text + "'");
    }
  }
  if (n == 0) throw DomainError("--grid: a radius index n >= 1 is required");
  if (samples == 0) throw DomainError("--grid: samples must be positive");
  std::vector<std::pair<Rational, Rational>> pts;
  if (kind == "ring") {
    for (std::size_t i = 0; i < samples; ++i) pts.emplace_back(radii.log_radius(n), Rational(i, samples));
  } else if (kind == "annulus") {
    Rational lo = radii.log_radius(n), hi = radii.log_radius(n + 1);
    for (std::size_t i = 0; i < samples; ++i)
      pts.emplace_back(lo + (hi - lo) * Rational(2 * i + 1, 2 * samples), Rational(i, samples));
  } else {
    throw DomainError("--grid: unknown grid kind '" + kind + "' (expected annulus or ring)");
  }
  return pts;
}

struct Context {
  std::vector<std::string> args;
  RunManifest manifest() const {
    RunManifest m;
    m.command_line = args;
    m.precision_bits = precision_bits();
    return m;
  }
};

int build_set(const Context& ctx, const std::string& alpha, std::uint64_t nu, const std::string& host,
              const std::string& out) {
  Ordinal a = parse_ordinal(alpha, "--alpha");
  auto comma = host.find(',');
  if (comma == std::string::npos) throw DomainError("--host: expected center,half_width");
  Arc arc = Arc::make(parse_rational_flag(host.substr(0, comma), "--host"),
                      parse_rational_flag(host.substr(comma + 1), "--host"));
  PointSet e = build_rank_set(a, nu, arc);
  RunManifest m = ctx.manifest();
  m.config = {{"command", "build-set"}, {"alpha", a.to_string()}, {"nu", nu}, {"host", to_json(arc)}};
  write_with_manifest(out, to_json(e).dump(2) + "\n", m);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int derive_cmd(const Context& ctx, const std::string& set_path, const std::string& beta, const std::string& out) {
  PointSet e = point_set_from_json(read_json(set_path, "--set"));
  Ordinal b = parse_ordinal(beta, "--beta");
  PointSet d = derive(e, b);
  auto card = d.cardinality();
  nlohmann::json j{{"beta", b.to_string()}, {"set", to_json(d)}};
  j["cardinality"] = card ? nlohmann::json(*card) : nlohmann::json("infinite");
  if (card) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : materialize(d, 1, 1)) pts.push_back(to_string(p));
    j["points"] = pts;
  }
  RunManifest m = ctx.manifest();
  m.config = {{"command", "derive"}, {"beta", b.to_string()}};
  m.inputs.push_back(set_path);
  write_with_manifest(out, j.dump(2) + "\n", m);
  std::cout << (card ? std::to_string(*card) : std::string("infinitely many")) << " points\n";
  return 0;
}

int build_zeros(const Context& ctx, const std::string& alpha, const std::string& nu, std::size_t n_max,
                std::string variant, const std::string& out) {
  Ordinal a = parse_ordinal(alpha, "--alpha");
  bool infinite = nu == "inf" || nu == "infinite";
  if (variant == "auto") variant = a.is_limit() ? "limit" : infinite ? "sector" : "finite-order";
  ZeroSchedule s;
  if (variant == "finite-order") {
    if (infinite) throw DomainError("--nu: finite-order schedules need a finite nu");
    std::uint64_t v = 0;
    try {
      v = std::stoull(nu);
    } catch (const std::logic_error&) {
      throw DomainError("--nu: expected a positive integer or inf, got '" + nu + "'");
    }
    s = build_finite_order_schedule(a, v, n_max);
  } else if (variant == "sector") {
    s = build_sector_schedule(a, n_max);
  } else if (variant == "limit") {
    if (nu != "1" && !infinite) std::cerr << "note: --nu " << nu << " is ignored for the limit-ordinal schedule\n";
    s = build_limit_schedule(a, n_max);
  } else {
    throw DomainError("--variant: expected auto, finite-order, sector or limit");
  }
  RunManifest m = ctx.manifest();
  m.config = {{"command", "build-zeros"}, {"alpha", a.to_string()}, {"nu", nu}, {"nmax", n_max}, {"variant", variant}};
  write_with_manifest(out, to_json(s).dump(2) + "\n", m);
  std::cout << "wrote " << out << " (" << s.zeros.size() << " zeros, " << to_string(s.variant) << ")\n";
  return 0;
}

int eval_cmd(const Context& ctx, const std::string& schedule_path, const std::string& j_text, const std::string& grid,
             std::optional<std::size_t> rows, const std::string& out) {
  ZeroSchedule s = schedule_from_json(read_json(schedule_path, "--schedule"));
  if (j_text.empty() || j_text.find_first_not_of("0123456789") != std::string::npos || BigInt(j_text) == 0)
    throw DomainError("--j: expected a positive integer, got '" + j_text + "'");
  BigInt j(j_text);
  std::size_t r = rows.value_or(s.n_max);
  std::ostringstream csv;
  csv << "log_r,turn,log_mag,phase,tail_bound,valid\n";
  for (const auto& [log_r, turn] : parse_grid(grid, s.radii)) {
    EvalResult e = family_eval(s, j, Point::from_exact(log_r, turn), r);
    csv << to_string(log_r) << "," << to_string(turn) << "," << csv_real(e.value.log_mag) << ","
        << csv_real(e.value.phase) << "," << csv_real(e.tail_log_bound) << "," << (e.valid ? "true" : "false") << "\n";
  }
  RunManifest m = ctx.manifest();
  m.config = {{"command", "eval"}, {"j", j_text}, {"grid", grid}, {"rows", r}};
  m.inputs.push_back(schedule_path);
  write_with_manifest(out, csv.str(), m);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int probe_cmd(const Context& ctx, const std::string& schedule_path, const std::string& rule_text,
              const std::string& k_text, std::size_t depth, const std::string& delta_text,
              const std::vector<std::string>& sweep_points, const std::string& n_text, const std::string& out) {
  ZeroSchedule s = schedule_from_json(read_json(schedule_path, "--schedule"));
  DilationRule rule;
  try {
    rule = DilationRule::parse(rule_text);
  } catch (const DomainError& e) {
    throw DomainError(std::string("--rule: ") + e.what());
  }
  auto [k_first, k_last] = parse_range(k_text, "--k");
  Rational delta = parse_rational_flag(delta_text, "--delta");
  ProbeReport rep = order_report(s, rule, depth, k_first, k_last, delta);
  nlohmann::json j = to_json(rep);
  nlohmann::json config{{"command", "probe"}, {"rule", rule.to_string()}, {"k", k_text}, {"depth", depth},
                        {"delta", to_string(delta)}};
  if (!sweep_points.empty()) {
    std::vector<SweepPoint> pts;
    for (const auto& p : sweep_points) {
      auto at = p.find('@');
      if (at == std::string::npos) throw DomainError("--sweep: expected turn@r, got '" + p + "'");
      pts.push_back({parse_rational_flag(p.substr(0, at), "--sweep"), parse_rational_flag(p.substr(at + 1), "--sweep")});
    }
    auto [n_first, n_last] = parse_range(n_text.empty() ? k_text : n_text, "--n");
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : spherical_sweep(s, pts, rule, n_first, n_last, s.n_max)) rows.push_back(to_json(row));
    j["sweep"] = rows;
    config["sweep"] = sweep_points;
    config["n"] = n_text.empty() ? k_text : n_text;
  }
  RunManifest m = ctx.manifest();
  m.config = config;
  m.inputs.push_back(schedule_path);
  write_with_manifest(out, j.dump(2) + "\n", m);
  std::cout << "wrote " << out << " (" << j["status"].get<std::string>() << ", branch "
            << to_string(rep.classification.branch) << ")\n";
  if (!rep.conclusive) {
    std::cerr << "inconclusive: certificates disagree with the claimed set at";
    for (const auto& f : rep.failing) std::cerr << " " << to_string(f);
    std::cerr << "\n";
    return kExitInconclusive;
  }
  return 0;
}

int verify_cmd(const Context& ctx, const std::string& suite, const std::string& out) {
  std::vector<CriterionResult> results = run_acceptance(parse_suite(suite));
  std::cout << format_table(results);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.pass;
  if (!out.empty()) {
    RunManifest m = ctx.manifest();
    m.config = {{"command", "verify"}, {"suite", suite}};
    write_with_manifest(out, acceptance_report(results).dump(2) + "\n", m);
  }
  return ok ? 0 : kExitSuiteFailed;
}

int run(int argc, char** argv) {
  if (const char* env = std::getenv(kPrecisionEnv)) {
    try {
      set_precision_bits(static_cast<unsigned>(std::stoul(env)));
    } catch (const std::logic_error&) {
      std::cerr << kPrecisionEnv << ": expected a number of bits, got '" << env << "'\n";
      return kExitUsage;
    }
  }
  CLI::App app{"Point sets of prescribed Cantor-Bendixson rank, zero schedules and dilation probes."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  unsigned precision = 0;
  app.add_option("--precision", precision,
                 std::string("working precision in bits (default 200, or $") + kPrecisionEnv + ")")
      ->check(CLI::Range(64u, 1u << 20));

  Context ctx;
  for (int i = 1; i < argc; ++i) ctx.args.emplace_back(argv[i]);
  std::function<int()> action;

  auto* bs = app.add_subcommand("build-set", "build E(alpha, nu) on a host arc and write its rank tree");
  std::string bs_alpha, bs_host = "1/8,1/16", bs_out;
  std::uint64_t bs_nu = 1;
  bs->add_option("--alpha", bs_alpha, "ordinal, e.g. 3, w+2, w^2")->required();
  bs->add_option("--nu", bs_nu, "number of points of rank alpha-1 (successor alpha)")->check(CLI::PositiveNumber);
  bs->add_option("--host", bs_host, "host arc as center,half_width in turns")->capture_default_str();
  bs->add_option("--out", bs_out, "output JSON")->required();
  bs->callback([&] { action = [&] { return build_set(ctx, bs_alpha, bs_nu, bs_host, bs_out); }; });

  auto* dv = app.add_subcommand("derive", "compute the beta-th derived set of a rank tree");
  std::string dv_set, dv_beta, dv_out;
  dv->add_option("--set", dv_set, "rank-tree JSON from build-set")->required();
  dv->add_option("--beta", dv_beta, "ordinal")->required();
  dv->add_option("--out", dv_out, "output JSON")->required();
  dv->callback([&] { action = [&] { return derive_cmd(ctx, dv_set, dv_beta, dv_out); }; });

  auto* bz = app.add_subcommand("build-zeros", "build a zero schedule");
  std::string bz_alpha, bz_nu = "1", bz_variant = "auto", bz_out;
  std::size_t bz_nmax = 0;
  bz->add_option("--alpha", bz_alpha, "ordinal")->required();
  bz->add_option("--nu", bz_nu, "positive integer, or inf for the sector schedule")->capture_default_str();
  bz->add_option("--nmax", bz_nmax, "number of radius rows")->required()->check(CLI::Range(3ul, 200ul));
  bz->add_option("--variant", bz_variant, "auto | finite-order | sector | limit")->capture_default_str();
  bz->add_option("--out", bz_out, "output JSON")->required();
  bz->callback([&] { action = [&] { return build_zeros(ctx, bz_alpha, bz_nu, bz_nmax, bz_variant, bz_out); }; });

  auto* ev = app.add_subcommand("eval", "evaluate log f(jz) on a grid and write CSV");
  std::string ev_schedule, ev_j = "1", ev_grid, ev_out;
  std::optional<std::size_t> ev_rows;
  ev->add_option("--schedule", ev_schedule, "schedule JSON from build-zeros")->required();
  ev->add_option("--j", ev_j, "dilation factor")->capture_default_str();
  ev->add_option("--grid", ev_grid, "annulus:n=3,samples=64 or ring:a3[,samples=64]")->required();
  ev->add_option("--rows", ev_rows, "rows multiplied out (default: all rows of the schedule)");
  ev->add_option("--out", ev_out, "output CSV")->required();
  ev->callback([&] { action = [&] { return eval_cmd(ctx, ev_schedule, ev_j, ev_grid, ev_rows, ev_out); }; });

  auto* pr = app.add_subcommand("probe", "classify a dilation rule and certify zero clustering");
  std::string pr_schedule, pr_rule, pr_k, pr_delta = "1/1000", pr_n, pr_out;
  std::size_t pr_depth = 5;
  std::vector<std::string> pr_sweep;
  pr->add_option("--schedule", pr_schedule, "schedule JSON from build-zeros")->required();
  pr->add_option("--rule", pr_rule,
                 "ratio-plus:r=1/2 | geometric-mean:L=1,r=1/2 | sector:t=2,r=1/2 | explicit:j=21;55,from=4,r=1")
      ->required();
  pr->add_option("--k", pr_k, "k range, e.g. 4..10")->required();
  pr->add_option("--depth", pr_depth, "number of source angles to certify")->capture_default_str();
  pr->add_option("--delta", pr_delta, "certificate threshold as a fraction of r")->capture_default_str();
  pr->add_option("--sweep", pr_sweep, "spherical-derivative sweep centers turn@r (repeatable)");
  pr->add_option("--n", pr_n, "n range of the sweep (default: the k range)");
  pr->add_option("--out", pr_out, "output JSON")->required();
  pr->callback([&] {
    action = [&] { return probe_cmd(ctx, pr_schedule, pr_rule, pr_k, pr_depth, pr_delta, pr_sweep, pr_n, pr_out); };
  });

  auto* vf = app.add_subcommand("verify", "run the acceptance suite and print a pass/fail table");
  std::string vf_suite = "all", vf_out;
  vf->add_option("--suite", vf_suite, "all, or criteria such as 1,4,7")->capture_default_str();
  vf->add_option("--out", vf_out, "write the full report JSON here");
  vf->callback([&] { action = [&] { return verify_cmd(ctx, vf_suite, vf_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (precision) set_precision_bits(precision);
  try {
    return action();
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantError& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kExitInvariant;
  }
}

}  // namespace
}  // namespace qn::cli

int main(int argc, char** argv) { return qn::cli::run(argc, argv); }
