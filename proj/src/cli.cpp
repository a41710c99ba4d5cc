#include "lsz/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsz/check_suites.hpp"
#include "lsz/correlators.hpp"
#include "lsz/curve_series.hpp"
#include "lsz/limits.hpp"

namespace lsz {

namespace {

std::string format_cplx_json(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << z.real() << ", " << z.imag() << "]";
  return os.str();
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) raise(ErrorCode::InvalidArgument, "cannot write output file: " + path);
  out << text << "\n";
}

cplx parse_one_point(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty()) raise(ErrorCode::InvalidArgument, "empty point literal");
  // forms: a, ai, a+bi, a-bi
  if (s.back() == 'i' || s.back() == 'j') {
    s.pop_back();
    // find the split between real and imaginary parts
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') split = i;
    }
    if (split == std::string::npos) {
      double im = s.empty() || s == "+" ? 1.0 : (s == "-" ? -1.0 : std::stod(s));
      return {0.0, im};
    }
    double re = std::stod(s.substr(0, split));
    std::string imtxt = s.substr(split);
    double im = (imtxt == "+") ? 1.0 : (imtxt == "-") ? -1.0 : std::stod(imtxt);
    return {re, im};
  }
  return {std::stod(s), 0.0};
}

}  // namespace

std::vector<cplx> parse_points(const std::string& text) {
  std::vector<cplx> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) pts.push_back(parse_one_point(item));
  return pts;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Residue-recursion solver for the quartic two-field matrix model"};
  app.require_subcommand(1);

  std::string config, out_path, format = "json", points_text, suite = "all";
  unsigned long long seed = 42;
  int precision = 53, g = 0, n = 1, order = 2;
  std::vector<int> deriv_idx;
  std::string boundaries_text;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "model JSON path");
    cmd->add_option("--out", out_path, "output path (default stdout)");
    cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--precision", precision, "working precision in bits");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the spectral curve");
  add_common(solve);

  CLI::App* omega_cmd = app.add_subcommand("omega", "evaluate Omega_{g,n} at points");
  add_common(omega_cmd);
  omega_cmd->add_option("-g", g, "genus")->required();
  omega_cmd->add_option("-n", n, "number of points")->required();
  omega_cmd->add_option("--points", points_text, "points 'a+bi;c+di;...'")->required();

  CLI::App* corr = app.add_subcommand("correlator", "evaluate a correlation function");
  add_common(corr);
  corr->add_option("-g", g, "genus");
  corr->add_option("--boundaries", boundaries_text,
                   "cycles 'p,q,p,q|p,q' of eigenvalue indices")
      ->required();
  corr->add_option("--deriv", deriv_idx, "derivative marker indices (into eps)");
  bool limit_mode = false;
  corr->add_flag("--limit-mode", limit_mode, "resolve coinciding indices by the limit procedure");

  CLI::App* mc = app.add_subcommand("map-counts", "map-count table column");
  add_common(mc);
  mc->add_option("-g", g, "genus")->required();
  mc->add_option("-n", n, "points")->required();
  mc->add_option("--order", order, "max lambda order")->required();

  CLI::App* series = app.add_subcommand("series", "exact rational curve series");
  add_common(series);
  series->add_option("--order", order, "truncation order")->required();

  CLI::App* check = app.add_subcommand("check", "run a verification suite");
  add_common(check);
  check->add_option("--suite", suite, "suite name or 'all'");

  CLI::App* fe = app.add_subcommand("free-energy", "free energy F^(g), g >= 2");
  add_common(fe);
  fe->add_option("-g", g, "genus")->required();

  std::vector<std::string> argv_copy = args;
  std::vector<char*> argv_c;
  argv_c.reserve(argv_copy.size());
  for (auto& s : argv_copy) argv_c.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv_c.size()), argv_c.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (const char* env = std::getenv("LSZ_TR_PREC")) precision = std::atoi(env);

  try {
    auto need_model = [&]() {
      if (config.empty()) raise(ErrorCode::InvalidArgument, "--config is required");
      return validate(load_model(config), {false});
    };

    if (solve->parsed()) {
      SpectralCurve cv = solve_curve(need_model());
      write_output(cv.to_json(), out_path);
    } else if (omega_cmd->parsed()) {
      ModelSpec spec = need_model();
      SpectralCurve cv = solve_curve(spec);
      RamificationData ram = ramification_points(cv);
      OmegaEvaluator om(cv, ram);
      std::vector<cplx> pts = parse_points(points_text);
      if (static_cast<int>(pts.size()) != n)
        raise(ErrorCode::InvalidArgument, "--points count does not match -n");
      cplx val = om.omega(g, pts);
      write_output("{\"omega\": " + format_cplx_json(val) + "}", out_path);
    } else if (corr->parsed()) {
      ModelSpec spec = need_model();
      SpectralCurve cv = solve_curve(spec);
      RamificationData ram = ramification_points(cv);
      OmegaEvaluator om(cv, ram);
      CorrelatorOptions copt;
      copt.coinciding_limit_mode = limit_mode;
      CorrelatorEngine ce(cv, ram, om, copt);
      CorrelatorKey key;
      key.g = g;
      key.deriv = deriv_idx;
      std::stringstream ss(boundaries_text);
      std::string cycle;
      while (std::getline(ss, cycle, '|')) {
        std::vector<std::pair<int, int>> pairs;
        std::stringstream cs(cycle);
        std::string tok;
        std::vector<int> flat;
        while (std::getline(cs, tok, ',')) flat.push_back(std::stoi(tok));
        if (flat.size() % 2 != 0)
          raise(ErrorCode::InvalidArgument, "boundary cycles need an even index count");
        for (std::size_t i = 0; i < flat.size(); i += 2) pairs.push_back({flat[i], flat[i + 1]});
        key.boundaries.push_back(pairs);
      }
      cplx val = ce.full_correlator(key);
      write_output("{\"correlator\": " + format_cplx_json(val) + "}", out_path);
    } else if (mc->parsed()) {
      MapCountOptions opt;
      opt.precision_bits = precision;
      std::vector<MapCountRow> rows = map_counts(g, n, order, opt);
      if (format == "csv") {
        write_output(map_counts_csv(rows), out_path);
      } else {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows)
          j.push_back({{"g", r.g}, {"n", r.n}, {"order", r.order}, {"count", r.count},
                       {"raw", r.raw}, {"abs_error", r.abs_error}});
        write_output(j.dump(2), out_path);
      }
    } else if (series->parsed()) {
      ModelSpec spec = need_model();
      CurveSeries cs = solve_curve_series(to_rational(spec), order);
      nlohmann::json j;
      auto dump = [](const std::vector<RationalSeries>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : v) {
          nlohmann::json coeffs = nlohmann::json::array();
          for (int k = 0; k <= s.order(); ++k) coeffs.push_back(s[k].str());
          arr.push_back(coeffs);
        }
        return arr;
      };
      j["eps"] = dump(cs.eps);
      j["eps_tilde"] = dump(cs.eps_tilde);
      j["rho"] = dump(cs.rho);
      j["rho_tilde"] = dump(cs.rho_tilde);
      j["order"] = cs.order;
      write_output(j.dump(2), out_path);
    } else if (check->parsed()) {
      std::vector<CheckReport> reports = run_suite(suite, seed, precision);
      std::ostringstream os;
      bool ok = true;
      for (const auto& r : reports) {
        os << format_report(r);
        ok = ok && r.all_pass();
      }
      write_output(os.str(), out_path);
      if (!ok) return 3;
    } else if (fe->parsed()) {
      ModelSpec spec = need_model();
      SpectralCurve cv = solve_curve(spec);
      RamificationData ram = ramification_points(cv);
      OmegaEvaluator om(cv, ram);
      cplx val = om.free_energy(g);
      write_output("{\"free_energy\": " + format_cplx_json(val) + ", \"g\": " +
                       std::to_string(g) + "}",
                   out_path);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::NonConvergence ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lsz
