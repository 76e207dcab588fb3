#include "elicit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "elicit/error.hpp"
#include "elicit/fixture.hpp"
#include "elicit/service.hpp"
#include "elicit/transcript.hpp"

namespace elicit {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + path, ErrorKind::io);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  require(static_cast<bool>(out), "cannot write " + path, ErrorKind::io);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t\"");
    const auto e = c.find_last_not_of(" \t\"");
    c = b == std::string::npos ? "" : c.substr(b, e - b + 1);
  }
  return cells;
}

void print_matrix_csv(std::ostream& out, const std::string& label,
                      const std::vector<std::string>& names,
                      const Eigen::MatrixXd& m) {
  out << label;
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << fmt(m(i, j));
    out << '\n';
  }
}

kernels::Backend backend_from(const std::string& name) {
  return name == "reference" ? kernels::Backend::reference : kernels::Backend::omp;
}

}  // namespace

DesignMatrix read_design_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "design CSV: empty file",
          ErrorKind::parse);
  const std::vector<std::string> names = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    require(cells.size() == names.size(),
            "design CSV line " + std::to_string(lineno) + ": expected " +
                std::to_string(names.size()) + " columns",
            ErrorKind::parse);
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        require(used == c.size(), "", ErrorKind::parse);
      } catch (const std::exception&) {
        fail(ErrorKind::parse, "design CSV line " + std::to_string(lineno) +
                                   ": '" + c + "' is not a number");
      }
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "design CSV: no rows", ErrorKind::parse);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return DesignMatrix(X, names);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Prior elicitation for generalised linear models"};
  app.require_subcommand(1);

  std::string transcript_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t n = 2000;
  double band_alpha = 0.05;
  std::optional<double> mu0, w;
  std::string backend = "omp";
  std::string design_path, family_name;
  std::optional<double> family_param, target_phi;
  std::string emit_path, out_path;
  bool with_diagnostics = false;

  auto* replay = app.add_subcommand("replay", "Replay a transcript and print its snapshot");
  replay->add_option("transcript", transcript_path)->required();
  replay->add_option("--out", out_path, "Write the re-serialized transcript here");

  auto* diagnose = app.add_subcommand("diagnose", "Sample-mean discrepancy report");
  diagnose->add_option("transcript", transcript_path)->required();
  diagnose->add_option("-n,--samples", n)->check(CLI::PositiveNumber);
  diagnose->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  diagnose->add_option("--alpha", band_alpha)->check(CLI::Range(0.0, 1.0));
  diagnose->add_option("--mu0", mu0);
  diagnose->add_option("--w", w);
  diagnose->add_option("--backend", backend)->check(CLI::IsMember({"omp", "reference"}));
  diagnose->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* induce = app.add_subcommand("induce", "Induce a prior for a design matrix and family");
  induce->add_option("transcript", transcript_path)->required();
  induce->add_option("--design", design_path)->required();
  induce->add_option("--family", family_name);
  induce->add_option("--family-param", family_param);
  induce->add_option("--target-phi", target_phi);
  induce->add_option("--mu0", mu0);
  induce->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* scan = app.add_subcommand("truncate-scan", "Divergence of each vine truncation");
  scan->add_option("transcript", transcript_path)->required();
  scan->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* curves = app.add_subcommand("curves", "Marginal quantile table per scenario");
  curves->add_option("transcript", transcript_path)->required();
  curves->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* casestudy = app.add_subcommand("casestudy", "Replay the seagrass case study");
  casestudy->add_option("--transcript", transcript_path);
  casestudy->add_option("--emit-transcript", emit_path);
  casestudy->add_flag("--diagnostics", with_diagnostics,
                      "Also report Kolmogorov distances at mu0 = 0.01 and 0.10");

  ServiceConfig svc;
  std::string data_dir, token;
  auto* serve = app.add_subcommand("serve", "Serve the /v1 HTTP API");
  serve->add_option("--host", svc.host);
  serve->add_option("--port", svc.port)->check(CLI::Range(1, 65535));
  serve->add_option("--data-dir", data_dir);
  serve->add_option("--max-n", svc.max_diagnostic_n)->check(CLI::PositiveNumber);
  serve->add_option("--token", token);
  serve->add_option("--seed-policy", svc.seed_policy)->check(CLI::IsMember({"fixed", "random"}));
  serve->add_option("--seed", svc.default_seed);
  serve->add_option("--timeout", svc.timeout_seconds)->check(CLI::PositiveNumber);

  auto* schema = app.add_subcommand("schema", "Print the transcript JSON schema");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitSchema;
  }

  try {
    for (const std::string* path : {&transcript_path, &design_path}) {
      require(path->empty() || std::filesystem::is_regular_file(*path),
              "no such file: " + *path, ErrorKind::io);
    }
    if (*schema) {
      out << transcript_schema();
      return kExitOk;
    }
    if (*serve) {
      svc.apply_environment();
      if (!data_dir.empty()) svc.data_dir = data_dir;
      if (!token.empty()) svc.bearer_token = token;
      Service service(svc);
      err << "serving /v1 on " << svc.host << ':' << svc.port << '\n';
      service.serve();
      return kExitOk;
    }
    if (*casestudy) {
      const auto t0 = std::chrono::steady_clock::now();
      const SeagrassFixture fx = seagrass_fixture();
      const std::string recorded = save_transcript(fx.session);
      const std::string text = transcript_path.empty() ? recorded : read_file(transcript_path);
      const Session s = load_and_replay(text);
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!emit_path.empty()) write_file(emit_path, recorded);
      const DispersionSpec& d = s.dispersion();
      require(!d.is_known(), "casestudy: transcript has no dispersion prior");
      if (d.s() != kSeagrassS || d.r() != kSeagrassR) {
        err << "replayed s=" << fmt(d.s()) << " r=" << fmt(d.r())
            << " differ from the recorded values\n";
        return kExitDomain;
      }
      char line[64];
      std::snprintf(line, sizeof line, "s=%g r=%g", d.s(), d.r());
      out << line << "\nphase=" << s.phase().label() << " events=" << s.events().size()
          << " replay_seconds=" << dt << '\n';
      if (with_diagnostics) {
        for (double m0 : {0.01, 0.10}) {
          const DispersionSpec spec =
              dispersion_from_parameters(kSeagrassS, kSeagrassR, m0, kSeagrassW, s.family());
          SampleMeanOptions opt;
          opt.acknowledge_no_convolution = true;
          const auto pairs =
              sample_mean_mc(s.family(), m0, kSeagrassW, spec, 2000, kSeagrassSeed, opt);
          const auto rep = discrepancy_report(pairs, s.family(), m0, kSeagrassW, spec);
          out << "mu0=" << m0 << " w=" << kSeagrassW << " N=2000 kolmogorov="
              << fmt(rep.kolmogorov) << " dkw_epsilon=" << fmt(rep.dkw_epsilon) << '\n';
        }
      }
      return kExitOk;
    }

    const Session session = load_and_replay(read_file(transcript_path));

    if (*replay) {
      if (!out_path.empty()) write_file(out_path, save_transcript(session));
      out << canonical_dump(session.snapshot()) << '\n';
      return kExitOk;
    }

    if (*diagnose) {
      DispersionSpec spec = session.dispersion();
      require(!spec.is_known(), "diagnose: the session has known dispersion");
      const double m0 = mu0.value_or(spec.mu0.value_or(0.0));
      const double ww = w.value_or(spec.w.value_or(0.0));
      if (mu0 || w)
        spec = dispersion_from_parameters(spec.s(), spec.r(), m0, ww, session.family());
      SampleMeanOptions opt;
      opt.acknowledge_no_convolution = true;
      opt.backend = backend_from(backend);
      const auto pairs = sample_mean_mc(session.family(), m0, ww, spec, n,
                                        seed_given ? seed : session.seed(), opt);
      const auto rep = discrepancy_report(pairs, session.family(), m0, ww, spec,
                                          band_alpha, opt.backend);
      if (format == "csv") {
        out << "mu0,w,n,kolmogorov,dkw_epsilon,band_alpha,kl_estimate,kl_stderr\n"
            << fmt(m0) << ',' << fmt(ww) << ',' << n << ',' << fmt(rep.kolmogorov) << ','
            << fmt(rep.dkw_epsilon) << ',' << fmt(rep.band_alpha) << ','
            << (rep.kl_estimate ? fmt(*rep.kl_estimate) : "") << ','
            << (rep.kl_stderr ? fmt(*rep.kl_stderr) : "") << '\n';
      } else {
        json j = to_json(rep);
        j["mu0"] = m0;
        j["w"] = ww;
        out << canonical_dump(j) << '\n';
      }
      return kExitOk;
    }

    if (*induce) {
      const DesignMatrix dm = read_design_csv(read_file(design_path));
      InduceOptions opt;
      opt.elicited = session.family();
      opt.target = family_name.empty() ? session.family()
                                       : Family::from_name(family_name, family_param);
      opt.mu0 = mu0;
      opt.target_phi = target_phi;
      const InducedPrior ip = induce_prior(session.final_location(), session.final_scale(),
                                           session.dispersion(), dm, opt);
      if (format == "csv") {
        out << "coefficient,delta\n";
        for (Eigen::Index i = 0; i < ip.delta.size(); ++i)
          out << dm.names[static_cast<std::size_t>(i)] << ',' << fmt(ip.delta(i)) << '\n';
        out << '\n';
        print_matrix_csv(out, "sigma", dm.names, ip.sigma);
      } else {
        json j = {{"names", dm.names},
                  {"delta", to_json(ip.delta)},
                  {"sigma", to_json(ip.sigma)},
                  {"q", ip.q}};
        if (ip.prior.is_known()) {
          j["phi"] = ip.prior.phi();
        } else {
          j["s"] = ip.prior.shape();
          j["r"] = ip.prior.rate();
        }
        out << canonical_dump(j) << '\n';
      }
      return kExitOk;
    }

    if (*scan) {
      const auto points = truncation_scan(session.vine());
      if (format == "csv") {
        out << "t,divergence,threshold,substantial\n";
        for (const auto& p : points)
          out << p.t << ',' << fmt(p.divergence) << ',' << fmt(kTruncationThreshold) << ','
              << (p.substantial ? 1 : 0) << '\n';
      } else {
        json rows = json::array();
        for (const auto& p : points)
          rows.push_back({{"t", p.t}, {"divergence", p.divergence},
                          {"threshold", kTruncationThreshold},
                          {"substantial", p.substantial}});
        out << canonical_dump(rows) << '\n';
      }
      return kExitOk;
    }

    if (*curves) {
      const SessionConfig& cfg = session.config();
      const VineState& v = session.vine();
      const std::vector<double> probs = {0.1, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9};
      json rows = json::array();
      if (format == "csv") out << "scenario,prob,quantile\n";
      for (int i = 0; i < v.n(); ++i) {
        if (!v.marginal_set(i)) continue;
        const CurveBundle c = marginal_feedback(v, i, cfg.scenarios.link,
                                                session.dispersion().prior, probs, 2);
        for (std::size_t q = 0; q < probs.size(); ++q) {
          if (format == "csv") {
            out << i << ',' << fmt(probs[q]) << ',' << fmt(c.quantiles[q]) << '\n';
          } else {
            rows.push_back({{"scenario", i}, {"prob", probs[q]}, {"quantile", c.quantiles[q]}});
          }
        }
      }
      if (format != "csv") out << canonical_dump(rows) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    if (e.admissible())
      err << "admissible: [" << fmt(e.admissible()->lo) << ", " << fmt(e.admissible()->hi)
          << "]\n";
    if (e.kind() == ErrorKind::io) return kExitIo;
    if (e.kind() == ErrorKind::parse) return kExitSchema;
    return kExitDomain;
  } catch (const json::exception& e) {
    err << "error (parse): " << e.what() << '\n';
    return kExitSchema;
  }
  return kExitOk;
}

}  // namespace elicit
