#include "bilip/cli.hpp"

#include "bilip/onedim.hpp"
#include "bilip/spiralbounds.hpp"

#include <chrono>
#include <fstream>
#include <set>

namespace bilip::cli {

namespace {

Vec vec_from_json(const nlohmann::json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

diffeo::SmoothMap smooth_from_spec(const nlohmann::json& spec, int dim);

factorize::SphereMap::Term term_from_spec(const nlohmann::json& spec, int dim) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "rotation") {
    const double angle = spec.at("angle").get<double>();
    if (spec.contains("axis_point")) {
      const auto p = geom::Point::finite(vec_from_json(spec["axis_point"]));
      return geom::rotation_fixing(p, angle);
    }
    const auto plane = spec.at("plane");
    const int i = plane.at(0).get<int>(), j = plane.at(1).get<int>();
    if (i < 0 || j < 0 || i > dim || j > dim || i == j)
      throw std::invalid_argument("rotation plane indices out of range");
    return geom::Rotation::plane(unit_axis(dim + 1, i), unit_axis(dim + 1, j),
                                 angle);
  }
  return smooth_from_spec(spec, dim);
}

diffeo::SmoothMap smooth_from_spec(const nlohmann::json& spec, int dim) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "identity") return diffeo::make_identity(dim);
  if (kind == "twist") {
    const double amplitude = spec.at("amplitude").get<double>();
    const double inner = spec.value("inner", 1.0 / 12.0);
    const double outer = spec.value("outer", 1.0 / 3.0);
    return diffeo::make_twist(amplitude, inner, outer, dim);
  }
  if (kind == "bump_push") {
    const double amplitude = spec.at("amplitude").get<double>();
    const double outer = spec.value("outer", 1.0 / 3.0);
    Vec direction = spec.contains("direction")
                        ? vec_from_json(spec["direction"])
                        : unit_axis(dim, std::min(1, dim - 1));
    direction /= direction.norm();
    return diffeo::make_bump_push(direction, amplitude, outer);
  }
  if (kind == "spiral") return diffeo::make_spiral(spec.at("k").get<double>());
  if (kind == "translate") {
    auto inner = smooth_from_spec(spec.at("inner_map"), dim);
    return diffeo::translate(inner, vec_from_json(spec.at("offset")));
  }
  if (kind == "compose") {
    const auto& terms = spec.at("terms");
    if (terms.empty()) return diffeo::make_identity(dim);
    auto acc = smooth_from_spec(terms[0], dim);
    for (std::size_t i = 1; i < terms.size(); ++i)
      acc = diffeo::compose(smooth_from_spec(terms[i], dim), acc);
    return acc;
  }
  throw std::invalid_argument("unknown map kind: " + kind);
}

onedim::IntervalMap interval_from_spec(const nlohmann::json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "identity") return onedim::identity_map();
  if (kind == "linear") return onedim::linear_map(spec.value("slope", 2.0));
  if (kind == "quadratic") return onedim::quadratic_map();
  if (kind == "sine") return onedim::sine_map(spec.value("c", 0.25));
  throw std::invalid_argument("unknown interval map kind: " + kind);
}

class OutputWriter {
 public:
  explicit OutputWriter(const std::filesystem::path& dir) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return out;
  }

  void write_json(const std::string& name, const nlohmann::json& j) {
    auto out = open(name);
    out << j.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
};

nlohmann::json run_factorize(const RunConfig& cfg, OutputWriter& out,
                             bool* pass) {
  const auto f = map_from_spec(cfg.map_spec, cfg.dim);
  factorize::PipelineOptions opt;
  opt.seed = cfg.seed;
  opt.certificate_samples = cfg.certificate_samples;
  opt.verify_samples = cfg.samples;
  const auto fac = factorize::factorize_diffeo(f, cfg.eps, opt);
  const auto verify =
      factorize::verify_factorization(f, fac, cfg.samples, cfg.seed);
  *pass = verify.passed();

  auto csv = out.open("factors.csv");
  csv.precision(17);
  csv << "index,kind,leg,t0,t1,L_lower,L_upper,max_disp,disp_upper\n";
  for (std::size_t i = 0; i < fac.steps.size(); ++i) {
    const auto& s = fac.steps[i];
    const auto& c = s.certificate;
    csv << i << ','
        << (s.kind == factorize::FactorStep::Kind::path_slice
                ? "path_slice"
                : "rotation_slice")
        << ',' << s.leg << ',' << s.t0 << ',' << s.t1 << ',' << c.L_lower
        << ',' << c.L_upper.value_or(std::nan("")) << ',' << c.max_disp << ','
        << c.disp_upper.value_or(std::nan("")) << '\n';
  }

  nlohmann::json report = factorize::to_json(fac);
  report["max_deviation"] = verify.max_deviation;
  report["certificates_ok"] = verify.certificates_ok;
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& s : fac.steps) certs.push_back(certify::to_json(s.certificate));
  report["certificates"] = std::move(certs);
  return report;
}

nlohmann::json run_certify(const RunConfig& cfg, OutputWriter& out,
                           bool* pass) {
  const auto f = map_from_spec(cfg.map_spec, cfg.dim);
  certify::MapUnderTest mut;
  mut.dim = cfg.dim;
  mut.eval = [f](const geom::Point& x) { return f.apply(x); };
  const auto sampler =
      sampling::Sampler::sphere(cfg.dim, cfg.samples, cfg.seed);
  const auto cert =
      certify::estimate_distortion(mut, sampler, certify::Metric::spherical);
  *pass = true;

  auto csv = out.open("samples.csv");
  csv.precision(17);
  csv << "index,chi_displacement\n";
  const auto pts = sampler.points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    csv << i << ',' << geom::chi_dist(f.apply(pts[i]), pts[i]) << '\n';

  nlohmann::json report;
  report["certificates"] = nlohmann::json::array({certify::to_json(cert)});
  report["factor_count"] = 0;
  report["residual"] = 0.0;
  return report;
}

nlohmann::json run_path_bounds(const RunConfig& cfg, OutputWriter& out,
                               bool* pass) {
  const auto base = smooth_from_spec(cfg.map_spec, cfg.dim);
  const auto prop = pathcore::propagate(base);
  const auto b = pathcore::bounds(
      prop, sampling::Sampler::euclid_ball(Vec::Zero(cfg.dim), 1.0 / 3.0, 64,
                                           cfg.seed));

  Rng rng(cfg.seed);
  std::vector<std::pair<double, double>> st_pairs;
  const int pair_count = std::max(1, cfg.samples / 20);
  for (int i = 0; i < pair_count; ++i)
    st_pairs.emplace_back(rng.uniform01(), rng.uniform01());

  auto csv = out.open("transitions.csv");
  pathcore::write_transition_csv(
      csv, prop, b, st_pairs,
      sampling::Sampler::euclid_ball(Vec::Zero(cfg.dim), 3.0, 20, cfg.seed));

  double worst_gap = 0.0;
  bool sound = true;
  for (const auto& [s, t] : st_pairs) {
    const auto tb = pathcore::theoretical_bounds(b, s, t);
    for (const auto& x : sampling::Sampler::euclid_ball(Vec::Zero(cfg.dim), 3.0,
                                                        20, cfg.seed)
                             .finite_points()) {
      const double disp =
          (pathcore::transition_eval(prop, s, t, x) - x).norm();
      if (disp > tb.disp + 1e-9) sound = false;
      worst_gap = std::max(worst_gap, disp - tb.disp);
    }
  }
  *pass = sound;

  nlohmann::json report;
  report["T"] = b.T;
  report["eta_slope"] = b.eta_slope;
  report["sampled_sup_dg"] = b.sampled_sup_dg;
  report["displacement_bound_sound"] = sound;
  report["certificates"] = nlohmann::json::array();
  report["factor_count"] = 0;
  report["residual"] = worst_gap;
  return report;
}

nlohmann::json run_onedim(const RunConfig& cfg, OutputWriter& out,
                          bool* pass) {
  const auto f = interval_from_spec(cfg.map_spec);
  const auto factors = onedim::factor_full(f, cfg.alpha);

  const int grid = std::max(16, cfg.samples);
  auto csv = out.open("factors.csv");
  csv.precision(17);
  csv << "index,deriv_min,deriv_max,L\n";
  nlohmann::json jfactors = nlohmann::json::array();
  bool ok = true;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& fac = factors[i];
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int k = 0; k <= grid; ++k) {
      const double x = fac.a + (fac.b - fac.a) * k / grid;
      const double d = fac.derivative(x);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    ok = ok && dmax <= cfg.alpha * (1.0 + 1e-6) &&
         dmin >= 1.0 / cfg.alpha * (1.0 - 1e-6);
    csv << i << ',' << dmin << ',' << dmax << ',' << fac.L << '\n';
    jfactors.push_back({{"deriv_min", dmin}, {"deriv_max", dmax}, {"L", fac.L}});
  }

  // Composition residual against the input map.
  double residual = 0.0;
  const int rgrid = std::min(grid, 512);
  for (int k = 0; k <= rgrid; ++k) {
    const double x = f.a + (f.b - f.a) * k / rgrid;
    double y = x;
    for (const auto& fac : factors) y = fac.eval(y);
    residual = std::max(residual, std::abs(y - f.eval(x)));
  }
  ok = ok && residual <= 1e-8;
  *pass = ok;

  nlohmann::json report;
  report["alpha"] = cfg.alpha;
  report["factor_count"] = factors.size();
  report["factors"] = std::move(jfactors);
  report["residual"] = residual;
  report["certificates"] = nlohmann::json::array();
  return report;
}

nlohmann::json run_spiral(const RunConfig& cfg, OutputWriter& out,
                          bool* pass) {
  const auto bound = spiralbounds::spiral_bound(cfg.spiral_k, cfg.alpha);
  const std::vector<int> resolutions = {32, 64, 128, 256, 512};
  const auto table = spiralbounds::spiral_scan_table(cfg.spiral_k, 0.5, 2.0,
                                                     resolutions, cfg.seed);
  auto csv = out.open("scan.csv");
  csv.precision(17);
  csv << "resolution,estimate\n";
  for (const auto& [res, est] : table) csv << res << ',' << est << '\n';

  *pass = table.back().second <= bound.L + 1e-9;

  nlohmann::json report = spiralbounds::to_json(bound);
  report["scan_estimate"] = table.back().second;
  report["certificates"] = nlohmann::json::array();
  report["factor_count"] = 0;
  report["residual"] = bound.L - table.back().second;
  return report;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.echo = j;
  cfg.command = j.at("command").get<std::string>();
  const std::set<std::string> known = {"factorize", "certify", "path-bounds",
                                       "onedim", "spiral"};
  if (!known.count(cfg.command))
    throw std::invalid_argument("unknown command: " + cfg.command);

  cfg.dim = j.value("n", 2);
  if (cfg.command != "onedim" && cfg.command != "spiral" && cfg.dim < 2)
    throw std::invalid_argument("sphere commands need dimension n >= 2");
  cfg.eps = j.value("eps", 0.2);
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  cfg.alpha = j.value("alpha", std::sqrt(2.0));
  cfg.spiral_k = j.value("k", 1.5);
  cfg.samples = j.value("samples", 1000);
  if (cfg.samples < 1) throw std::invalid_argument("samples must be positive");
  cfg.certificate_samples = j.value("certificate_samples", 32);
  cfg.seed = j.value("seed", 7ULL);
  if (j.contains("map")) cfg.map_spec = j["map"];
  if (j.contains("out")) {
    cfg.out_dir = j["out"].get<std::string>();
    cfg.echo.erase("out");  // keep reports byte-identical across output dirs
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config: " + path.string());
  nlohmann::json j;
  in >> j;
  return parse_config(j);
}

factorize::SphereMap map_from_spec(const nlohmann::json& spec, int dim) {
  if (spec.is_null()) return factorize::SphereMap::identity(dim);
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "word") {
    std::vector<factorize::SphereMap::Term> terms;
    for (const auto& t : spec.at("terms")) terms.push_back(term_from_spec(t, dim));
    return factorize::SphereMap::from_word(dim, std::move(terms));
  }
  if (kind == "identity") return factorize::SphereMap::identity(dim);
  return factorize::SphereMap::from_term(term_from_spec(spec, dim));
}

RunResult run(const RunConfig& cfg) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json body;
  bool pass = false;
  try {
    OutputWriter out(cfg.out_dir);
    if (cfg.command == "factorize")
      body = run_factorize(cfg, out, &pass);
    else if (cfg.command == "certify")
      body = run_certify(cfg, out, &pass);
    else if (cfg.command == "path-bounds")
      body = run_path_bounds(cfg, out, &pass);
    else if (cfg.command == "onedim")
      body = run_onedim(cfg, out, &pass);
    else
      body = run_spiral(cfg, out, &pass);

    nlohmann::json report;
    report["command"] = cfg.command;
    report["config"] = cfg.echo;
    for (auto& [key, value] : body.items()) report[key] = value;
    report["pass"] = pass;
    out.write_json("report.json", report);

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    auto timing = out.open("timing.txt");
    timing << "wall_seconds " << result.wall_seconds << '\n';

    result.report = std::move(report);
    result.exit_code = pass ? kOk : 1;
  } catch (const OutOfScopeError& e) {
    result.exit_code = kOutOfScope;
    result.message = e.what();
  } catch (const std::invalid_argument& e) {
    result.exit_code = kInvalidConfig;
    result.message = e.what();
  } catch (const std::exception& e) {
    const std::string what = e.what();
    result.exit_code =
        what.find("cannot write") != std::string::npos ? kOutputError : 1;
    result.message = what;
  }
  return result;
}

}  // namespace bilip::cli
