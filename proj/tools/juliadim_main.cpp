#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "cli_run.hpp"
#include "juliadim.h"

namespace {

struct Flags {
  std::string config, map_text, c_text, estimator, angles, a_text, base_text,
      base_angle, out, format, cache_dir, cache_action;
  int degree = 2, depth = 10, Ndepth = 6, Nmin = 2, samples = 2, threads = 1;
  double delta = 0, Delta = 0, radius = 0.1, kappa = 1.2, eta = 0.2;
  double tmin = 0.1, tmax = 2.0, tstep = 0.05, tol_t = 1e-6;
  std::uint64_t budget = 1ull << 24;
  unsigned seed = 0;
  bool plot = false;
};

void parse_map_text(const std::string& text, jdcli::MapSpec& spec) {
  auto split_coeffs = [](const std::string& body) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      std::size_t comma = body.find(',', pos);
      std::string item = body.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      double re = 0, im = 0;
      jdcli::parse_complex(item, &re, &im);
      out.push_back(re);
      out.push_back(im);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return out;
  };
  if (text == "unicritical") {
    spec.kind = "unicritical";
  } else if (text.rfind("poly:", 0) == 0) {
    spec.kind = "polynomial";
    spec.coeffs = split_coeffs(text.substr(5));
  } else if (text.rfind("rat:", 0) == 0) {
    std::string body = text.substr(4);
    std::size_t bar = body.find('|');
    if (bar == std::string::npos)
      throw std::runtime_error(
          "rational map spec needs 'rat:num|den' with '|' between "
          "coefficient lists");
    spec.kind = "rational";
    spec.num = split_coeffs(body.substr(0, bar));
    spec.den = split_coeffs(body.substr(bar + 1));
  } else {
    throw std::runtime_error("unknown map spec '" + text +
                             "'; expected unicritical, poly:a0,a1,..., or "
                             "rat:num|den");
  }
}

void add_flags(CLI::App* sub, const std::shared_ptr<Flags>& f) {
  sub->add_option("--config", f->config,
                  "JSON config file; explicit flags override its values");
  sub->add_option("--map", f->map_text,
                  "map spec: unicritical | poly:a0,a1,... | rat:num|den");
  sub->add_option("--c", f->c_text,
                  "unicritical parameter c, e.g. -0.5 or 0.1+0.2i");
  sub->add_option("--degree", f->degree, "unicritical degree d");
  sub->add_option("--estimator", f->estimator, "estimator id");
  sub->add_option("-n,--depth", f->depth, "backward orbit depth n");
  sub->add_option("-N,--puzzle-depth", f->Ndepth, "finest puzzle depth N");
  sub->add_option("--puzzle-depth-min", f->Nmin,
                  "first puzzle depth of the convergence family");
  sub->add_option("--delta", f->delta, "sample ball radius delta");
  sub->add_option("--Delta", f->Delta,
                  "critical exclusion distance Delta (delta <= Delta/10)");
  sub->add_option("-m,--samples", f->samples, "sample vertex count m");
  sub->add_option("-r,--radius", f->radius, "pullback root ball radius r");
  sub->add_option("--kappa", f->kappa, "enclosure safety factor (>= 1)");
  sub->add_option("--eta", f->eta,
                  "equipotential level (puzzles) and base point potential");
  sub->add_option("--angles", f->angles,
                  "dissection ray angles in turns, e.g. 1/3,2/3");
  sub->add_option("--A", f->a_text,
                  "restriction schedule: 'linear' or a constant value");
  sub->add_option("--t-min", f->tmin, "t grid start");
  sub->add_option("--t-max", f->tmax, "t grid end");
  sub->add_option("--t-step", f->tstep, "t grid step");
  sub->add_option("--tol-t", f->tol_t, "zero solver tolerance in t");
  sub->add_option("--node-budget", f->budget, "backward node budget");
  sub->add_option("--threads", f->threads,
                  "worker threads; overrides JULIADIM_THREADS");
  sub->add_option("--seed", f->seed, "sample orientation seed");
  sub->add_option("--base", f->base_text,
                  "explicit base point instead of ray selection");
  sub->add_option("--base-angle", f->base_angle,
                  "external ray angle for base point selection");
  sub->add_option("--out", f->out,
                  "output path stem; writes <out>.csv and <out>.json");
  sub->add_option("--format", f->format, "stdout payload: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--plot", f->plot, "also write SVG plots (needs --out)");
  sub->add_option("--cache-dir", f->cache_dir, "puzzle cache directory");
}

jdcli::RunConfig build_config(CLI::App* sub, const Flags& f,
                              const std::string& default_estimator) {
  jdcli::RunConfig cfg;
  cfg.estimator = default_estimator;
  if (int v = jdcli::env_threads(); v >= 1) cfg.threads = v;
  if (sub->count("--config")) jdcli::load_config_file(f.config, cfg);
  auto on = [&](const std::string& name) { return sub->count(name) > 0; };
  if (on("--map")) parse_map_text(f.map_text, cfg.map);
  if (on("--degree")) cfg.map.degree = f.degree;
  if (on("--c"))
    jdcli::parse_complex(f.c_text, &cfg.map.c_re, &cfg.map.c_im);
  if (on("--estimator")) cfg.estimator = f.estimator;
  if (on("--depth")) cfg.depth = f.depth;
  if (on("--puzzle-depth")) cfg.puzzle_depth = f.Ndepth;
  if (on("--puzzle-depth-min")) cfg.puzzle_depth_min = f.Nmin;
  if (on("--delta")) cfg.delta = f.delta;
  if (on("--Delta")) cfg.big_delta = f.Delta;
  if (on("--samples")) cfg.samples = f.samples;
  if (on("--radius")) cfg.radius = f.radius;
  if (on("--kappa")) cfg.kappa = f.kappa;
  if (on("--eta")) cfg.eta = f.eta;
  if (on("--angles")) cfg.angles = f.angles;
  if (on("--A")) {
    if (f.a_text == "linear") {
      cfg.a_schedule = "linear";
    } else {
      cfg.a_schedule = "constant";
      cfg.a_value = jdcli::parse_double(f.a_text, "restriction value");
    }
  }
  if (on("--t-min")) cfg.t_min = f.tmin;
  if (on("--t-max")) cfg.t_max = f.tmax;
  if (on("--t-step")) cfg.t_step = f.tstep;
  if (on("--tol-t")) cfg.tol_t = f.tol_t;
  if (on("--node-budget")) cfg.node_budget = f.budget;
  if (on("--threads")) cfg.threads = f.threads;
  if (on("--seed")) cfg.seed = f.seed;
  if (on("--base")) {
    jdcli::parse_complex(f.base_text, &cfg.base_re, &cfg.base_im);
    cfg.has_base = true;
  }
  if (on("--base-angle")) cfg.base_angle = f.base_angle;
  if (on("--out")) cfg.out = f.out;
  if (on("--format")) cfg.format = f.format;
  if (on("--plot")) cfg.plot = f.plot;
  if (on("--cache-dir")) cfg.cache_dir = f.cache_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pressure curves, Perron roots, and dimension bounds for the Julia "
      "sets of polynomial and rational maps"};
  app.set_version_flag("--version", jd_version());
  app.require_subcommand(1);
  int exit_code = 0;

  struct SubSpec {
    const char* name;
    const char* help;
    const char* default_estimator;
    int (*driver)(jdcli::RunConfig);
  };
  const SubSpec subs[] = {
      {"tree-pressure", "backward orbit tree pressure over the t grid",
       "tree-plain", &jdcli::run_tree},
      {"mcmullen", "puzzle transfer matrix pressure and Perron roots",
       "mcm-plain", &jdcli::run_mcmullen},
      {"pullback", "pullback enclosure (infimum) pressure", "pullback",
       &jdcli::run_pullback},
      {"dimension", "dimension bound: first zero of the chosen estimator",
       "tree-plain", &jdcli::run_dimension},
      {"diagnose", "telescope defects and metric consistency checks",
       "pullback", &jdcli::run_diagnose},
  };
  for (const auto& spec : subs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    auto flags = std::make_shared<Flags>();
    add_flags(sub, flags);
    std::string def = spec.default_estimator;
    auto driver = spec.driver;
    sub->callback([sub, flags, def, driver, &exit_code]() {
      exit_code = driver(build_config(sub, *flags, def));
    });
  }
  {
    CLI::App* sub =
        app.add_subcommand("cache", "inspect or clear the puzzle cache");
    auto flags = std::make_shared<Flags>();
    sub->add_option("action", flags->cache_action, "inspect or clear")
        ->required()
        ->check(CLI::IsMember({"inspect", "clear"}));
    sub->add_option("--cache-dir", flags->cache_dir,
                    "puzzle cache directory");
    sub->callback([sub, flags, &exit_code]() {
      jdcli::RunConfig cfg;
      if (sub->count("--cache-dir")) cfg.cache_dir = flags->cache_dir;
      exit_code = jdcli::run_cache(flags->cache_action, cfg);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
