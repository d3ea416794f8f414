#include "gshape/cli.hpp"

#include "gshape/air.hpp"
#include "gshape/constellation_io.hpp"
#include "gshape/evaluation.hpp"
#include "gshape/generators.hpp"
#include "gshape/optimizer.hpp"
#include "gshape/parallel.hpp"
#include "gshape/quadrature.hpp"
#include "gshape/run_config.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace gshape {

namespace {

void write_trace_csv(std::ostream& os, const OptimisationRun& run) {
  os << "iteration,surrogate_loss,reference_air,wall_ms\n";
  for (const auto& e : run.trace) {
    os << e.iteration << ',' << format_double(e.surrogate_loss) << ','
       << (e.reference_air ? format_double(*e.reference_air) : std::string()) << ',' << format_double(e.wall_ms)
       << '\n';
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  return os;
}

SweepResult load_sweep(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read_sweep_csv(is);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric constellation shaping for the AWGN channel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a constellation file");
  std::string gen_kind;
  std::string gen_out;
  std::string gen_name;
  std::string gen_a, gen_b;
  ConstellationSource src;
  src.dims = 2;
  gen->add_option("kind", gen_kind, "qpsk|bpsk|qam|apsk|sp12|random|product")->required();
  gen->add_option("-N,--dims", src.dims, "Real dimensions (bpsk/qpsk/random)");
  gen->add_option("-M,--points", src.num_points, "Number of points (qam/random)");
  gen->add_option("--seed", src.seed, "Seed (random)");
  gen->add_option("--p1", src.ring_inner, "Inner ring size (apsk)");
  gen->add_option("--p2", src.ring_outer, "Outer ring size (apsk)");
  gen->add_option("--ratio", src.radius_ratio, "Outer/inner radius ratio (apsk)");
  gen->add_option("--phase", src.phase_offset, "Outer ring phase offset in radians (apsk)");
  gen->add_option("--repeat", src.repeat, "Cartesian power of the result");
  gen->add_option("-a", gen_a, "First factor file (product)");
  gen->add_option("-b", gen_b, "Second factor file (product)");
  gen->add_option("--name", gen_name, "Name stored in the file");
  gen->add_option("-o,--output", gen_out, "Output file")->required();

  // evaluate / sweep
  auto add_eval_options = [](CLI::App* sub, std::string& file, std::string& metric, std::string& snr,
                             std::string& estimator, std::string& csv) {
    sub->add_option("-c,--constellation", file, "Constellation file")->required();
    sub->add_option("--metric", metric, "MI or GMI")->required();
    sub->add_option("--snr", snr, "SNR in dB: value or A:B:STEP")->required();
    sub->add_option("--estimator", estimator, "gh:n | mc:samples:seed | rq:L:seed[:rotations]");
    sub->add_option("-o,--output", csv, "CSV output (default: stdout)");
  };
  auto* eval = app.add_subcommand("evaluate", "Evaluate MI/GMI over an SNR grid");
  std::string ev_file, ev_metric, ev_snr, ev_est = "gh:10", ev_csv;
  add_eval_options(eval, ev_file, ev_metric, ev_snr, ev_est, ev_csv);
  auto* sweep = app.add_subcommand("sweep", "SNR sweep with capacity reference columns");
  std::string sw_file, sw_metric, sw_snr, sw_est = "gh:10", sw_csv;
  add_eval_options(sweep, sw_file, sw_metric, sw_snr, sw_est, sw_csv);

  // optimize
  auto* opt = app.add_subcommand("optimize", "Run geometric shaping from a config file");
  std::string opt_cfg, opt_dir;
  opt->add_option("-f,--config", opt_cfg, "Run config")->required();
  opt->add_option("-o,--output", opt_dir, "Output directory (overrides [output] directory)");

  // gain
  auto* gain = app.add_subcommand("gain", "SNR gain of sweep A over sweep B at a target AIR");
  std::string gain_a, gain_b;
  double target_air = std::nan("");
  double overhead = std::nan("");
  gain->add_option("-a", gain_a, "Sweep CSV A")->required();
  gain->add_option("-b", gain_b, "Sweep CSV B")->required();
  auto* target_opt = gain->add_option("--target-air", target_air, "Target AIR in bits per symbol");
  gain->add_option("--overhead", overhead, "Target FEC overhead (uses m of sweep A)")->excludes(target_opt);

  // gaussianity
  auto* gauss = app.add_subcommand("gaussianity", "Pooled-coordinate Gaussianity statistics");
  std::string gauss_file, gauss_csv;
  int bins = 32;
  gauss->add_option("-c,--constellation", gauss_file, "Constellation file")->required();
  gauss->add_option("--bins", bins, "Histogram bins (>= 8)");
  gauss->add_option("-o,--output", gauss_csv, "Histogram CSV");

  // quadcheck
  auto* quad = app.add_subcommand("quadcheck", "Quadrature budget at a dimension");
  int quad_dims = 2;
  int quad_n = 10;
  quad->add_option("-N,--dims", quad_dims, "Real dimensions")->required();
  quad->add_option("--gh-n", quad_n, "GH points per dimension");

  std::vector<std::string> storage(args);
  storage.insert(storage.begin(), "gshape");
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    set_thread_count(threads);

    if (gen->parsed()) {
      LabeledConstellation result;
      if (gen_kind == "product") {
        if (gen_a.empty() || gen_b.empty()) throw CLI::ValidationError("product needs -a and -b");
        auto a = load_constellation(gen_a);
        auto b = load_constellation(gen_b);
        if (!a.labeling || !b.labeling) throw Error("product factors must be labeled");
        Labeled p = cartesian_product({a.constellation, *a.labeling}, {b.constellation, *b.labeling});
        result = {p.constellation, p.labeling};
      } else {
        src.generator = gen_kind;
        result = make_constellation(src);
      }
      if (!gen_name.empty()) result.constellation.set_name(gen_name);
      save_constellation(gen_out, result.constellation, result.labeling ? &*result.labeling : nullptr);
      out << "wrote " << gen_out << " (M=" << result.constellation.num_points()
          << " N=" << result.constellation.dims() << ")\n";
      return 0;
    }

    if (eval->parsed() || sweep->parsed()) {
      const bool plot = sweep->parsed();
      const auto& file = plot ? sw_file : ev_file;
      const auto in = load_constellation(file);
      const Metric metric = parse_metric(plot ? sw_metric : ev_metric);
      const auto grid = parse_snr_grid(plot ? sw_snr : ev_snr);
      const EstimatorSpec spec = EstimatorSpec::parse(plot ? sw_est : ev_est);
      const SweepResult result =
          snr_sweep(in.constellation, in.labeling ? &*in.labeling : nullptr, metric, grid, spec);
      const auto& csv = plot ? sw_csv : ev_csv;
      if (csv.empty()) {
        write_sweep_csv(out, result, plot);
      } else {
        auto os = open_out(csv);
        write_sweep_csv(os, result, plot);
        for (const auto& row : result.rows) {
          out << "snr_db=" << row.snr_db << ' ' << metric_name(metric) << '=' << std::setprecision(6) << std::fixed
              << row.air << std::defaultfloat << '\n';
        }
      }
      return 0;
    }

    if (opt->parsed()) {
      RunConfig cfg = load_run_config(opt_cfg);
      if (!opt_dir.empty()) cfg.output.directory = opt_dir;
      if (cfg.output.directory.empty()) throw Error("no output directory (use -o or [output] directory)");
      const auto init = make_constellation(cfg.constellation);
      const int dims = init.constellation.dims();
      if (cfg.optimizer.quadrature_count == 0) cfg.optimizer.quadrature_count = default_quadrature_count(dims);
      if (!cfg.optimizer.reference_eval) {
        cfg.optimizer.reference_eval = resolved_reference(cfg.optimizer, dims);
      }
      const BitLabeling* lab = nullptr;
      if (cfg.metric == Metric::GMI) {
        if (!init.labeling) throw Error("GMI optimisation needs a labeled initial constellation");
        lab = &*init.labeling;
      }
      const OptimisationRun run = optimize(effective_optimizer_config(cfg), init.constellation, lab);

      const std::filesystem::path dir(cfg.output.directory);
      std::filesystem::create_directories(dir);
      {
        auto os = open_out((dir / "config.ini").string());
        write_run_config(os, cfg);
      }
      save_constellation(dir / "initial.gs", run.initial, lab);
      Constellation final = run.final;
      final.set_name(init.constellation.name() + "-optimised");
      save_constellation(dir / "final.gs", final, lab);
      if (cfg.output.write_trace) {
        auto os = open_out((dir / "trace.csv").string());
        write_trace_csv(os, run);
      }
      int flagged = 0;
      for (const auto& e : run.trace) flagged += e.coincident ? 1 : 0;
      {
        auto os = open_out((dir / "summary.txt").string());
        os << "version = " << kVersion << '\n';
        os << "metric = " << metric_name(cfg.metric) << '\n';
        os << "snr_db = " << format_double(cfg.snr_db) << '\n';
        os << "reference = " << resolved_reference(effective_optimizer_config(cfg), dims).to_string() << '\n';
        os << "initial_reference_air = " << format_double(run.initial_reference_air) << '\n';
        os << "best_reference_air = " << format_double(run.best_reference_air) << '\n';
        os << "best_iteration = " << run.best_iteration << '\n';
        os << "coincident_iterations = " << flagged << '\n';
      }
      if (flagged > 0) err << "warning: points coincided in " << flagged << " iterations\n";
      out << "initial " << metric_name(cfg.metric) << " = " << run.initial_reference_air << ", best = "
          << run.best_reference_air << " at iteration " << run.best_iteration << '\n';
      return 0;
    }

    if (gain->parsed()) {
      const SweepResult a = load_sweep(gain_a);
      const SweepResult b = load_sweep(gain_b);
      double target = target_air;
      if (std::isnan(target)) {
        if (std::isnan(overhead)) throw CLI::ValidationError("gain needs --target-air or --overhead");
        target = a.bits * rate_for_overhead(overhead);
      }
      out << "target_air=" << target << " gain_db=" << gain_db(a, b, target) << '\n';
      return 0;
    }

    if (gauss->parsed()) {
      const auto in = load_constellation(gauss_file);
      const GaussianityStats s = coordinate_gaussianity(in.constellation, bins);
      out << "ks_distance=" << s.ks_distance << " excess_kurtosis=" << s.excess_kurtosis << " sigma=" << s.sigma
          << '\n';
      if (!gauss_csv.empty()) {
        auto os = open_out(gauss_csv);
        os << "bin_lo,bin_hi,density,gaussian_density\n";
        for (std::size_t k = 0; k < s.density.size(); ++k) {
          const double mid = 0.5 * (s.bin_edges[k] + s.bin_edges[k + 1]);
          const double g = std::exp(-0.5 * mid * mid / (s.sigma * s.sigma)) / (s.sigma * std::sqrt(2.0 * std::numbers::pi));
          os << format_double(s.bin_edges[k]) << ',' << format_double(s.bin_edges[k + 1]) << ','
             << format_double(s.density[k]) << ',' << format_double(g) << '\n';
        }
      }
      return 0;
    }

    if (quad->parsed()) {
      const int count = default_quadrature_count(quad_dims);
      const double gh = gh_grid_size(quad_n, quad_dims);
      out << "N=" << quad_dims << " L=" << count << " GH(n=" << quad_n << ")=" << std::setprecision(17) << gh
          << " R=" << std::setprecision(6) << gh / count << '\n';
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace gshape
