#include "lrf/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "lrf/dataset.hpp"
#include "lrf/error.hpp"
#include "lrf/evaluation.hpp"
#include "lrf/fileutil.hpp"
#include "lrf/model.hpp"
#include "lrf/refinement.hpp"
#include "lrf/topology.hpp"
#include "lrf/training.hpp"

namespace lrf::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Common {
  int jobs = 0;
  std::uint64_t seed = 0;
  std::string split = "0.8,0.1,0.1";
};

unsigned resolve_jobs(int flag) {
  if (flag > 0) return unsigned(flag);
  if (flag < 0) throw UsageError("--jobs must be >= 1");
  if (const char* env = std::getenv("LRF_JOBS"); env && *env) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return unsigned(v);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("LRF_JOBS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct TrainOpts {
  std::string manifest;
  std::string solver = "mr";
  std::string strategy = "gray";
  int rf = 3;
  int dilation = 1;
  double lambda = 1.0;
  std::string out;
  bool time = false;
  double lasso_tol = 1e-7;
  int lasso_sweeps = 10000;
  std::size_t ridge_cap = kDefaultRidgeCap;

  TrainSpec spec() const {
    TrainSpec s;
    s.solver = parse_solver(solver);
    s.strategy = parse_strategy(strategy);
    s.taps_per_side = rf;
    s.dilation = dilation;
    s.lasso.tolerance = lasso_tol;
    s.lasso.max_sweeps = lasso_sweeps;
    s.ridge_cap = ridge_cap;
    return s;
  }
};

void add_train_flags(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--manifest", o.manifest, "CSV of input_path,target_path pairs")->required();
  cmd->add_option("--solver", o.solver, "mr|ridge|lasso|omp")->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "gray|per-channel|replicate-gray|joint-color")->capture_default_str();
  cmd->add_option("--rf", o.rf, "receptive field taps per side (odd)")->capture_default_str();
  cmd->add_option("--dilation", o.dilation, "spacing between receptive-field taps")->capture_default_str();
  cmd->add_option("--lasso-tol", o.lasso_tol, "LASSO coordinate-update tolerance")->capture_default_str();
  cmd->add_option("--lasso-sweeps", o.lasso_sweeps, "LASSO sweep limit")->capture_default_str();
  cmd->add_option("--ridge-cap", o.ridge_cap, "largest dense ridge matrix, in entries")->capture_default_str();
}

void add_common_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--jobs", c.jobs, "worker threads (default: $LRF_JOBS or all cores)");
  cmd->add_option("--seed", c.seed, "split seed")->capture_default_str();
  cmd->add_option("--split", c.split, "train,val,test fractions")->capture_default_str();
}

std::vector<ImagePair> concat(std::vector<ImagePair> a, const std::vector<ImagePair>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void print_model_summary(std::ostream& out, const SparseRowModel& m) {
  const auto& g = m.geometry;
  out << "solver: " << to_string(m.solver) << "\n"
      << "lambda: " << exact(m.lambda) << "\n"
      << "strategy: " << to_string(m.strategy) << "\n"
      << "input: " << g.in_height << "x" << g.in_width << "\n"
      << "output: " << g.out_height << "x" << g.out_width << "\n"
      << "receptive_field: " << g.taps_per_side << "x" << g.taps_per_side << " dilation " << g.dilation << "\n"
      << "mappings: " << m.mappings.size() << "\n"
      << "parameters: " << m.parameter_count() << "\n"
      << "nonzeros: " << count_nonzeros(m, 0.0) << "\n";
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("malformed grid value '" + item + "'");
    }
  }
  return values;
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) {
      const int n = std::stoi(text);
      return {n, n};
    }
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw UsageError("malformed size '" + text + "' (expected HxW)");
  }
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Masked linear regression with local receptive fields for image-to-image mapping", "lrf"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  TrainOpts topts;

  // train
  auto* train = app.add_subcommand("train", "fit a model on the train+val part of a manifest");
  add_train_flags(train, topts);
  add_common_flags(train, common);
  train->add_option("--lambda", topts.lambda, "regularizer (integer support bound for omp)")->required();
  train->add_option("--out", topts.out, "output .lrm path")->required();
  train->add_flag("--time", topts.time, "report wall time");

  // cv
  std::string grid_text = "default";
  std::string csv_path;
  bool omp_comparable = false;
  auto* cv = app.add_subcommand("cv", "select lambda on validation, refit on train+val, score on test");
  add_train_flags(cv, topts);
  add_common_flags(cv, common);
  cv->add_option("--grid", grid_text, "'default' or comma-separated values")->capture_default_str();
  cv->add_option("--csv", csv_path, "write the (lambda, val_mse_x100) table here instead of stdout");
  cv->add_option("--out", topts.out, "save the refit model here");
  cv->add_flag("--omp-comparable", omp_comparable, "cap the default OMP grid at min(N, r^2 + 1)");
  cv->add_flag("--time", topts.time, "report wall time");

  // synth
  std::string model_path, in_path, out_path, synth_path, alpha_out;
  bool no_bias = false, synth_time = false;
  auto* synth = app.add_subcommand("synth", "apply a model to one image");
  synth->add_option("--model", model_path)->required();
  synth->add_option("--in", in_path)->required();
  synth->add_option("--out", out_path)->required();
  synth->add_flag("--no-bias", no_bias, "synthesize with every bias set to zero");
  synth->add_flag("--time", synth_time, "report wall time");

  // refine
  AlphaParams ap;
  auto* refine_cmd = app.add_subcommand("refine", "blend input and synthesized images through the alpha map");
  refine_cmd->add_option("--model", model_path)->required();
  refine_cmd->add_option("--in", in_path)->required();
  refine_cmd->add_option("--synth", synth_path, "synthesized image (computed from --in when omitted)");
  refine_cmd->add_option("--out", out_path)->required();
  refine_cmd->add_option("--alpha-out", alpha_out, "write the alpha map as a gray image");
  refine_cmd->add_option("--tau", ap.threshold)->capture_default_str();
  refine_cmd->add_option("--steepness", ap.steepness)->capture_default_str();
  refine_cmd->add_option("--radius", ap.dilation_radius, "dilation radius in pixels (default: 3% of min side)");
  refine_cmd->add_option("--sigma", ap.gaussian_sigma, "Gaussian sigma in pixels (default: 2% of min side)");

  // eval
  std::string subset = "all";
  std::string eval_manifest;
  bool eval_refine = false;
  auto* eval = app.add_subcommand("eval", "report mse_x100 of a model on a manifest");
  eval->add_option("--model", model_path)->required();
  eval->add_option("--manifest", eval_manifest)->required();
  eval->add_option("--subset", subset, "all|train|val|test part of --split")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  eval->add_flag("--refine", eval_refine, "score alpha-refined outputs instead of raw predictions");
  add_common_flags(eval, common);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print masks and model summaries");
  inspect->require_subcommand(1);
  std::string size_text = "5x5";
  int irf = 3, idil = 1;
  auto* imask = inspect->add_subcommand("mask", "print the 0/1 receptive-field mask");
  imask->add_option("--size", size_text, "HxW")->capture_default_str();
  imask->add_option("--rf", irf)->capture_default_str();
  imask->add_option("--dilation", idil)->capture_default_str();
  std::string bias_out;
  auto* imodel = inspect->add_subcommand("model", "summarize a model file");
  imodel->add_option("--model", model_path)->required();
  imodel->add_option("--bias-out", bias_out, "write the rescaled bias image");

  std::vector<std::string> argv_store{"lrf"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kUsage;
  }

  if (*train) {
    const Executor exec(resolve_jobs(common.jobs));
    const auto spec = topts.spec();
    const auto pairs = load_manifest(topts.manifest);
    const auto parts = split(pairs, parse_split(common.split, common.seed));
    const auto fit_on = concat(parts.train, parts.val);
    const auto t0 = Clock::now();
    const auto model = fit_model(fit_on, spec, topts.lambda, exec);
    const double train_s = seconds_since(t0);
    save_model(model, topts.out);
    out << "trained " << to_string(spec.solver) << " on " << fit_on.size() << " pairs ("
        << parts.test.size() << " held out); parameters " << model.parameter_count() << "; wrote " << topts.out
        << "\n";
    if (topts.time) out << "train_seconds=" << fmt(train_s) << "\n";
    return kOk;
  }

  if (*cv) {
    const Executor exec(resolve_jobs(common.jobs));
    const auto spec = topts.spec();
    const auto pairs = load_manifest(topts.manifest);
    const auto parts = split(pairs, parse_split(common.split, common.seed));
    if (parts.train.empty() || parts.val.empty()) throw DataError("cv needs nonempty train and validation parts");
    CvGrid grid;
    if (grid_text == "default") {
      const auto& img = parts.train.front().input;
      const std::size_t n_rows = parts.train.size() * (spec.strategy == ChannelStrategy::JointColor
                                                           ? std::size_t(img.channels)
                                                           : 1);
      grid = CvGrid::defaults(spec.solver, n_rows, img.plane_size(), spec.taps_per_side, omp_comparable);
    } else {
      grid.solver = spec.solver;
      grid.values = parse_grid(grid_text);
    }
    const auto t0 = Clock::now();
    const auto result = cross_validate(parts.train, parts.val, spec, grid, exec);
    const double cv_s = seconds_since(t0);

    std::ostringstream table;
    table << "lambda,val_mse_x100\n";
    for (const auto& [lambda, score] : result.scores) table << exact(lambda) << "," << fmt(score) << "\n";
    if (csv_path.empty()) {
      out << table.str();
    } else {
      write_file_atomically(csv_path, table.str());
    }
    out << "chosen_lambda=" << exact(result.best_lambda) << "\n";
    if (!parts.test.empty())
      out << "test_mse_x100=" << fmt(evaluate_mse_x100(result.model, parts.test)) << "\n";
    if (!topts.out.empty()) save_model(result.model, topts.out);
    if (topts.time) out << "cv_seconds=" << fmt(cv_s) << "\n";
    return kOk;
  }

  if (*synth) {
    const auto model = load_model(model_path);
    const auto image = read_image(in_path);
    const auto t0 = Clock::now();
    const auto y = no_bias ? weight_only_synthesize(model, image) : synthesize(model, image);
    const double ms = 1e3 * seconds_since(t0);
    write_image(out_path, y);
    if (synth_time) out << "synth_ms=" << fmt(ms) << "\n";
    return kOk;
  }

  if (*refine_cmd) {
    const auto model = load_model(model_path);
    const auto x = read_image(in_path);
    const auto y = synth_path.empty() ? synthesize(model, x) : read_image(synth_path);
    const auto alpha = compute_alpha(model, ap);
    if (alpha.degenerate) err << "warning: all receptive fields have equal L1 norm; alpha map is zero\n";
    write_image(out_path, refine(x, y, alpha.alpha));
    if (!alpha_out.empty()) write_image(alpha_out, alpha.alpha);
    return kOk;
  }

  if (*eval) {
    const auto model = load_model(model_path);
    const auto pairs = load_manifest(eval_manifest);
    std::vector<ImagePair> chosen;
    if (subset == "all") {
      chosen = pairs;
    } else {
      const auto parts = split(pairs, parse_split(common.split, common.seed));
      chosen = subset == "train" ? parts.train : subset == "val" ? parts.val : parts.test;
    }
    if (chosen.empty()) throw DataError("no pairs selected for evaluation");
    double score;
    if (eval_refine) {
      const auto alpha = compute_alpha(model, AlphaParams{});
      std::vector<ImageBuffer> pred, tgt;
      for (const auto& p : chosen) {
        pred.push_back(refine(p.input, synthesize_raw(model, p.input), alpha.alpha));
        tgt.push_back(p.target);
      }
      score = mse_x100(pred, tgt);
    } else {
      score = evaluate_mse_x100(model, chosen);
    }
    out << "solver,rf,dilation,lambda,pairs,mse_x100\n"
        << to_string(model.solver) << "," << model.geometry.taps_per_side << "," << model.geometry.dilation << ","
        << exact(model.lambda) << "," << chosen.size() << "," << fmt(score) << "\n";
    return kOk;
  }

  if (*imask) {
    const auto [h, w] = parse_size(size_text);
    out << Topology(RfGeometry::square(h, w, irf, idil)).mask_text();
    return kOk;
  }

  if (*imodel) {
    const auto model = load_model(model_path);
    print_model_summary(out, model);
    if (!bias_out.empty()) write_image(bias_out, bias_image(model));
    return kOk;
  }
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "error[" << e.error_class() << "]: " << e.what() << "\n";
    if (dynamic_cast<const UsageError*>(&e)) return kUsage;
    if (dynamic_cast<const DataError*>(&e)) return kData;
    if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    return kInternal;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return kInternal;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace lrf::cli
