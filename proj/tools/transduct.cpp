// transduct: transductive classification of pre-computed embeddings.
//
//   transduct run-zs --query q.emb --text t.emb --out pred.csv [--truth truth.labels]
//   transduct run-fs --query q.emb --text t.emb --support s.emb --support-labels s.labels --out pred.csv
//   transduct synth  --out-dir task/ [--seed 7]
//   transduct eval   --pred pred.csv --truth truth.labels
//
// Every option can also come from a key=value file given with --config.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "transduct/affinity.hpp"
#include "transduct/data_io.hpp"
#include "transduct/fewshot.hpp"
#include "transduct/solver.hpp"
#include "transduct/synth.hpp"
#include "transduct/zero_shot.hpp"

namespace {

using namespace transduct;

struct SolveFlags {
  std::string query, text, out = "predictions.csv", truth, trace, graph_dump;
  double tau = 100.0;
  double lambda = 1.0;
  int outer_iters = 10;
  int inner_iters = 5;
  int knn = 3;
  int top_m = 8;
  bool symmetrize = false;
  int threads = 0;
};

struct FewShotFlags {
  std::string support, support_labels, validation, validation_labels, scores;
  std::optional<double> gamma;
  std::vector<double> grid{std::begin(kDefaultGammaGrid), std::end(kDefaultGammaGrid)};
  std::uint64_t seed = 0;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  // Consumed by expand_config before parsing; registered for --help.
  static std::string config_file;
  cmd->add_option("--config", config_file, "key=value file of option values; command-line flags win");
  cmd->add_option("--query", f.query, "Query embeddings (EMB1 or .csv)")->required();
  cmd->add_option("--text", f.text, "Text prototype embeddings, one row per class")->required();
  cmd->add_option("--out", f.out, "Predictions CSV")->capture_default_str();
  cmd->add_option("--truth", f.truth, "Ground-truth query labels; prints accuracies");
  cmd->add_option("--trace", f.trace, "Objective trace CSV");
  cmd->add_option("--graph-dump", f.graph_dump, "Write the kNN graph as 'i j w' lines");
  cmd->add_option("--tau", f.tau, "Softmax temperature of the text prior")->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "Weight of the text KL term")->capture_default_str();
  cmd->add_option("--outer-iters", f.outer_iters, "Outer block iterations")->capture_default_str();
  cmd->add_option("--inner-iters", f.inner_iters, "z sweeps per outer iteration")->capture_default_str();
  cmd->add_option("--knn", f.knn, "Neighbors kept per node in the affinity graph")->capture_default_str();
  cmd->add_option("--top-m", f.top_m, "Confident samples per class for zero-shot mean init")->capture_default_str();
  cmd->add_flag("--symmetrize-graph", f.symmetrize, "Use (W + W^T)/2 instead of the directed kNN graph");
  cmd->add_option("--threads", f.threads, "Worker threads (0: TRANSDUCT_THREADS or OpenMP default)")
      ->capture_default_str();
}

// Expands `--config FILE` into --key=value tokens placed right after the
// subcommand. Keys already present on the command line are skipped. CLI11
// only reads config files for the top-level app, hence the manual pass.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (file.empty()) return args;
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + file);

  auto given = [&](const std::string& key) {
    for (const std::string& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r\"");
    const auto e = v.find_last_not_of(" \t\r\"");
    return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
  };
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    if (!given(key)) injected.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(2, args.size())), injected.begin(), injected.end());
  return args;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("TRANSDUCT_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
}

TaskSpec load_task(const SolveFlags& f) {
  TaskSpec spec;
  spec.query = read_embeddings(f.query);
  spec.text = read_embeddings(f.text);
  spec.tau = f.tau;
  spec.hyper.lambda = f.lambda;
  spec.hyper.outer_iters = f.outer_iters;
  spec.hyper.inner_z_iters = f.inner_iters;
  spec.hyper.k_nn = f.knn;
  spec.hyper.top_m_init = f.top_m;
  spec.hyper.symmetrize_graph = f.symmetrize;
  return spec;
}

double accuracy(const std::vector<std::size_t>& pred, const Labels& truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (static_cast<std::int64_t>(pred[i]) == truth[i]) ++correct;
  }
  return pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
}

void report(const SolveFlags& f, const RunResult& r) {
  write_predictions(r.query_z, f.out);
  if (!f.trace.empty()) write_trace_csv(r.state.trace, f.trace);
  if (!f.graph_dump.empty()) {
    std::ofstream out(f.graph_dump, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + f.graph_dump);
    write_graph(r.state.graph, out);
  }
  if (!f.truth.empty()) {
    const Labels truth = read_labels(f.truth);
    if (truth.size() != r.predictions.size()) {
      throw Error(ErrorCode::DimensionMismatch, "truth has " + std::to_string(truth.size()) + " labels for " +
                                                    std::to_string(r.predictions.size()) + " queries");
    }
    std::printf("zero-shot accuracy: %.4f\n", accuracy(r.zero_shot_predictions, truth));
    std::printf("transductive accuracy: %.4f\n", accuracy(r.predictions, truth));
  }
}

int cmd_run_zs(const SolveFlags& f) {
  apply_threads(f.threads);
  RunOptions opts;
  opts.record_trace = !f.trace.empty();
  const RunResult r = run(load_task(f), opts);
  report(f, r);
  return 0;
}

int cmd_run_fs(const SolveFlags& f, const FewShotFlags& fs) {
  apply_threads(f.threads);
  TaskSpec spec = load_task(f);
  spec.support = LabeledSet{read_embeddings(fs.support), read_labels(fs.support_labels)};

  FewShotOptions opts;
  opts.lambda = f.lambda;
  opts.grid = fs.grid;
  opts.fixed_gamma = fs.gamma;
  opts.seed = fs.seed;
  if (!fs.validation.empty()) {
    if (fs.validation_labels.empty()) throw Error(ErrorCode::InvalidArgument, "--validation needs --validation-labels");
    opts.validation_pool = LabeledSet{read_embeddings(fs.validation), read_labels(fs.validation_labels)};
    if (opts.validation_pool->labels.size() != opts.validation_pool->embeddings.n_rows()) {
      throw Error(ErrorCode::DimensionMismatch, "validation labels and embeddings differ in length");
    }
  }
  RunOptions run_opts;
  run_opts.record_trace = !f.trace.empty();
  const FewShotResult r = run_fewshot(spec, opts, run_opts);

  if (!r.scores.empty()) {
    std::printf("gamma,validation_accuracy\n");
    for (const GammaScore& s : r.scores) std::printf("%.9g,%.4f\n", s.gamma, s.validation_accuracy);
    if (!fs.scores.empty()) write_scores_csv(r.scores, fs.scores);
  }
  std::printf("chosen gamma: %.9g\n", r.gamma);
  report(f, r.run);
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
  const auto pred = read_prediction_classes(pred_path);
  const Labels truth = read_labels(truth_path);
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(pred.size()) + " predictions vs " +
                                                  std::to_string(truth.size()) + " truth labels");
  }
  std::printf("top-1 accuracy: %.4f\n", accuracy(pred, truth));
  std::int64_t n_classes = 0;
  for (std::int64_t t : truth) n_classes = std::max(n_classes, t + 1);
  std::vector<std::size_t> hit(static_cast<std::size_t>(n_classes), 0), total(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto k = static_cast<std::size_t>(truth[i]);
    ++total[k];
    if (pred[i] == k) ++hit[k];
  }
  for (std::size_t k = 0; k < total.size(); ++k) {
    if (total[k] == 0) continue;
    std::printf("class %zu: %.4f (%zu/%zu)\n", k, static_cast<double>(hit[k]) / static_cast<double>(total[k]), hit[k],
                total[k]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transductive classification of embedding batches with a text-regularized GMM"};
  app.require_subcommand(1);

  SolveFlags zs;
  auto* run_zs = app.add_subcommand("run-zs", "Zero-shot transduction");
  add_solve_flags(run_zs, zs);

  SolveFlags fsf;
  fsf.lambda = kFewShotLambda;
  FewShotFlags fs;
  auto* run_fs = app.add_subcommand("run-fs", "Few-shot transduction with gamma validation");
  add_solve_flags(run_fs, fsf);
  run_fs->add_option("--support", fs.support, "Support (labeled shot) embeddings")->required();
  run_fs->add_option("--support-labels", fs.support_labels, "Support class indices")->required();
  auto* gamma_opt = run_fs->add_option("--gamma", fs.gamma, "Fixed support weight; skips the search");
  run_fs->add_option("--gamma-grid", fs.grid, "Gamma values to search")
      ->delimiter(',')
      ->capture_default_str()
      ->excludes(gamma_opt);
  run_fs->add_option("--validation", fs.validation, "Validation pool embeddings (else carved from the support)");
  run_fs->add_option("--validation-labels", fs.validation_labels, "Validation pool labels");
  run_fs->add_option("--scores", fs.scores, "Gamma score table CSV");
  run_fs->add_option("--seed", fs.seed, "Seed for the validation split")->capture_default_str();

  SynthConfig sc;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic task directory");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();
  synth->add_option("--classes", sc.n_classes, "Number of classes")->capture_default_str();
  synth->add_option("--dim", sc.dim, "Embedding dimension")->capture_default_str();
  synth->add_option("--query-per-class", sc.query_per_class, "Query samples per class")->capture_default_str();
  synth->add_option("--shots", sc.shots_per_class, "Support shots per class")->capture_default_str();
  synth->add_option("--validation-per-class", sc.validation_per_class, "Validation samples per class")
      ->capture_default_str();
  synth->add_option("--sep", sc.class_sep, "Class separation")->capture_default_str();
  synth->add_option("--noise", sc.prototype_noise, "Text prototype noise")->capture_default_str();
  synth->add_option("--tau", sc.tau, "Temperature recorded in task.cfg")->capture_default_str();
  synth->add_option("--seed", sc.seed, "Generator seed")->capture_default_str();

  std::string pred_path, truth_path;
  auto* eval = app.add_subcommand("eval", "Top-1 and per-class accuracy of a predictions CSV");
  eval->add_option("--pred", pred_path, "Predictions CSV")->required();
  eval->add_option("--truth", truth_path, "Ground-truth labels")->required();

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
    std::reverse(args.begin(), args.end());
    args.pop_back();  // program name
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run_zs->parsed()) return cmd_run_zs(zs);
    if (run_fs->parsed()) return cmd_run_fs(fsf, fs);
    if (synth->parsed()) {
      write_task_dir(generate_task(sc), sc, out_dir);
      return 0;
    }
    if (eval->parsed()) return cmd_eval(pred_path, truth_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
