// Command-line front end: synthesize clique networks, fit the blockmodel,
// score and evaluate held-out links, and cross-validate the kernel
// bandwidth. All outputs are deterministic given identical inputs and
// seeds; the per-iteration timing column in diagnostics.csv is the one
// intentional exception.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smgb/smgb.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  // Input / output paths.
  std::string adjacency;
  std::string edge_list;
  std::string features;
  std::string config;
  std::string out = ".";
  std::string scores;
  std::string labels;
  std::string truth;
  std::string memberships;
  std::string m_mean;
  std::string beta;
  std::string pairs;

  // Network shape.
  int n = 0;
  bool undirected = false;

  // Synthesis.
  int num_cliques = 3;
  int clique_size = 10;
  double flip = 0.05;

  // Fit hyperparameters (mirrors FitConfig).
  smgb::FitConfig fit;
  std::string init = "gaussian";
  double train_fraction = 0.8;

  // Evaluation.
  int multi_seed = 0;
  bool emit_plot_data = false;
};

smgb::InitMode parse_init(const std::string& name) {
  if (name == "gaussian") return smgb::InitMode::gaussian;
  if (name == "spectral") return smgb::InitMode::spectral;
  throw smgb::InputError("init must be 'gaussian' or 'spectral', got '" +
                         name + "'");
}

// Structured key-value run configuration. Every FitConfig field has a
// key; unknown keys are rejected by name. Explicit command-line flags
// win over the file.
void apply_config_file(const std::string& path, Options& opt) {
  std::ifstream in(path);
  if (!in) throw smgb::InputError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw smgb::InputError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw smgb::InputError("config " + path + ": top level must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "d") {
        opt.fit.d = value.get<int>();
      } else if (key == "gamma") {
        opt.fit.gamma = value.get<double>();
      } else if (key == "gamma_grid") {
        opt.fit.gamma_grid = value.get<std::vector<double>>();
      } else if (key == "lambda") {
        opt.fit.lambda = value.get<double>();
      } else if (key == "sigma_beta_sq") {
        opt.fit.sigma_beta_sq = value.get<double>();
      } else if (key == "jitter") {
        opt.fit.jitter = value.get<double>();
      } else if (key == "rank") {
        opt.fit.rank_m = value.get<int>();
      } else if (key == "tol_e") {
        opt.fit.tol_e = value.get<double>();
      } else if (key == "tol_outer") {
        opt.fit.tol_outer = value.get<double>();
      } else if (key == "max_e") {
        opt.fit.max_e = value.get<int>();
      } else if (key == "max_outer") {
        opt.fit.max_outer = value.get<int>();
      } else if (key == "max_mstep") {
        opt.fit.max_mstep = value.get<int>();
      } else if (key == "seed") {
        opt.fit.seed = value.get<std::uint64_t>();
      } else if (key == "nonnegative") {
        opt.fit.nonnegative = value.get<bool>();
      } else if (key == "include_diagonal") {
        opt.fit.include_diagonal = value.get<bool>();
      } else if (key == "init") {
        opt.init = value.get<std::string>();
        parse_init(opt.init);
      } else if (key == "train_fraction") {
        opt.train_fraction = value.get<double>();
      } else if (key == "adjacency") {
        opt.adjacency = value.get<std::string>();
      } else if (key == "edge_list") {
        opt.edge_list = value.get<std::string>();
      } else if (key == "n") {
        opt.n = value.get<int>();
      } else if (key == "undirected") {
        opt.undirected = value.get<bool>();
      } else if (key == "features") {
        opt.features = value.get<std::string>();
      } else if (key == "out") {
        opt.out = value.get<std::string>();
      } else {
        throw smgb::InputError("config " + path + ": unknown key '" + key +
                               "'");
      }
    } catch (const json::exception& e) {
      throw smgb::InputError("config " + path + ": key '" + key +
                             "': " + e.what());
    }
  }
}

fs::path ensure_out_dir(const Options& opt) {
  fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw smgb::InputError("cannot create output directory: " + opt.out);
  }
  return dir;
}

smgb::ObservedNetwork load_network(const Options& opt) {
  const bool directed = !opt.undirected;
  if (!opt.adjacency.empty()) {
    return smgb::read_adjacency_csv(opt.adjacency, directed,
                                    opt.fit.include_diagonal);
  }
  if (!opt.edge_list.empty()) {
    if (opt.n <= 0) {
      throw smgb::InputError("--edge-list needs --n to size the network");
    }
    auto in = smgb::open_input(opt.edge_list);
    auto net = smgb::parse_edge_list(in, opt.n, directed);
    net.include_diagonal = opt.fit.include_diagonal;
    return net;
  }
  throw smgb::InputError("no network input: pass --adjacency or --edge-list");
}

smgb::SideInfo load_side_info(const Options& opt, int n) {
  if (opt.features.empty()) return smgb::SideInfo::none(n);
  return smgb::read_side_info_csv(opt.features, n);
}

void write_diagnostics(const fs::path& path, const smgb::FittedModel& model) {
  auto out = smgb::open_output(path);
  out << "iteration,f,elbo,sweeps,seconds\n";
  for (const auto& rec : model.diagnostics) {
    out << rec.iteration << ',' << smgb::format_full(rec.penalized_objective)
        << ',' << smgb::format_full(rec.elbo) << ',' << rec.estep_sweeps << ','
        << smgb::format_full(rec.seconds) << '\n';
  }
}

void write_roc(const fs::path& path, const std::vector<double>& scores,
               const std::vector<int>& labels) {
  const auto points = smgb::roc_points(scores, labels);
  auto out = smgb::open_output(path);
  out << "threshold,fpr,tpr\n";
  for (const auto& pt : points) {
    out << smgb::format_full(pt.threshold) << ','
        << smgb::format_full(pt.fpr) << ',' << smgb::format_full(pt.tpr)
        << '\n';
  }
}

struct ScoredHoldout {
  std::vector<double> scores;
  std::vector<double> probabilities;
  std::vector<int> labels;
};

ScoredHoldout score_holdout(const smgb::FittedModel& model,
                            const smgb::SideInfo& side,
                            const smgb::ObservedNetwork& net,
                            const smgb::ObservationMask& test) {
  ScoredHoldout out;
  const auto scored = smgb::score_pairs(model, side, test.pairs);
  out.scores.reserve(scored.size());
  out.probabilities.reserve(scored.size());
  out.labels.reserve(scored.size());
  for (std::size_t k = 0; k < scored.size(); ++k) {
    out.scores.push_back(scored[k].score);
    out.probabilities.push_back(scored[k].probability);
    const auto& [i, j] = test.pairs[k];
    out.labels.push_back(net.adjacency(i, j) == 1.0 ? 1 : 0);
  }
  return out;
}

void write_fit_outputs(const fs::path& dir, const smgb::FittedModel& model,
                       const smgb::SideInfo& side,
                       const smgb::ObservedNetwork& net,
                       const smgb::ObservationMask& test) {
  smgb::write_membership_csv(dir / "memberships.csv", model.U);
  smgb::write_matrix_csv(dir / "m_mean.csv", model.M_mean);
  smgb::write_vector_csv(dir / "beta.csv", model.beta_mean);
  write_diagnostics(dir / "diagnostics.csv", model);
  if (!test.pairs.empty()) {
    const auto held = score_holdout(model, side, net, test);
    smgb::write_scores_csv(dir / "test_scores.csv", test.pairs, held.scores,
                           held.probabilities, held.labels);
  }
}

int cmd_synth(const Options& opt) {
  const auto dir = ensure_out_dir(opt);
  auto [net, truth] = smgb::synth_cliques(opt.num_cliques, opt.clique_size,
                                          opt.flip, opt.fit.seed);
  smgb::write_adjacency_csv(dir / "adjacency.csv", net);
  smgb::write_membership_csv(dir / "truth.csv",
                             smgb::MembershipMatrix(truth.one_hot));
  std::cout << "wrote " << (dir / "adjacency.csv").string() << " ("
            << net.n << "x" << net.n << ") and "
            << (dir / "truth.csv").string() << "\n";
  return 0;
}

int cmd_fit(const Options& opt) {
  const auto dir = ensure_out_dir(opt);
  smgb::FitConfig config = opt.fit;
  config.init = parse_init(opt.init);
  const auto net = load_network(opt);
  const auto side = load_side_info(opt, net.n);
  auto [train, test] = smgb::holdout_split(net, opt.train_fraction,
                                           config.seed);
  const auto model = smgb::fit(net, train, side, config);
  write_fit_outputs(dir, model, side, net, test);
  std::cout << "fit: " << model.diagnostics.size() << " outer iterations, "
            << "final objective "
            << smgb::format_metric(
                   model.diagnostics.back().penalized_objective)
            << "\n";
  return 0;
}

int cmd_cv(const Options& opt) {
  const auto dir = ensure_out_dir(opt);
  smgb::FitConfig config = opt.fit;
  config.init = parse_init(opt.init);
  const auto net = load_network(opt);
  const auto side = load_side_info(opt, net.n);
  auto [train, test] = smgb::holdout_split(net, opt.train_fraction,
                                           config.seed);
  const auto cv = smgb::cross_validate_gamma(net, train, side, config);
  {
    auto out = smgb::open_output(dir / "cv_table.csv");
    out << "gamma,val_auc,ok,error\n";
    for (const auto& row : cv.table) {
      out << smgb::format_full(row.gamma) << ','
          << (row.ok ? smgb::format_full(row.val_auc) : std::string()) << ','
          << (row.ok ? 1 : 0) << ',' << row.error << '\n';
    }
  }
  write_fit_outputs(dir, cv.model, side, net, test);
  std::cout << "best_gamma = " << smgb::format_metric(cv.best_gamma) << "\n";
  for (const auto& row : cv.table) {
    std::cout << "gamma " << smgb::format_metric(row.gamma) << ": "
              << (row.ok ? "val_auc = " + smgb::format_metric(row.val_auc)
                         : "failed: " + row.error)
              << "\n";
  }
  return 0;
}

std::vector<double> read_score_column(const std::string& path) {
  const Eigen::VectorXd v = smgb::read_vector_csv(path);
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<int> read_label_column(const std::string& path) {
  const Eigen::VectorXd v = smgb::read_vector_csv(path);
  std::vector<int> labels(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != 0.0 && v(k) != 1.0) {
      throw smgb::InputError(path + ": labels must be 0 or 1");
    }
    labels[k] = v(k) == 1.0 ? 1 : 0;
  }
  return labels;
}

int cmd_eval(const Options& opt) {
  const auto dir = ensure_out_dir(opt);
  smgb::MetricReport report;

  if (opt.multi_seed > 0) {
    // Full protocol: one fit per seed on its own split.
    smgb::FitConfig config = opt.fit;
    config.init = parse_init(opt.init);
    const auto net = load_network(opt);
    const auto side = load_side_info(opt, net.n);
    std::optional<smgb::GroundTruthMembership> truth;
    if (!opt.truth.empty()) truth = smgb::read_truth_csv(opt.truth);
    for (int k = 0; k < opt.multi_seed; ++k) {
      smgb::FitConfig run_cfg = config;
      run_cfg.seed = config.seed + static_cast<std::uint64_t>(k);
      auto [train, test] =
          smgb::holdout_split(net, opt.train_fraction, run_cfg.seed);
      const auto model = smgb::fit(net, train, side, run_cfg);
      const auto held = score_holdout(model, side, net, test);
      report.auc_per_seed.push_back(smgb::auc(held.scores, held.labels));
      if (truth) {
        report.dist_aligned_per_seed.push_back(
            smgb::membership_error(model.U, *truth));
        report.dist_unaligned_per_seed.push_back(
            smgb::membership_error_unaligned(model.U, *truth));
      }
      if (opt.emit_plot_data) {
        write_roc(dir / ("roc_seed" + std::to_string(k) + ".csv"),
                  held.scores, held.labels);
      }
    }
    {
      auto out = smgb::open_output(dir / "metrics_per_seed.csv");
      out << report.per_seed_csv();
    }
  } else if (!opt.scores.empty() || !opt.labels.empty()) {
    if (opt.scores.empty() || opt.labels.empty()) {
      throw smgb::InputError("eval needs both --scores and --labels");
    }
    const auto scores = read_score_column(opt.scores);
    const auto labels = read_label_column(opt.labels);
    report.auc_per_seed.push_back(smgb::auc(scores, labels));
    if (!opt.truth.empty() && !opt.memberships.empty()) {
      const auto truth = smgb::read_truth_csv(opt.truth);
      const auto U = smgb::read_membership_csv(opt.memberships);
      report.dist_aligned_per_seed.push_back(smgb::membership_error(U, truth));
      report.dist_unaligned_per_seed.push_back(
          smgb::membership_error_unaligned(U, truth));
    }
    if (opt.emit_plot_data) write_roc(dir / "roc.csv", scores, labels);
  } else if (!opt.m_mean.empty()) {
    // Rebuild the split from (adjacency, fraction, seed) and score it.
    const auto net = load_network(opt);
    const auto side = load_side_info(opt, net.n);
    smgb::FittedModel model;
    model.M_mean = smgb::read_matrix_csv(opt.m_mean);
    if (model.M_mean.rows() != net.n || model.M_mean.cols() != net.n) {
      throw smgb::InputError("--m-mean dimensions do not match the network");
    }
    if (!opt.beta.empty()) model.beta_mean = smgb::read_vector_csv(opt.beta);
    auto [train, test] =
        smgb::holdout_split(net, opt.train_fraction, opt.fit.seed);
    if (test.pairs.empty()) {
      throw smgb::InputError("eval: the split has no held-out pairs");
    }
    const auto held = score_holdout(model, side, net, test);
    report.auc_per_seed.push_back(smgb::auc(held.scores, held.labels));
    if (!opt.truth.empty() && !opt.memberships.empty()) {
      const auto truth = smgb::read_truth_csv(opt.truth);
      const auto U = smgb::read_membership_csv(opt.memberships);
      report.dist_aligned_per_seed.push_back(smgb::membership_error(U, truth));
      report.dist_unaligned_per_seed.push_back(
          smgb::membership_error_unaligned(U, truth));
    }
    if (opt.emit_plot_data) write_roc(dir / "roc.csv", held.scores, held.labels);
  } else if (!opt.truth.empty() && !opt.memberships.empty()) {
    // Membership recovery only.
    const auto truth = smgb::read_truth_csv(opt.truth);
    const auto U = smgb::read_membership_csv(opt.memberships);
    report.dist_aligned_per_seed.push_back(smgb::membership_error(U, truth));
    report.dist_unaligned_per_seed.push_back(
        smgb::membership_error_unaligned(U, truth));
  } else {
    throw smgb::InputError(
        "eval needs --scores/--labels, --m-mean with a network, --multi-seed, "
        "or --truth with --memberships");
  }

  const std::string text = report.to_key_value();
  std::cout << text;
  auto out = smgb::open_output(dir / "metrics.txt");
  out << text;
  return 0;
}

int cmd_predict(const Options& opt) {
  const auto dir = ensure_out_dir(opt);
  if (opt.m_mean.empty() || opt.pairs.empty()) {
    throw smgb::InputError("predict needs --m-mean and --pairs");
  }
  smgb::FittedModel model;
  model.M_mean = smgb::read_matrix_csv(opt.m_mean);
  const int n = static_cast<int>(model.M_mean.rows());
  if (!opt.beta.empty()) model.beta_mean = smgb::read_vector_csv(opt.beta);
  const auto side = load_side_info(opt, n);

  std::vector<smgb::IndexPair> pairs;
  {
    auto in = smgb::open_input(opt.pairs);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      for (char& c : line) {
        if (c == ',') c = ' ';
      }
      std::istringstream fields(line);
      int i = 0, j = 0;
      if (!(fields >> i)) continue;
      if (!(fields >> j)) {
        throw smgb::InputError(opt.pairs + ": line " +
                               std::to_string(line_no) + ": expected i j");
      }
      pairs.emplace_back(i, j);
    }
  }
  const auto scored = smgb::score_pairs(model, side, pairs);
  auto out = smgb::open_output(dir / "predictions.csv");
  out << "i,j,score,probability\n";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out << pairs[k].first << ',' << pairs[k].second << ','
        << smgb::format_full(scored[k].score) << ','
        << smgb::format_full(scored[k].probability) << '\n';
  }
  std::cout << "wrote " << (dir / "predictions.csv").string() << " ("
            << pairs.size() << " pairs)\n";
  return 0;
}

void add_network_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--adjacency", opt.adjacency, "dense 0/1 adjacency CSV");
  cmd->add_option("--edge-list", opt.edge_list, "whitespace edge list file");
  cmd->add_option("--n", opt.n, "node count (required with --edge-list)");
  cmd->add_flag("--undirected", opt.undirected,
                "treat the network as undirected");
  cmd->add_option("--features", opt.features,
                  "side-information CSV rows i,j,r_1..r_p");
}

void add_fit_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--d", opt.fit.d, "latent dimension");
  cmd->add_option("--gamma", opt.fit.gamma, "RBF bandwidth");
  cmd->add_option("--lambda", opt.fit.lambda, "L1 strength");
  cmd->add_option("--sigma-beta-sq", opt.fit.sigma_beta_sq,
                  "prior variance of beta");
  cmd->add_option("--jitter", opt.fit.jitter, "diagonal jitter");
  cmd->add_option("--rank", opt.fit.rank_m,
                  "eigendecomposition truncation rank (0 = full)");
  cmd->add_option("--tol-e", opt.fit.tol_e, "E-step tolerance");
  cmd->add_option("--tol-outer", opt.fit.tol_outer, "outer-loop tolerance");
  cmd->add_option("--max-e", opt.fit.max_e, "E-step sweep cap");
  cmd->add_option("--max-outer", opt.fit.max_outer, "outer iteration cap");
  cmd->add_option("--max-mstep", opt.fit.max_mstep, "M-step iteration cap");
  cmd->add_flag("--nonnegative", opt.fit.nonnegative,
                "constrain memberships to be nonnegative");
  cmd->add_flag("--include-diagonal", opt.fit.include_diagonal,
                "model self-pairs (i,i)");
  cmd->add_option("--init", opt.init, "initialization: gaussian | spectral");
  cmd->add_option("--train-fraction", opt.train_fraction,
                  "fraction of modeled pairs used for training");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sparse matrix-variate Gaussian-process blockmodel toolkit: fits "
      "binary networks by variational EM, predicts held-out links, and "
      "recovers sparse latent group memberships."};
  app.require_subcommand(1);
  Options opt;

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON run configuration (flags override it)")
      ->expected(1);

  auto* synth = app.add_subcommand("synth", "generate a noisy clique network");
  synth->add_option("--num-cliques", opt.num_cliques, "number of cliques");
  synth->add_option("--clique-size", opt.clique_size, "nodes per clique");
  synth->add_option("--flip", opt.flip, "fraction of entries to toggle");
  synth->add_option("--seed", opt.fit.seed, "random seed");
  synth->add_option("--out", opt.out, "output directory");

  auto* fit_cmd = app.add_subcommand("fit", "fit the blockmodel");
  add_network_flags(fit_cmd, opt);
  add_fit_flags(fit_cmd, opt);
  fit_cmd->add_option("--seed", opt.fit.seed, "random seed");
  fit_cmd->add_option("--out", opt.out, "output directory");

  auto* cv_cmd =
      app.add_subcommand("cv", "cross-validate the RBF bandwidth gamma");
  add_network_flags(cv_cmd, opt);
  add_fit_flags(cv_cmd, opt);
  cv_cmd->add_option("--gamma-grid", opt.fit.gamma_grid, "candidate gammas")
      ->delimiter(',');
  cv_cmd->add_option("--seed", opt.fit.seed, "random seed");
  cv_cmd->add_option("--out", opt.out, "output directory");

  auto* eval_cmd =
      app.add_subcommand("eval", "compute AUC and membership distance");
  add_network_flags(eval_cmd, opt);
  add_fit_flags(eval_cmd, opt);
  eval_cmd->add_option("--scores", opt.scores, "score file, one value per line");
  eval_cmd->add_option("--labels", opt.labels, "label file, one 0/1 per line");
  eval_cmd->add_option("--m-mean", opt.m_mean, "fitted M matrix CSV");
  eval_cmd->add_option("--beta", opt.beta, "fitted beta vector file");
  eval_cmd->add_option("--truth", opt.truth, "ground-truth membership CSV");
  eval_cmd->add_option("--memberships", opt.memberships,
                       "estimated membership CSV");
  eval_cmd->add_option("--multi-seed", opt.multi_seed,
                       "run the full fit/eval protocol over this many seeds");
  eval_cmd->add_flag("--emit-plot-data", opt.emit_plot_data,
                     "write ROC points as CSV");
  eval_cmd->add_option("--seed", opt.fit.seed, "random seed");
  eval_cmd->add_option("--out", opt.out, "output directory");

  auto* predict_cmd =
      app.add_subcommand("predict", "score explicit node pairs");
  predict_cmd->add_option("--m-mean", opt.m_mean, "fitted M matrix CSV");
  predict_cmd->add_option("--beta", opt.beta, "fitted beta vector file");
  predict_cmd->add_option("--features", opt.features, "side-information CSV");
  predict_cmd->add_option("--pairs", opt.pairs, "pairs file, lines 'i j'");
  predict_cmd->add_option("--out", opt.out, "output directory");

  try {
    // Two-phase parse: the config file fills defaults, explicit flags win.
    app.parse(argc, argv);
    if (!config_path.empty()) {
      apply_config_file(config_path, opt);
      app.clear();
      app.parse(argc, argv);  // explicit flags overwrite file values
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const smgb::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(opt);
    if (fit_cmd->parsed()) return cmd_fit(opt);
    if (cv_cmd->parsed()) return cmd_cv(opt);
    if (eval_cmd->parsed()) return cmd_eval(opt);
    if (predict_cmd->parsed()) return cmd_predict(opt);
  } catch (const smgb::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const smgb::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
