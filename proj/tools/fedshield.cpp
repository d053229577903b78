// fedshield: command-line driver for the federated prompt-injection
// detection workflow.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedshield/fedshield.hpp"

namespace fs = std::filesystem;
using namespace fedshield;

namespace {

void add_train_flags(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--lr", cfg.learning_rate, "Gradient-descent step size")
      ->envname("FEDSHIELD_LR")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iters, "Gradient steps per training call")
      ->envname("FEDSHIELD_MAX_ITERS")
      ->capture_default_str();
  cmd->add_option("--grad-tol", cfg.grad_tol, "Stop when the gradient norm drops below this")
      ->envname("FEDSHIELD_GRAD_TOL")
      ->capture_default_str();
  cmd->add_option("--l2", cfg.l2_lambda, "L2 penalty on the weights")->envname("FEDSHIELD_L2")->capture_default_str();
}

void add_embedder_flags(CLI::App* cmd, EmbedderConfig& cfg) {
  cmd->add_option("--dim", cfg.dim, "Embedding width")->envname("FEDSHIELD_DIM")->capture_default_str();
  cmd->add_option("--ngram-min", cfg.ngram_min, "Shortest character n-gram")->capture_default_str();
  cmd->add_option("--ngram-max", cfg.ngram_max, "Longest character n-gram")->capture_default_str();
  cmd->add_flag("!--no-lowercase", cfg.lowercase, "Keep ASCII case when hashing n-grams");
}

std::string pct(double v) { return text::format_double(v); }

void print_report(const std::string& name, const EvaluationReport& r) {
  std::cout << name << ": accuracy " << pct(r.accuracy) << ", AUC " << pct(r.auc) << ", confusion [[" << r.confusion.tn()
            << "," << r.confusion.fp() << "],[" << r.confusion.fn() << "," << r.confusion.tp() << "]]\n";
  for (Label label : kLabels) {
    const auto& m = r.metrics(label);
    std::cout << "  " << to_string(label) << ": precision " << pct(m.precision) << " recall " << pct(m.recall) << " f1 "
              << pct(m.f1) << " support " << m.support << "\n";
  }
}

fed::Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return fed::Aggregation::UnweightedMean;
  if (s == "weighted") return fed::Aggregation::SampleWeightedMean;
  throw Error(ErrorKind::InvalidArgument, "aggregation must be 'mean' or 'weighted'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated prompt-injection detection toolkit"};
  app.require_subcommand(1);

  // synth
  std::size_t n_benign = 254, n_malicious = 255;
  std::uint64_t seed = 0;
  std::string out_path;
  bool synth_embeddings_mode = false;
  std::size_t synth_dim = 384;
  double margin = 5.0, noise = 0.1;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic corpus");
  synth->add_option("--benign", n_benign, "Number of benign prompts")->capture_default_str();
  synth->add_option("--malicious", n_malicious, "Number of malicious prompts")->capture_default_str();
  synth->add_option("--seed", seed, "Generator seed")->envname("FEDSHIELD_SEED")->capture_default_str();
  synth->add_option("--out", out_path, "Output path")->required();
  synth->add_flag("--embeddings", synth_embeddings_mode, "Emit Gaussian-cluster embeddings instead of prompt text");
  synth->add_option("--dim", synth_dim, "Embedding width (--embeddings)")->capture_default_str();
  synth->add_option("--margin", margin, "Cluster offset along the class direction (--embeddings)")->capture_default_str();
  synth->add_option("--noise", noise, "Per-coordinate noise deviation (--embeddings)")->capture_default_str();

  // embed
  EmbedderConfig emb_cfg;
  std::string in_path;
  auto* embed = app.add_subcommand("embed", "Embed a JSONL prompt file with the hashed n-gram embedder");
  embed->add_option("--in", in_path, "JSONL dataset")->required();
  embed->add_option("--out", out_path, "Embedding file to write")->required();
  add_embedder_flags(embed, emb_cfg);

  // split
  double test_fraction = 0.2;
  std::string clients_spec;
  std::string out_dir;
  auto* split = app.add_subcommand("split", "Stratified train/test split plus non-IID client shards");
  split->add_option("--in", in_path, "JSONL dataset or embedding file")->required();
  split->add_option("--seed", seed, "Seed for every stochastic step")->envname("FEDSHIELD_SEED")->capture_default_str();
  split->add_option("--test-fraction", test_fraction, "Held-out fraction")->capture_default_str();
  split->add_option("--clients-spec", clients_spec, "Client mix as frac:count,... (default 0.9:203,0.1:101,0.1:103)");
  split->add_option("--out-dir", out_dir, "Directory for train/test/shard files and manifest.json")->required();
  add_embedder_flags(split, emb_cfg);

  // train-central
  TrainConfig train_cfg;
  std::string train_path, test_path;
  auto* train_central = app.add_subcommand("train-central", "Train a logistic-regression model on one file");
  train_central->add_option("--train", train_path, "Embedding file")->required();
  train_central->add_option("--out", out_path, "Model checkpoint to write")->required();
  add_train_flags(train_central, train_cfg);

  // run-fed
  std::vector<std::string> shard_paths;
  std::size_t rounds = 10;
  std::string aggregation = "mean";
  std::string logs_path;
  bool concurrent = false;
  auto* run_fed = app.add_subcommand("run-fed", "In-process federated averaging over shard files");
  run_fed->add_option("--shard", shard_paths, "Shard embedding file; client ids follow argument order")->required();
  run_fed->add_option("--test", test_path, "Held-out embedding file for per-round accuracy");
  run_fed->add_option("--rounds", rounds, "Communication rounds")->envname("FEDSHIELD_ROUNDS")->capture_default_str();
  run_fed->add_option("--aggregation", aggregation, "mean | weighted")->capture_default_str();
  run_fed->add_option("--out", out_path, "Final model checkpoint")->required();
  run_fed->add_option("--logs", logs_path, "Round logs (JSON Lines)");
  run_fed->add_flag("--concurrent", concurrent, "Train clients of a round on separate threads");
  add_train_flags(run_fed, train_cfg);

  // serve
  std::string listen_addr, connect_addr, port_file;
  std::uint32_t n_clients = 0;
  double timeout_secs = 60.0;
  auto* serve = app.add_subcommand("serve", "Run the parameter server");
  serve->add_option("--listen", listen_addr, "host:port to listen on (port 0 picks one)")->required();
  serve->add_option("--clients", n_clients, "Number of clients to wait for")
      ->required()
      ->check(CLI::PositiveNumber);
  serve->add_option("--rounds", rounds, "Communication rounds")->envname("FEDSHIELD_ROUNDS")->capture_default_str();
  serve->add_option("--test", test_path, "Held-out embedding file (fixes the model dim)")->required();
  serve->add_option("--timeout", timeout_secs, "Seconds to wait per round")
      ->envname("FEDSHIELD_TIMEOUT")
      ->capture_default_str();
  serve->add_option("--out", out_path, "Final model checkpoint")->required();
  serve->add_option("--logs", logs_path, "Round logs (JSON Lines)");
  serve->add_option("--port-file", port_file, "Write the bound port here once listening");

  // join
  std::string shard_path;
  std::int64_t client_id = -1;
  auto* join = app.add_subcommand("join", "Join a parameter server as a training client");
  join->add_option("--connect", connect_addr, "Server host:port")->required();
  join->add_option("--shard", shard_path, "This client's embedding file")->required();
  join->add_option("--client-id", client_id, "Fixed client id (default: server assigns)");
  join->add_option("--timeout", timeout_secs, "Seconds to wait for any server message")
      ->envname("FEDSHIELD_TIMEOUT")
      ->capture_default_str();
  add_train_flags(join, train_cfg);

  // evaluate
  std::string model_path;
  auto* eval = app.add_subcommand("evaluate", "Score a model on a labelled embedding file");
  eval->add_option("--model", model_path, "Model checkpoint")->required();
  eval->add_option("--test", test_path, "Embedding file")->required();
  eval->add_option("--out", out_path, "Write the evaluation as JSON");

  // report
  std::string central_path, federated_path;
  auto* report = app.add_subcommand("report", "Compare a centralized and a federated model");
  report->add_option("--central", central_path, "Centralized model checkpoint")->required();
  report->add_option("--federated", federated_path, "Federated model checkpoint")->required();
  report->add_option("--test", test_path, "Embedding file")->required();
  report->add_option("--out-dir", out_dir, "Report directory")->required();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Full centralized-vs-federated reproduction run");
  experiment->add_option("--in", in_path, "JSONL dataset or embedding file")->required();
  experiment->add_option("--seed", seed, "Seed for every stochastic step")
      ->envname("FEDSHIELD_SEED")
      ->capture_default_str();
  experiment->add_option("--test-fraction", test_fraction, "Held-out fraction")->capture_default_str();
  experiment->add_option("--clients-spec", clients_spec, "Client mix as frac:count,...");
  experiment->add_option("--rounds", rounds, "Communication rounds")
      ->envname("FEDSHIELD_ROUNDS")
      ->capture_default_str();
  experiment->add_option("--aggregation", aggregation, "mean | weighted")->capture_default_str();
  experiment->add_option("--out-dir", out_dir, "Output directory")->required();
  experiment->add_flag("--concurrent", concurrent, "Train clients of a round on separate threads");
  add_train_flags(experiment, train_cfg);
  add_embedder_flags(experiment, emb_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) {
      if (synth_embeddings_mode) {
        const auto m = synth_embeddings(n_benign, n_malicious, synth_dim, margin, noise, seed);
        save_embeddings(out_path, m);
        std::cout << "wrote " << m.size() << " synthetic embeddings (dim " << m.dim() << ") to " << out_path << "\n";
      } else {
        const auto ds = synth_prompts(n_benign, n_malicious, seed);
        save_dataset(out_path, ds);
        std::cout << "wrote " << ds.size() << " prompts (" << n_benign << " benign, " << n_malicious
                  << " malicious) to " << out_path << "\n";
      }
    } else if (*embed) {
      const auto m = embed_dataset(emb_cfg, load_dataset(in_path));
      save_embeddings(out_path, m);
      std::cout << "embedded " << m.size() << " prompts into dim " << m.dim() << "\n";
    } else if (*split) {
      const auto data = load_matrix(in_path, emb_cfg);
      const auto prepared = prepare_federation(data, seed, test_fraction, clients_spec);
      const fs::path dir = out_dir;
      save_embeddings(dir / "train.emb", prepared.train);
      save_embeddings(dir / "test.emb", prepared.test);
      for (const auto& shard : prepared.partition.shards) {
        save_embeddings(dir / ("shard_" + std::to_string(shard.client_id) + ".emb"), shard.embeddings);
      }
      text::write_file(dir / "manifest.json", prepared.manifest().dump(2) + "\n");
      std::cout << "train " << prepared.train.size() << ", test " << prepared.test.size() << ", shards";
      for (const auto& shard : prepared.partition.shards) std::cout << " " << shard.embeddings.size();
      std::cout << ", unassigned " << prepared.partition.unassigned.size() << "\n";
    } else if (*train_central) {
      const auto X = load_embeddings(train_path);
      const auto res = fit(X, train_cfg, ModelParams::zeros(X.dim()));
      save_model(out_path, res.params);
      std::cout << "trained on " << X.size() << " rows: " << res.iterations << " steps, loss "
                << text::format_double(res.loss) << (res.converged ? " (converged)" : "") << "\n";
    } else if (*run_fed) {
      std::vector<ClientShard> shards;
      for (std::size_t i = 0; i < shard_paths.size(); ++i) {
        shards.push_back({static_cast<std::uint32_t>(i), load_embeddings(shard_paths[i]), {}});
      }
      const EmbeddingMatrix test = test_path.empty() ? EmbeddingMatrix(shards.front().embeddings.dim())
                                                     : load_embeddings(test_path);
      fed::FedConfig cfg(rounds, train_cfg, parse_aggregation(aggregation));
      cfg.set_concurrent_clients(concurrent);
      const auto res = fed::run_federated(std::move(shards), test, cfg);
      save_model(out_path, res.final_params);
      if (!logs_path.empty()) text::write_file(logs_path, fed::format_round_logs(res.logs));
      std::cout << "federated " << rounds << " round(s) over " << shard_paths.size() << " client(s)";
      if (res.logs.back().test_accuracy) std::cout << ", test accuracy " << pct(*res.logs.back().test_accuracy);
      std::cout << "\n";
    } else if (*serve) {
      const auto test = load_embeddings(test_path);
      net::ServerOptions opts;
      opts.round_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_secs * 1000));
      net::ParameterServer server(listen_addr, opts);
      std::cout << "listening on port " << server.port() << std::endl;
      if (!port_file.empty()) text::write_file(port_file, std::to_string(server.port()) + "\n");
      const auto res = server.run(n_clients, fed::FedConfig(rounds), test);
      save_model(out_path, res.final_params);
      if (!logs_path.empty()) text::write_file(logs_path, fed::format_round_logs(res.logs));
      std::cout << "federation finished after " << rounds << " round(s)";
      if (res.logs.back().test_accuracy) std::cout << ", test accuracy " << pct(*res.logs.back().test_accuracy);
      std::cout << "\n";
    } else if (*join) {
      net::ClientOptions opts;
      if (client_id >= 0) opts.client_id = static_cast<std::uint32_t>(client_id);
      opts.io_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_secs * 1000));
      ClientShard shard{opts.client_id, load_embeddings(shard_path), {}};
      const auto res = net::client_run(connect_addr, shard, train_cfg, opts);
      if (!res.ok()) {
        std::cerr << "error: " << res.message << "\n";
        return res.exit_code;
      }
      std::cout << "client " << res.client_id << ": " << res.message << "\n";
    } else if (*eval) {
      const auto rep = evaluate(load_model(model_path), load_embeddings(test_path));
      print_report("model", rep);
      if (!out_path.empty()) text::write_file(out_path, nlohmann::json(rep).dump(2) + "\n");
    } else if (*report) {
      const auto test = load_embeddings(test_path);
      const auto central = evaluate(load_model(central_path), test);
      const auto federated = evaluate(load_model(federated_path), test);
      write_report(out_dir, comparative_report(central, federated));
      print_report("centralized", central);
      print_report("federated", federated);
    } else if (*experiment) {
      ExperimentOptions opts;
      opts.seed = seed;
      opts.test_fraction = test_fraction;
      opts.clients_spec = clients_spec;
      opts.rounds = rounds;
      opts.train_cfg = train_cfg;
      opts.aggregation = parse_aggregation(aggregation);
      opts.concurrent_clients = concurrent;
      const auto res = run_experiment(load_matrix(in_path, emb_cfg), opts);
      write_experiment(out_dir, res);
      std::cout << "train " << res.data.train.size() << ", test " << res.data.test.size() << ", clients";
      for (const auto& shard : res.data.partition.shards) std::cout << " " << shard.embeddings.size();
      std::cout << ", rounds " << opts.rounds << "\n";
      print_report("centralized", res.central_report);
      print_report("federated", res.federated_report);
      std::cout << "outputs in " << out_dir << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
