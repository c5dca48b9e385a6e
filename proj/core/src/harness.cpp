// Copyright 2026 The gnnroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gnnroute/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gnnroute/checkpoint.hpp"
#include "gnnroute/csvio.hpp"
#include "gnnroute/parallel.hpp"
#include "gnnroute/version.hpp"

namespace gnnroute {

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t index) {
  return derive_seed(master_seed, "episode", index);
}

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void ensure_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::ofstream open_text(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

// Resolved config plus the tool version; no timestamps, so re-runs are
// byte-identical. Wall-clock metadata goes to run_meta.txt instead.
void write_resolved_config(const std::filesystem::path& dir, const std::string& command,
                           const KeyValues& kv) {
  auto out = open_text(dir / "config_resolved.txt");
  out << "tool " << kToolName << " " << kToolVersion << "\n";
  out << "command " << command << "\n";
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
}

void write_run_meta(const std::filesystem::path& dir) {
  auto out = open_text(dir / "run_meta.txt");
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  out << "started_at " << buf << "\n";
  out << "workers " << worker_count() << "\n";
}

std::ofstream open_csv(const std::filesystem::path& file, const std::string& schema) {
  auto out = open_text(file);
  out << "# schema: " << schema << "\n";
  return out;
}

std::string path_str(const std::filesystem::path& p) { return p.string(); }

// Type-7 (linear interpolation) quantile of an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (static_cast<double>(v.size()) - 1.0) /
                   static_cast<double>(v.size()));
}

int data_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitData;
}

std::sig_atomic_t volatile g_interrupt_flag = 0;

void handle_interrupt(int) { g_interrupt_flag = 1; }

KeyValues agent_config_kv(const AgentConfig& a) {
  return {
      {"gamma", format_double(a.gamma)},
      {"epsilon_start", format_double(a.epsilon_start)},
      {"epsilon_hold_episodes", std::to_string(a.epsilon_hold_episodes)},
      {"epsilon_decay_rate", format_double(a.epsilon_decay_rate)},
      {"epsilon_decay_period", std::to_string(a.epsilon_decay_period)},
      {"epsilon_min", format_double(a.epsilon_min)},
      {"replay_period", std::to_string(a.replay_period)},
      {"batches_per_replay", std::to_string(a.batches_per_replay)},
      {"batch_size", std::to_string(a.batch_size)},
      {"k", std::to_string(a.k)},
      {"training_episodes", std::to_string(a.training_episodes)},
      {"eval_period", std::to_string(a.eval_period)},
      {"eval_episodes", std::to_string(a.eval_episodes)},
      {"hidden_size", std::to_string(a.hidden_size)},
      {"msg_steps", std::to_string(a.msg_steps)},
      {"learning_rate", format_double(a.learning_rate)},
      {"momentum", format_double(a.momentum)},
      {"grad_clip_norm", format_double(a.grad_clip_norm)},
      {"max_link_capacity", format_double(a.max_link_capacity)},
      {"use_target_network", a.use_target_network ? "1" : "0"},
      {"target_update_episodes", std::to_string(a.target_update_episodes)},
  };
}

}  // namespace

EvalSummary evaluate_policies(const Topology& topo, const PathTable& table,
                              const std::vector<Policy>& policies, int episodes,
                              std::uint64_t master_seed, const QNetworkParams* params,
                              double max_capacity) {
  for (Policy p : policies)
    if (p == Policy::gnn && params == nullptr)
      throw std::invalid_argument("evaluate_policies: gnn policy requires a checkpoint");

  EvalSummary summary;
  summary.policies = policies;
  summary.scores.assign(policies.size(), std::vector<double>(episodes, 0.0));
  summary.seeds.resize(episodes);
  summary.fluid_scores.assign(episodes, 0.0);
  for (int i = 0; i < episodes; ++i) summary.seeds[i] = episode_seed(master_seed, i);

  parallel_for(static_cast<std::size_t>(episodes), [&](std::size_t i) {
    const std::uint64_t seed = summary.seeds[i];
    bool fluid_done = false;
    for (std::size_t p = 0; p < policies.size(); ++p) {
      const double score =
          run_policy_episode(policies[p], topo, table, seed, params, max_capacity).score;
      summary.scores[p][i] = score;
      if (policies[p] == Policy::fluid) {
        summary.fluid_scores[i] = score;
        fluid_done = true;
      }
    }
    if (!fluid_done)
      summary.fluid_scores[i] =
          run_policy_episode(Policy::fluid, topo, table, seed, nullptr, max_capacity).score;
  });
  return summary;
}

int cmd_train(const TrainCommand& cmd) {
  try {
    ensure_out_dir(cmd.out_dir);
    const Topology topo = load_topology(cmd.topology);
    if (!topo.connected())
      std::cerr << "warning: " << topo.name() << " is disconnected; some demands have no path\n";
    const PathTable table = build_path_table(topo, cmd.agent.k);

    QNetworkParams warm{};
    const QNetworkParams* warm_ptr = nullptr;
    if (cmd.init_checkpoint) {
      warm = load_qnetwork(*cmd.init_checkpoint).params;
      if (warm.hidden_size != cmd.agent.hidden_size || warm.msg_steps != cmd.agent.msg_steps)
        throw CheckpointError("init checkpoint dimensions do not match the requested network");
      warm_ptr = &warm;
    }

    KeyValues kv = agent_config_kv(cmd.agent);
    kv.insert(kv.begin(),
              {{"topology", path_str(cmd.topology)}, {"seed", std::to_string(cmd.seed)}});
    if (cmd.init_checkpoint) kv.emplace_back("init_checkpoint", path_str(*cmd.init_checkpoint));
    write_resolved_config(cmd.out_dir, "train", kv);
    write_run_meta(cmd.out_dir);

    auto log = open_csv(cmd.out_dir / "training_log.csv", "training_log v1");
    log << "episode,epsilon,episode_score,loss_mean,eval_mean\n";

    g_interrupt_flag = 0;
    auto previous_handler = std::signal(SIGINT, handle_interrupt);
    std::atomic<bool> stop{false};

    const auto on_episode = [&](const TrainLogRow& row) {
      if (g_interrupt_flag) stop.store(true);
      log << row.episode << ',' << format_double(row.epsilon) << ','
          << format_double(row.episode_score) << ','
          << (row.loss_mean ? format_double(*row.loss_mean) : std::string()) << ','
          << (row.eval_mean ? format_double(*row.eval_mean) : std::string()) << '\n';
      if (row.eval_mean) {
        log.flush();
        std::cerr << "episode " << row.episode << " eval_mean " << *row.eval_mean << " epsilon "
                  << row.epsilon << "\n";
      }
    };

    TrainResult result = train(topo, table, cmd.agent, cmd.seed, on_episode, &stop, warm_ptr);
    std::signal(SIGINT, previous_handler);

    const std::map<std::string, std::string> extra{
        {"trained_on", topo.name()},
        {"seed", std::to_string(cmd.seed)},
        {"episodes", std::to_string(result.log.size())},
        {"best_eval_mean", format_double(result.best_eval_mean)},
        {"best_eval_episode", std::to_string(result.best_eval_episode)},
    };
    save_qnetwork(cmd.out_dir / "checkpoint_best.ckpt", result.best_params, extra);
    save_qnetwork(cmd.out_dir / "checkpoint_final.ckpt", result.final_params, extra);

    std::cout << "trained " << result.log.size() << " episodes on " << topo.name()
              << (result.interrupted ? " (interrupted)" : "") << "; best eval mean "
              << result.best_eval_mean << " at episode " << result.best_eval_episode << "\n";
    return kExitOk;
  } catch (const TopologyError& e) {
    return data_error(e);
  } catch (const CheckpointError& e) {
    return data_error(e);
  } catch (const std::ios_base::failure& e) {
    return data_error(e);
  } catch (const std::runtime_error& e) {
    return data_error(e);
  }
}

namespace {

void write_eval_outputs(const std::filesystem::path& out_dir, const EvalSummary& summary,
                        int episodes) {
  auto raw = open_csv(out_dir / "eval_raw.csv", "eval_raw v1");
  raw << "episode,policy,seed,score,relative_to_fluid\n";
  for (int i = 0; i < episodes; ++i) {
    for (std::size_t p = 0; p < summary.policies.size(); ++p) {
      const double score = summary.scores[p][i];
      const double fluid = summary.fluid_scores[i];
      raw << i << ',' << policy_name(summary.policies[p]) << ',' << summary.seeds[i] << ','
          << format_double(score) << ','
          << (fluid > 0.0 ? format_double(score / fluid) : std::string()) << '\n';
    }
  }

  auto stats = open_csv(out_dir / "eval_summary.csv", "eval_summary v1");
  stats << "policy,episodes,score_mean,score_min,score_q1,score_median,score_q3,score_max,"
           "rel_mean\n";
  for (std::size_t p = 0; p < summary.policies.size(); ++p) {
    std::vector<double> sorted = summary.scores[p];
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> rel;
    rel.reserve(sorted.size());
    for (int i = 0; i < episodes; ++i)
      if (summary.fluid_scores[i] > 0.0)
        rel.push_back(summary.scores[p][i] / summary.fluid_scores[i]);
    stats << policy_name(summary.policies[p]) << ',' << episodes << ','
          << format_double(mean_of(summary.scores[p])) << ',' << format_double(sorted.front())
          << ',' << format_double(quantile_sorted(sorted, 0.25)) << ','
          << format_double(quantile_sorted(sorted, 0.5)) << ','
          << format_double(quantile_sorted(sorted, 0.75)) << ',' << format_double(sorted.back())
          << ',' << format_double(mean_of(rel)) << '\n';
  }

  auto cdf = open_csv(out_dir / "eval_cdf.csv", "eval_cdf v1");
  cdf << "policy,relative_score,cdf\n";
  for (std::size_t p = 0; p < summary.policies.size(); ++p) {
    std::vector<double> rel;
    for (int i = 0; i < episodes; ++i)
      if (summary.fluid_scores[i] > 0.0)
        rel.push_back(summary.scores[p][i] / summary.fluid_scores[i]);
    std::sort(rel.begin(), rel.end());
    for (std::size_t j = 0; j < rel.size(); ++j)
      cdf << policy_name(summary.policies[p]) << ',' << format_double(rel[j]) << ','
          << format_double(static_cast<double>(j + 1) / static_cast<double>(rel.size())) << '\n';
  }
}

}  // namespace

int cmd_eval(const EvalCommand& cmd) {
  try {
    ensure_out_dir(cmd.out_dir);
    const Topology topo = load_topology(cmd.topology);
    const PathTable table = build_path_table(topo, cmd.k);

    const bool needs_gnn =
        std::find(cmd.policies.begin(), cmd.policies.end(), Policy::gnn) != cmd.policies.end();
    QNetworkParams params{};
    if (needs_gnn) params = load_qnetwork(cmd.checkpoint).params;

    std::string policy_csv;
    for (std::size_t p = 0; p < cmd.policies.size(); ++p) {
      if (p) policy_csv += ',';
      policy_csv += policy_name(cmd.policies[p]);
    }
    write_resolved_config(cmd.out_dir, "eval",
                          {{"topology", path_str(cmd.topology)},
                           {"checkpoint", needs_gnn ? path_str(cmd.checkpoint) : ""},
                           {"seed", std::to_string(cmd.seed)},
                           {"episodes", std::to_string(cmd.episodes)},
                           {"k", std::to_string(cmd.k)},
                           {"max_capacity", format_double(cmd.max_capacity)},
                           {"policies", policy_csv}});
    write_run_meta(cmd.out_dir);

    const EvalSummary summary =
        evaluate_policies(topo, table, cmd.policies, cmd.episodes, cmd.seed,
                          needs_gnn ? &params : nullptr, cmd.max_capacity);
    write_eval_outputs(cmd.out_dir, summary, cmd.episodes);

    for (std::size_t p = 0; p < summary.policies.size(); ++p)
      std::cout << policy_name(summary.policies[p]) << " mean score "
                << mean_of(summary.scores[p]) << "\n";
    return kExitOk;
  } catch (const TopologyError& e) {
    return data_error(e);
  } catch (const CheckpointError& e) {
    return data_error(e);
  } catch (const std::runtime_error& e) {
    return data_error(e);
  }
}

int cmd_zoo_sweep(const ZooSweepCommand& cmd) {
  try {
    ensure_out_dir(cmd.out_dir);
    if (!std::filesystem::is_directory(cmd.topology_dir))
      throw TopologyError("not a directory: " + cmd.topology_dir.string());

    const QNetworkParams params = load_qnetwork(cmd.checkpoint).params;

    write_resolved_config(cmd.out_dir, "zoo-sweep",
                          {{"topology_dir", path_str(cmd.topology_dir)},
                           {"checkpoint", path_str(cmd.checkpoint)},
                           {"seed", std::to_string(cmd.seed)},
                           {"episodes", std::to_string(cmd.episodes)},
                           {"k", std::to_string(cmd.k)},
                           {"max_capacity", format_double(cmd.max_capacity)}});
    write_run_meta(cmd.out_dir);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(cmd.topology_dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) std::cerr << "warning: no topology files in " << cmd.topology_dir << "\n";

    auto report = open_csv(cmd.out_dir / "zoo_filter_report.csv", "filter_report v1");
    report << "file,name,nodes,links,mean_degree,degree_variance,kept,reason\n";

    std::vector<Topology> loaded;
    for (const auto& file : files) {
      try {
        loaded.push_back(load_topology(file));
      } catch (const TopologyError& e) {
        std::cerr << "skipping " << file << ": " << e.what() << "\n";
        write_csv_row(report, {file.filename().string(), file.stem().string(), "0", "0", "", "",
                               "0", std::string("load failed: ") + e.what()});
      }
    }

    const FilterResult filtered = filter_topologies(loaded);
    for (const auto& d : filtered.report)
      write_csv_row(report, {d.name, d.name, std::to_string(d.nodes), std::to_string(d.links),
                             format_double(d.stats.mean_degree),
                             format_double(d.stats.degree_variance), d.kept ? "1" : "0",
                             d.reason});

    struct Row {
      std::string name;
      int nodes = 0, links = 0;
      double gnn_mean = 0, lb_mean = 0, fluid_mean = 0;
    };
    std::vector<Row> rows(filtered.kept.size());
    const std::vector<Policy> policies{Policy::gnn, Policy::lb, Policy::fluid};
    for (std::size_t t = 0; t < filtered.kept.size(); ++t) {
      const Topology& topo = filtered.kept[t];
      const PathTable table = build_path_table(topo, cmd.k);
      const EvalSummary summary = evaluate_policies(topo, table, policies, cmd.episodes, cmd.seed,
                                                    &params, cmd.max_capacity);
      rows[t] = {topo.name(), topo.node_count(), topo.link_count(), mean_of(summary.scores[0]),
                 mean_of(summary.scores[1]), mean_of(summary.scores[2])};
      std::cerr << topo.name() << ": gnn " << rows[t].gnn_mean << " lb " << rows[t].lb_mean
                << " fluid " << rows[t].fluid_mean << "\n";
    }

    // Fig. 8 ordering: by the score difference between the agent and LB.
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return (a.gnn_mean - a.lb_mean) < (b.gnn_mean - b.lb_mean);
    });

    auto out = open_csv(cmd.out_dir / "zoo_results.csv", "zoo_results v1");
    out << "topology_id,name,nodes,links,episodes,gnn_mean,lb_mean,fluid_mean,"
           "gnn_vs_fluid_pct,lb_vs_fluid_pct,gnn_minus_lb\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      const double gnn_pct = r.fluid_mean > 0 ? 100.0 * r.gnn_mean / r.fluid_mean : 0.0;
      const double lb_pct = r.fluid_mean > 0 ? 100.0 * r.lb_mean / r.fluid_mean : 0.0;
      write_csv_row(out, {std::to_string(i), r.name, std::to_string(r.nodes),
                          std::to_string(r.links), std::to_string(cmd.episodes),
                          format_double(r.gnn_mean), format_double(r.lb_mean),
                          format_double(r.fluid_mean), format_double(gnn_pct),
                          format_double(lb_pct), format_double(r.gnn_mean - r.lb_mean)});
    }
    std::cout << "evaluated " << rows.size() << " of " << loaded.size()
              << " loaded topologies\n";
    return kExitOk;
  } catch (const TopologyError& e) {
    return data_error(e);
  } catch (const CheckpointError& e) {
    return data_error(e);
  } catch (const std::runtime_error& e) {
    return data_error(e);
  }
}

int cmd_link_failures(const LinkFailuresCommand& cmd) {
  try {
    ensure_out_dir(cmd.out_dir);
    const Topology topo = load_topology(cmd.topology);
    const QNetworkParams params = load_qnetwork(cmd.checkpoint).params;

    const int spare_links = topo.link_count() - (topo.node_count() - 1);
    if (cmd.max_failures >= spare_links)
      throw TopologyError("max_failures must stay below L - (N - 1) = " +
                          std::to_string(spare_links) + " so connected subgraphs exist");

    write_resolved_config(cmd.out_dir, "link-failures",
                          {{"topology", path_str(cmd.topology)},
                           {"checkpoint", path_str(cmd.checkpoint)},
                           {"seed", std::to_string(cmd.seed)},
                           {"max_failures", std::to_string(cmd.max_failures)},
                           {"failure_step", std::to_string(cmd.failure_step)},
                           {"experiments", std::to_string(cmd.experiments)},
                           {"k", std::to_string(cmd.k)},
                           {"max_capacity", format_double(cmd.max_capacity)},
                           {"removal_retry_budget", std::to_string(cmd.removal_retry_budget)}});
    write_run_meta(cmd.out_dir);

    auto raw = open_csv(cmd.out_dir / "link_failure_raw.csv", "link_failure_raw v1");
    raw << "failures,experiment,gnn_score,fluid_score,relative,removal_resamples\n";
    auto summary = open_csv(cmd.out_dir / "link_failure_summary.csv", "link_failure_summary v1");
    summary << "failures,experiments,gnn_mean,gnn_stderr,fluid_mean,fluid_stderr,"
               "rel_of_means_pct,removal_resamples\n";

    for (int failures = 0; failures <= cmd.max_failures; failures += cmd.failure_step) {
      std::vector<double> gnn_scores(cmd.experiments), fluid_scores(cmd.experiments);
      std::vector<int> resamples(cmd.experiments, 0);
      const std::string removal_tag = "removal:n=" + std::to_string(failures);

      parallel_for(static_cast<std::size_t>(cmd.experiments), [&](std::size_t e) {
        Topology mutated = topo;
        int attempt = 0;
        for (;; ++attempt) {
          if (attempt > 50)
            throw TopologyError("could not sample a connected removal after 50 resamples");
          Rng removal_rng(derive_seed(cmd.seed, removal_tag,
                                      e + 1000003ULL * static_cast<std::uint64_t>(attempt)));
          try {
            mutated = remove_random_links(topo, failures, removal_rng, cmd.removal_retry_budget);
            break;
          } catch (const TopologyError&) {
            // retry budget exhausted; recorded and resampled with a fresh stream
          }
        }
        resamples[e] = attempt;
        const PathTable table = build_path_table(mutated, cmd.k);
        const std::uint64_t seed = episode_seed(cmd.seed, e);
        gnn_scores[e] =
            run_policy_episode(Policy::gnn, mutated, table, seed, &params, cmd.max_capacity).score;
        fluid_scores[e] =
            run_policy_episode(Policy::fluid, mutated, table, seed, nullptr, cmd.max_capacity)
                .score;
      });

      int resample_total = 0;
      for (int e = 0; e < cmd.experiments; ++e) {
        resample_total += resamples[e];
        raw << failures << ',' << e << ',' << format_double(gnn_scores[e]) << ','
            << format_double(fluid_scores[e]) << ','
            << (fluid_scores[e] > 0 ? format_double(gnn_scores[e] / fluid_scores[e])
                                    : std::string())
            << ',' << resamples[e] << '\n';
      }
      const double gnn_mean = mean_of(gnn_scores);
      const double fluid_mean = mean_of(fluid_scores);
      summary << failures << ',' << cmd.experiments << ',' << format_double(gnn_mean) << ','
              << format_double(stderr_of(gnn_scores)) << ',' << format_double(fluid_mean) << ','
              << format_double(stderr_of(fluid_scores)) << ','
              << format_double(fluid_mean > 0 ? 100.0 * gnn_mean / fluid_mean : 0.0) << ','
              << resample_total << '\n';
      std::cerr << failures << " failures: gnn " << gnn_mean << " fluid " << fluid_mean << "\n";
    }
    std::cout << "link-failure sweep written to " << cmd.out_dir << "\n";
    return kExitOk;
  } catch (const TopologyError& e) {
    return data_error(e);
  } catch (const CheckpointError& e) {
    return data_error(e);
  } catch (const std::runtime_error& e) {
    return data_error(e);
  }
}

int cmd_filter(const FilterCommand& cmd) {
  try {
    ensure_out_dir(cmd.out_dir);
    if (!std::filesystem::is_directory(cmd.topology_dir))
      throw TopologyError("not a directory: " + cmd.topology_dir.string());
    write_resolved_config(cmd.out_dir, "filter",
                          {{"topology_dir", path_str(cmd.topology_dir)}});
    write_run_meta(cmd.out_dir);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(cmd.topology_dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    auto report = open_csv(cmd.out_dir / "filter_report.csv", "filter_report v1");
    report << "file,name,nodes,links,mean_degree,degree_variance,kept,reason\n";

    std::vector<Topology> loaded;
    for (const auto& file : files) {
      try {
        loaded.push_back(load_topology(file));
      } catch (const TopologyError& e) {
        std::cerr << "skipping " << file << ": " << e.what() << "\n";
        write_csv_row(report, {file.filename().string(), file.stem().string(), "0", "0", "", "",
                               "0", std::string("load failed: ") + e.what()});
      }
    }
    const FilterResult filtered = filter_topologies(loaded);
    for (const auto& d : filtered.report)
      write_csv_row(report, {d.name, d.name, std::to_string(d.nodes), std::to_string(d.links),
                             format_double(d.stats.mean_degree),
                             format_double(d.stats.degree_variance), d.kept ? "1" : "0",
                             d.reason});
    std::cout << "kept " << filtered.kept.size() << " of " << loaded.size()
              << " loaded topologies\n";
    return kExitOk;
  } catch (const TopologyError& e) {
    return data_error(e);
  } catch (const std::runtime_error& e) {
    return data_error(e);
  }
}

int cmd_gradcheck(const GradCheckCommand& cmd) {
  Rng rng(cmd.seed);
  std::vector<GradCheckBlock> all_blocks;
  bool ok = true;

  const auto run_check = [&](const std::string& label, const GradCheckReport& report,
                             double tolerance) {
    for (const auto& b : report.blocks) {
      all_blocks.push_back({label + "/" + b.name, b.max_rel_error});
      const bool pass = b.max_rel_error < tolerance;
      ok = ok && pass;
      std::cout << (pass ? "ok   " : "FAIL ") << label << "/" << b.name << " max_rel_error "
                << b.max_rel_error << " (tolerance " << tolerance << ")\n";
    }
  };

  // Dense layer (selu): random weights, loss = sum of outputs squared.
  {
    DenseLayer layer = make_dense(4, 3, Activation::selu, rng);
    Vec input{0.3, -0.7, 1.1, 0.25};
    auto loss_fn = [&] {
      const Vec out = dense_apply(layer, input);
      double acc = 0.0;
      for (double v : out) acc += v * v;
      return acc;
    };
    DenseGrads grads = zeros_like(layer);
    const Vec out = dense_apply(layer, input);
    Vec dl_dout(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) dl_dout[i] = 2.0 * out[i];
    Vec dl_din(input.size(), 0.0);
    dense_backward(layer, input, out, dl_dout, grads, dl_din);
    run_check("dense", finite_diff_check(parameter_refs(layer, "dense"),
                                         parameter_refs(grads, "dense"), loss_fn),
              cmd.unit_tolerance);
  }

  // Recurrent cell: loss = squared norm of the new hidden state.
  {
    RecurrentCell cell = make_recurrent(6, rng);
    Vec hidden(6), input(6);
    for (auto& v : hidden) v = rng.uniform_real(-0.9, 0.9);
    for (auto& v : input) v = rng.uniform_real(-1.0, 1.0);
    auto loss_fn = [&] {
      const Vec out = recurrent_update(cell, hidden, input);
      double acc = 0.0;
      for (double v : out) acc += v * v;
      return acc;
    };
    RecurrentGrads grads = zeros_like(cell);
    RecurrentTrace trace;
    const Vec out = recurrent_update(cell, hidden, input, &trace);
    Vec dl_dout(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) dl_dout[i] = 2.0 * out[i];
    Vec dh(hidden.size(), 0.0), dx(input.size(), 0.0);
    recurrent_backward(cell, hidden, input, trace, dl_dout, grads, dh, dx);
    run_check("recurrent", finite_diff_check(parameter_refs(cell, "cell"),
                                             parameter_refs(grads, "cell"), loss_fn),
              cmd.unit_tolerance);
  }

  // Full model: squared-error q-value loss on a triangle topology with the
  // smallest legal hidden size. The output layer starts at zero by design,
  // which would zero every upstream gradient and make the check vacuous, so
  // it is perturbed here.
  {
    const Topology topo("triangle", 3, {{0, 1}, {1, 2}, {0, 2}});
    const PathTable table = build_path_table(topo, 2);
    QNetworkParams params = QNetworkParams::init({kLinkFeatureCount, 2}, rng);
    glorot_init(params.readout_out.weights, rng);
    Rng env_rng(derive_seed(cmd.seed, "gradcheck-env", 0));
    auto [state, demand] = init_env(topo, table, env_rng, 200.0);
    // Mid-episode capacities so the features are not all at their maxima.
    EnvState varied = state;
    for (int l = 0; l < varied.link_count(); ++l)
      varied.available_mut()[l] = 200.0 - 8.0 * (l + 1);
    const CandidatePath& action = table.paths(demand.src, demand.dst).front();
    const double target = 40.0;

    auto loss_fn = [&] {
      const double q = q_value(topo, varied, demand, action, params);
      return (q - target) * (q - target);
    };
    QTrainingExample example{&varied, &demand, &action, target};
    QBatchResult batch = q_gradients(topo, {&example, 1}, params);
    run_check("qvalue", finite_diff_check(params.parameter_refs(),
                                          batch.grads.parameter_refs(), loss_fn),
              cmd.model_tolerance);
  }

  if (cmd.out_dir) {
    try {
      ensure_out_dir(*cmd.out_dir);
      auto out = open_csv(*cmd.out_dir / "gradcheck_report.csv", "gradcheck v1");
      out << "block,max_rel_error\n";
      for (const auto& b : all_blocks)
        write_csv_row(out, {b.name, format_double(b.max_rel_error)});
    } catch (const std::runtime_error& e) {
      return data_error(e);
    }
  }

  std::cout << (ok ? "gradient verification passed\n" : "gradient verification FAILED\n");
  return ok ? kExitOk : kExitVerification;
}

}  // namespace gnnroute
