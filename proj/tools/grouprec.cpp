// Copyright 2026 The grouprec Authors.
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


// Command-line front end: prepare, train, evaluate, coldstart, analyze,
// gradcheck. Flags override values from --config.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grouprec/grouprec.hpp"

namespace {

using grouprec::json;

/// Flags shared by the data-driven commands. Only flags the user actually
/// passed end up in the override object.
struct CommonFlags {
  std::string config_path;
  json overrides = json::object();
};

template <typename T>
void add_override(CLI::App* cmd, CommonFlags& f, const std::string& flag, const std::string& key,
                  const std::string& help) {
  cmd->add_option_function<T>(flag, [&f, key](const T& v) { f.overrides[key] = v; }, help);
}

void add_bool_override(CLI::App* cmd, CommonFlags& f, const std::string& flag,
                       const std::string& key, const std::string& help) {
  cmd->add_flag_callback(flag, [&f, key] { f.overrides[key] = true; }, help);
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  add_override<std::string>(cmd, f, "--ug", "ug_path", "user-group edge list (TSV)");
  add_override<std::string>(cmd, f, "--ui", "ui_path", "user-item edge list (TSV)");
  add_override<std::size_t>(cmd, f, "--num-users", "num_users", "user count override");
  add_override<std::size_t>(cmd, f, "--num-groups", "num_groups", "group count override");
  add_override<std::size_t>(cmd, f, "--num-items", "num_items", "item count override");
  add_bool_override(cmd, f, "--synthetic", "synthetic", "use the planted-partition generator");
  add_override<std::size_t>(cmd, f, "--syn-clusters", "syn_clusters", "");
  add_override<std::size_t>(cmd, f, "--syn-users", "syn_users_per_cluster", "");
  add_override<std::size_t>(cmd, f, "--syn-groups", "syn_groups_per_cluster", "");
  add_override<std::size_t>(cmd, f, "--syn-items", "syn_items_per_cluster", "");
  add_override<double>(cmd, f, "--syn-in", "syn_in_cluster_prob", "");
  add_override<double>(cmd, f, "--syn-noise", "syn_noise_prob", "");
  add_override<std::uint64_t>(cmd, f, "--syn-seed", "syn_seed", "");
  add_override<double>(cmd, f, "--test-ratio", "test_ratio", "");
  add_override<double>(cmd, f, "--val-ratio", "val_ratio", "");
  add_override<std::uint64_t>(cmd, f, "--split-seed", "split_seed", "");
  add_override<std::string>(cmd, f, "--split", "split_manifest", "reuse a split.json");
  add_override<double>(cmd, f, "--gamma", "gamma", "");
  add_override<double>(cmd, f, "--beta", "beta", "");
  add_override<double>(cmd, f, "--tau-u", "tau_u", "");
  add_override<double>(cmd, f, "--tau-g", "tau_g", "");
  add_override<double>(cmd, f, "--lambda-ssl", "lambda_ssl", "");
  add_override<double>(cmd, f, "--lambda-reg", "lambda_reg", "");
  add_override<double>(cmd, f, "--lr", "lr", "");
  add_override<std::size_t>(cmd, f, "--dim", "dim", "");
  add_override<std::size_t>(cmd, f, "--layers", "layers", "");
  add_override<std::uint64_t>(cmd, f, "--seed", "seed", "");
  add_override<std::size_t>(cmd, f, "--patience", "patience", "");
  add_override<std::vector<std::size_t>>(cmd, f, "--k", "k_list", "cutoffs, ascending");
  add_override<std::string>(cmd, f, "--variant", "variant", "default|gcn_item|joint_simultaneous|joint_sequential");
  add_override<std::string>(cmd, f, "--score-view", "score_view", "combined|item");
  add_bool_override(cmd, f, "--disable-cssl", "disable_cssl", "");
  add_bool_override(cmd, f, "--disable-group-reg", "disable_group_reg", "");
  add_bool_override(cmd, f, "--disable-thc", "disable_thc", "sets gamma = 0");
  add_override<std::size_t>(cmd, f, "--eval-every", "eval_every", "");
  add_override<std::size_t>(cmd, f, "--max-epochs", "max_epochs", "");
  add_bool_override(cmd, f, "--allow-large-cssl", "allow_large_cssl", "");
  add_override<std::size_t>(cmd, f, "--bins", "analysis_bins", "");
  add_override<std::string>(cmd, f, "--out", "output_dir", "output directory");
}

grouprec::RunConfig resolve(const CommonFlags& f) {
  grouprec::RunConfig c;
  if (!f.config_path.empty()) grouprec::merge_config(grouprec::read_json(f.config_path), c);
  grouprec::merge_config(f.overrides, c);
  c.validate();
  return c;
}

void print(const json& j) { std::cout << grouprec::dump(j); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grouprec: hypergraph group recommendation"};
  app.require_subcommand(1);

  CommonFlags prep_f, train_f, eval_f, cold_f, an_f;
  std::string eval_ckpt, an_ckpt;
  std::vector<std::size_t> cold_k{1, 2, 3};
  bool equivalence = false;
  std::size_t gc_instances = 10, eq_seeds = 5;

  auto* prepare = app.add_subcommand("prepare", "build and write the train/validation/test split");
  add_common(prepare, prep_f);
  auto* train = app.add_subcommand("train", "train and write checkpoint, history, run manifest");
  add_common(train, train_f);
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
  add_common(evaluate, eval_f);
  evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint.json")->required();
  auto* coldstart = app.add_subcommand("coldstart", "degree-capped retraining sweep");
  add_common(coldstart, cold_f);
  coldstart->add_option("--caps", cold_k, "per-user group caps");
  auto* analyze = app.add_subcommand("analyze", "view consistency and group relatedness");
  add_common(analyze, an_f);
  analyze->add_option("--checkpoint", an_ckpt, "checkpoint.json")->required();
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference or equivalence checks");
  gradcheck->add_flag("--equivalence", equivalence, "run the reduction battery instead");
  gradcheck->add_option("--instances", gc_instances, "gradient instances");
  gradcheck->add_option("--seeds", eq_seeds, "equivalence seeds per cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*prepare) {
      const auto r = grouprec::cmd_prepare(resolve(prep_f));
      print(r.stats);
    } else if (*train) {
      const auto r = grouprec::cmd_train(resolve(train_f));
      print(r.manifest);
    } else if (*evaluate) {
      const auto c = resolve(eval_f);
      const auto ck = grouprec::load_checkpoint(eval_ckpt);
      print(grouprec::to_json(grouprec::cmd_evaluate(c, ck, c.hp.k_list)));
    } else if (*coldstart) {
      std::cout << grouprec::coldstart_csv(grouprec::cmd_coldstart(resolve(cold_f), cold_k));
    } else if (*analyze) {
      const auto r = grouprec::cmd_analyze(resolve(an_f), grouprec::load_checkpoint(an_ckpt));
      std::cout << "consistency "
                << (r.consistency.value ? grouprec::format_double(*r.consistency.value)
                                        : std::string("undefined"))
                << "\npearson " << grouprec::format_double(r.relatedness.pearson) << '\n';
      if (r.relatedness.warning) std::cerr << "warning: " << *r.relatedness.warning << '\n';
    } else if (*gradcheck) {
      const json report = equivalence ? grouprec::equivalence_report(eq_seeds)
                                      : grouprec::gradcheck_report(gc_instances);
      print(report);
      return report.at("passed").get<bool>() ? EXIT_SUCCESS : EXIT_FAILURE;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
