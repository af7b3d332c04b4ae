/*
 * Copyright 2026 The hcs Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: hcs <generate-toy|make-shift|train|evaluate|select|mmd>.
// Exit codes: 0 ok, 1 usage, 2 data, 3 numerical.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "hcs/config.hpp"
#include "hcs/data.hpp"
#include "hcs/mmd.hpp"
#include "hcs/model_selection.hpp"
#include "hcs/trainer.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Overrides collected from flags; applied on top of the config file.
struct Overrides {
  std::string config_path;
  std::string source, target, format, mode, output_dir, weight_loss_term;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size, phi_hidden, vocab_size;
  bool no_snapshots = false;
};

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON experiment config");
  cmd->add_option("--source", o.source, "Source data file");
  cmd->add_option("--target", o.target, "Target data file");
  cmd->add_option("--format", o.format, "Input format: auto, sparse or acl");
  cmd->add_option("--mode", o.mode, "hcs, marginal, class_conditional or no_da");
  cmd->add_option("--lambda", o.lambda, "Weight of the source loss");
  cmd->add_option("--seed", o.seed, "Training seed");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
  cmd->add_option("--batch-size", o.batch_size, "Batch size");
  cmd->add_option("--phi-hidden", o.phi_hidden, "Representation width");
  cmd->add_option("--vocab-size", o.vocab_size, "Vocabulary size for processed-ACL input");
  cmd->add_option("--weight-loss", o.weight_loss_term, "v_statistic or unbiased");
  cmd->add_option("-o,--output-dir", o.output_dir, "Output directory");
  cmd->add_flag("--no-snapshots", o.no_snapshots, "Skip representation snapshots");
}

nlohmann::json read_json_file(const std::string& path) {
  auto in = hcs::detail::open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

hcs::ExperimentConfig resolve_config(const Overrides& o) {
  hcs::ExperimentConfig c;
  if (!o.config_path.empty()) c = hcs::experiment_config_from_json(read_json_file(o.config_path));
  if (!o.source.empty()) c.source_path = o.source;
  if (!o.target.empty()) c.target_path = o.target;
  if (!o.format.empty()) c.format = hcs::parse_file_format(o.format);
  if (!o.mode.empty()) c.train.mode = hcs::parse_mode(o.mode);
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (!o.weight_loss_term.empty()) c.train.weight_loss_term = hcs::parse_source_term(o.weight_loss_term);
  if (o.lambda) c.train.lambda = *o.lambda;
  if (o.seed) c.train.seed = *o.seed;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.phi_hidden) c.train.phi_hidden = *o.phi_hidden;
  if (o.vocab_size) c.vocab_size = *o.vocab_size;
  if (o.no_snapshots) c.snapshots = false;
  c.train.validate();
  return c;
}

// Source/target pair described by the config: generated toy data or input
// files, optionally passed through a shift constructor.
std::pair<hcs::Dataset, hcs::Dataset> prepare_data(const hcs::ExperimentConfig& c) {
  std::pair<hcs::Dataset, hcs::Dataset> data;
  if (c.toy) {
    std::mt19937_64 rng(c.toy->seed);
    data = hcs::gen_toy(rng, c.toy->n_source, c.toy->n_target, {0.5, c.toy->p_pos_target});
  } else {
    if (c.source_path.empty() || c.target_path.empty()) {
      throw UsageError("source and target paths are required (or a toy section)");
    }
    data = hcs::load_task(c.source_path, c.target_path, c.format, c.vocab_size);
  }
  std::mt19937_64 shift_rng(c.train.seed ^ 0x5bd1e995ULL);
  switch (c.shift.kind) {
    case hcs::ShiftSpec::Kind::none:
      break;
    case hcs::ShiftSpec::Kind::target_shift:
      data.second = hcs::make_target_shift(shift_rng, data.second, c.shift.p_pos_target);
      break;
    case hcs::ShiftSpec::Kind::concept_drift: {
      // Inputs are the two domains D1 and D2.
      const std::size_t half = std::min(data.first.size(), data.second.size()) / 2;
      const std::size_t ns = c.shift_n_source != 0 ? c.shift_n_source : half;
      const std::size_t nt = c.shift_n_target != 0 ? c.shift_n_target : (half / 2) / 4 * 4;
      data = hcs::make_concept_drift(shift_rng, data.first, data.second, ns, nt,
                                     c.shift.p_pos_given_d1, c.shift.p_pos_given_d2);
      break;
    }
  }
  return data;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw hcs::DataError("cannot write " + p.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw hcs::DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

int run_generate_toy(const hcs::ToyGeneratorSpec& spec, const std::string& out_dir) {
  ensure_dir(out_dir);
  std::mt19937_64 rng(spec.seed);
  const auto [s, t] = hcs::gen_toy(rng, spec.n_source, spec.n_target, {0.5, spec.p_pos_target});
  hcs::write_sparse_file((fs::path(out_dir) / "source.txt").string(), s);
  hcs::write_sparse_file((fs::path(out_dir) / "target.txt").string(), t);
  std::cout << "wrote " << s.size() << " source and " << t.size() << " target rows to " << out_dir
            << '\n';
  return kOk;
}

struct ShiftArgs {
  std::string kind;
  std::string input, d1, d2, format = "auto", out, out_dir;
  double p_pos_target = 0.9, p1 = 0.8, p2 = 0.2;
  std::size_t n_source = 0, n_target = 0, vocab_size = 5000;
  std::uint64_t seed = 0;
};

int run_make_shift(const ShiftArgs& a) {
  std::mt19937_64 rng(a.seed);
  const auto fmt = hcs::parse_file_format(a.format);
  if (a.kind == "target_shift") {
    if (a.input.empty() || a.out.empty()) throw UsageError("target_shift needs --input and --out");
    const hcs::Dataset d = hcs::load_task(a.input, a.input, fmt, a.vocab_size).first;
    const hcs::Dataset shifted = hcs::make_target_shift(rng, d, a.p_pos_target);
    hcs::write_sparse_file(a.out, shifted);
    std::cout << "wrote " << shifted.size() << " rows, positive rate "
              << hcs::format_double(shifted.positive_rate()) << '\n';
    return kOk;
  }
  if (a.kind == "concept_drift") {
    if (a.d1.empty() || a.d2.empty() || a.out_dir.empty()) {
      throw UsageError("concept_drift needs --d1, --d2 and --out-dir");
    }
    if (a.n_source == 0 || a.n_target == 0) {
      throw UsageError("concept_drift needs --n-source and --n-target");
    }
    const auto [d1, d2] = hcs::load_task(a.d1, a.d2, fmt, a.vocab_size);
    const auto [s, t] = hcs::make_concept_drift(rng, d1, d2, a.n_source, a.n_target, a.p1, a.p2);
    ensure_dir(a.out_dir);
    hcs::write_sparse_file((fs::path(a.out_dir) / "source.txt").string(), s);
    hcs::write_sparse_file((fs::path(a.out_dir) / "target.txt").string(), t);
    std::cout << "wrote " << s.size() << " source and " << t.size() << " target rows to "
              << a.out_dir << '\n';
    return kOk;
  }
  throw UsageError("--kind must be target_shift or concept_drift");
}

int run_train(const hcs::ExperimentConfig& c) {
  const auto [source, target] = prepare_data(c);
  const hcs::TrainedBundle b = hcs::fit(source, target, c.train, c.snapshots);
  const fs::path dir(c.output_dir);
  ensure_dir(dir);
  {
    auto out = open_output(dir / "checkpoint.bin");
    hcs::save_bundle(out, b);
  }
  {
    auto out = open_output(dir / "metrics.jsonl");
    hcs::write_metrics_jsonl(out, b.metrics);
  }
  {
    auto out = open_output(dir / "config.json");
    out << hcs::to_json(c).dump(2) << '\n';
  }
  for (const auto& snap : b.metrics.snapshots) {
    auto out = open_output(dir / ("snapshot_epoch_" + std::to_string(snap.epoch) + ".csv"));
    hcs::write_snapshot_csv(out, snap, source, target, b.probe_source, b.probe_target);
  }
  const hcs::EpochRecord& last = b.metrics.epochs.back();
  nlohmann::json summary = {{"epochs", last.epoch}, {"source_accuracy", last.source_accuracy}};
  summary["target_accuracy"] =
      last.target_accuracy ? nlohmann::json(*last.target_accuracy) : nlohmann::json();
  std::cout << summary.dump() << '\n';
  return kOk;
}

struct EvalArgs {
  std::string checkpoint, data, head = "g_t";
};

int run_evaluate(const EvalArgs& a) {
  hcs::TrainedBundle b;
  {
    auto in = hcs::detail::open_input(a.checkpoint);
    b = hcs::load_bundle(in);
  }
  if (hcs::detect_format(a.data) != hcs::FileFormat::sparse) {
    throw hcs::DataError("evaluate: " + a.data + " must be in the sparse format");
  }
  hcs::Dataset d = hcs::read_sparse_file(a.data, "eval");
  if (!d.has_labels()) throw hcs::DataError("evaluate: " + a.data + " has unlabeled rows");
  const std::size_t dim = b.phi.input_dim();
  if (d.feature_dim() > dim) {
    throw hcs::DataError("evaluate: " + a.data + " has " + std::to_string(d.feature_dim()) +
                         " features, checkpoint expects " + std::to_string(dim));
  }
  d = hcs::Dataset(dim, d.rows(), d.labels(), d.domain_tag(), d.ids());
  const hcs::Mlp* head = nullptr;
  if (a.head == "g_s") head = &b.g_s;
  else if (a.head == "g_t") head = &b.g_t;
  else throw UsageError("--head must be g_s or g_t");
  const double acc = hcs::accuracy(b.phi, *head, d);
  std::cout << nlohmann::json{{"accuracy", acc}, {"rows", d.size()}, {"head", a.head}}.dump() << '\n';
  return kOk;
}

struct SelectArgs {
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  bool parallel = false;
  std::string report;
};

int run_select(hcs::ExperimentConfig c, const SelectArgs& a) {
  if (!a.lambdas.empty()) c.lambdas = a.lambdas;
  if (!a.seeds.empty()) c.seeds = a.seeds;
  const auto [source, target] = prepare_data(c);
  const hcs::SelectionReport r = hcs::sweep(source, target, c.lambdas, c.seeds, c.train, a.parallel);
  fs::path path(a.report);
  if (path.empty()) {
    ensure_dir(c.output_dir);
    path = fs::path(c.output_dir) / "selection.json";
  }
  {
    auto out = open_output(path);
    out << hcs::to_json(r).dump(2) << '\n';
  }
  if (!r.chosen) throw hcs::NumericalError("select: every candidate failed");
  const auto& best = r.candidates[*r.chosen];
  std::cout << nlohmann::json{{"chosen", *r.chosen},
                              {"lambda", best.config.lambda},
                              {"seed", best.config.seed},
                              {"reverse_score", *best.reverse_score},
                              {"report", path.string()}}
                   .dump()
            << '\n';
  return kOk;
}

// Rows as dense points; a single file is split into even and odd rows.
int run_mmd(const std::string& a, const std::string& b, const std::string& format) {
  const bool self = b.empty() || fs::weakly_canonical(a) == fs::weakly_canonical(b);
  const auto [da, db] = hcs::load_task(a, self ? a : b, hcs::parse_file_format(format));
  hcs::Points pa;
  hcs::Points pb;
  if (self) {
    std::vector<std::size_t> even;
    std::vector<std::size_t> odd;
    for (std::size_t i = 0; i < da.size(); ++i) (i % 2 == 0 ? even : odd).push_back(i);
    if (even.size() < 2 || odd.size() < 2) throw hcs::DataError("mmd: " + a + " needs >= 4 rows");
    pa = da.dense(even);
    pb = da.dense(odd);
  } else {
    if (da.size() < 2 || db.size() < 2) throw hcs::DataError("mmd: each file needs >= 2 rows");
    pa = da.dense();
    pb = db.dense();
  }
  const double v = hcs::mmd_unbiased_sq(hcs::KernelBank::default_bank(), pa, pb).value;
  if (!std::isfinite(v)) throw hcs::NumericalError("mmd: non-finite estimate");
  std::cout << hcs::format_double(v) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain adaptation with hidden covariate shift"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  hcs::ToyGeneratorSpec toy;
  std::string toy_out = ".";
  auto* gen = app.add_subcommand("generate-toy", "Write the synthetic two-feature source/target pair");
  gen->add_option("--n-source", toy.n_source, "Source rows");
  gen->add_option("--n-target", toy.n_target, "Target rows");
  gen->add_option("--p-pos-target", toy.p_pos_target, "Target positive rate")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", toy.seed, "Generator seed");
  gen->add_option("-o,--out-dir", toy_out, "Directory for source.txt and target.txt");

  ShiftArgs shift;
  auto* mk = app.add_subcommand("make-shift", "Apply a target or concept shift to input corpora");
  mk->add_option("--kind", shift.kind, "target_shift or concept_drift")->required();
  mk->add_option("--input", shift.input, "Corpus for target_shift");
  mk->add_option("--out", shift.out, "Output file for target_shift");
  mk->add_option("--p-pos-target", shift.p_pos_target, "Requested positive rate")->check(CLI::Range(0.0, 1.0));
  mk->add_option("--d1", shift.d1, "First corpus for concept_drift");
  mk->add_option("--d2", shift.d2, "Second corpus for concept_drift");
  mk->add_option("--p1", shift.p1, "P(Y=1 | D1) in the source")->check(CLI::Range(0.0, 1.0));
  mk->add_option("--p2", shift.p2, "P(Y=1 | D2) in the source")->check(CLI::Range(0.0, 1.0));
  mk->add_option("--n-source", shift.n_source, "Source rows for concept_drift");
  mk->add_option("--n-target", shift.n_target, "Target rows for concept_drift");
  mk->add_option("--out-dir", shift.out_dir, "Output directory for concept_drift");
  mk->add_option("--format", shift.format, "Input format: auto, sparse or acl");
  mk->add_option("--vocab-size", shift.vocab_size, "Vocabulary size for processed-ACL input");
  mk->add_option("--seed", shift.seed, "Sampling seed");

  Overrides train_o;
  auto* train = app.add_subcommand("train", "Fit a model and write checkpoint, metrics and snapshots");
  add_experiment_flags(train, train_o);

  EvalArgs eval;
  auto* ev = app.add_subcommand("evaluate", "Accuracy of a checkpoint on a labeled sparse file");
  ev->add_option("--checkpoint", eval.checkpoint, "checkpoint.bin written by train")->required();
  ev->add_option("--data", eval.data, "Labeled sparse file")->required();
  ev->add_option("--head", eval.head, "g_t (target head) or g_s");

  Overrides select_o;
  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Sweep lambda x seed and pick by reverse validation");
  add_experiment_flags(select, select_o);
  select->add_option("--lambdas", sel.lambdas, "Comma-separated lambda grid")->delimiter(',');
  select->add_option("--seeds", sel.seeds, "Comma-separated seed grid")->delimiter(',');
  select->add_flag("--parallel", sel.parallel, "Run candidates concurrently");
  select->add_option("--report", sel.report, "Report path (default <output-dir>/selection.json)");

  std::string mmd_a;
  std::string mmd_b;
  std::string mmd_format = "auto";
  auto* mmd = app.add_subcommand("mmd", "Unbiased MMD^2 between two feature files");
  mmd->add_option("a", mmd_a, "Feature file")->required();
  mmd->add_option("b", mmd_b, "Second file (omit to compare even and odd rows of a)");
  mmd->add_option("--format", mmd_format, "Input format: auto, sparse or acl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    hcs::set_max_threads(threads);
    if (*gen) return run_generate_toy(toy, toy_out);
    if (*mk) return run_make_shift(shift);
    if (*train) return run_train(resolve_config(train_o));
    if (*ev) return run_evaluate(eval);
    if (*select) return run_select(resolve_config(select_o), sel);
    if (*mmd) return run_mmd(mmd_a, mmd_b, mmd_format);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const hcs::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const hcs::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
