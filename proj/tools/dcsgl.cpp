// dcsgl command-line entry point: gen | train | eval | gradcheck | theory-check | reproduce
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dcsgl/config.hpp"
#include "dcsgl/experiment.hpp"
#include "dcsgl/gradcheck.hpp"
#include "dcsgl/jsonl.hpp"
#include "dcsgl/scm.hpp"
#include "dcsgl/synth.hpp"
#include "dcsgl/train.hpp"

namespace fs = std::filesystem;
using namespace dcsgl;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values are applied on top of the config file in command-line order.
struct Overrides {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> kv;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { kv.emplace_back(key, v); }, help);
  }
  void bind_common(CLI::App* app) {
    app->add_option("--config", config_file, "key = value config file");
    app->add_option_function<std::vector<std::string>>(
           "--set",
           [this](const std::vector<std::string>& items) {
             for (const auto& s : items) {
               auto eq = s.find('=');
               if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got " + s);
               kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
             }
           },
           "override any dotted key, e.g. --set train.m=3")
        ->take_all();
  }
  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    for (const auto& [k, v] : kv) cfg.set(k, v);
    return cfg;
  }
};

void log_config(const RunConfig& cfg, std::ostream& os) {
  std::istringstream in(resolved_config(cfg));
  std::string line;
  while (std::getline(in, line)) os << "# " << line << "\n";
}

void require_file(const std::string& path, const char* what) {
  if (path.empty() || !fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

SplitName parse_split(const std::string& s) {
  if (s == "train") return SplitName::Train;
  if (s == "val") return SplitName::Val;
  if (s == "test") return SplitName::Test;
  throw UsageError("unknown split '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---- gen --------------------------------------------------------------------

int cmd_gen(const Overrides& ov, const std::string& out) {
  RunConfig cfg = ov.resolve();
  validate_spec(cfg.gen);
  log_config(cfg, std::cerr);
  Dataset ds;
  std::vector<int> base_class;
  if (cfg.gen.family == Family::Marker) {
    ds = gen_marker_dataset(cfg.gen);
  } else {
    auto gd = gen_motif_dataset_with_meta(cfg.gen);
    ds = std::move(gd.dataset);
    base_class = std::move(gd.base_class);
  }
  encode_jsonl(ds, fs::path(out));

  const DatasetSummary s = summarize(ds);
  std::printf("wrote %s\n", out.c_str());
  std::printf("graphs %zu (train %zu, val %zu, test %zu)\n", s.graphs, s.train, s.val, s.test);
  std::printf("avg nodes %.2f\n", s.avg_nodes);
  std::printf("class histogram:");
  for (std::size_t c = 0; c < s.class_histogram.size(); ++c) std::printf(" %zu:%zu", c, s.class_histogram[c]);
  std::printf("\n");
  if (cfg.gen.family == Family::Marker) std::printf("graphs with marker %zu\n", s.with_marker);
  if (!base_class.empty()) {
    long paired = 0, total = 0;
    for (int i : ds.splits.train) {
      total += 1;
      paired += base_class[static_cast<std::size_t>(i)] == ds.graphs[static_cast<std::size_t>(i)].label;
    }
    std::printf("bias calibration (train): target %s, empirical P(paired base | motif) %.4f\n",
                bias_label(cfg.gen.bias).c_str(), total ? static_cast<double>(paired) / total : 0.0);
  }
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out_dir = ".";
  std::string svg;
  std::string embeddings;
};

int cmd_train(const Overrides& ov, const TrainArgs& a) {
  require_file(a.data, "dataset");
  RunConfig cfg = ov.resolve();
  const Dataset ds = decode_jsonl(fs::path(a.data));
  GnnConfig gnn = gnn_config_for(ds, cfg.model);
  if (cfg.train.mode == TrainMode::DcsglT) cfg.train.m = gnn.num_layers;
  validate(cfg.train, gnn);
  log_config(cfg, std::cerr);

  TrainResult res = train(cfg.train, ds, gnn);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_report_csv(res.report, dir / "metrics.csv");
  save_checkpoint(res.model, dir / "model.json");
  {
    std::ofstream f(dir / "config.txt");
    f << resolved_config(cfg);
  }
  if (!a.svg.empty()) {
    std::ofstream f(a.svg);
    f << render_curves_svg(res.report);
  }
  if (!a.embeddings.empty()) write_embeddings_csv(res.model, ds, a.embeddings);
  std::printf("epochs run %d, best epoch %d, best val accuracy %.4f\n", res.report.epochs_run, res.report.best_epoch,
              res.report.best_val_accuracy);
  if (res.report.test_accuracy) std::printf("test accuracy %.4f\n", *res.report.test_accuracy);
  if (res.report.skipped_samples) std::printf("skipped samples %zu\n", res.report.skipped_samples);
  return 0;
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& split) {
  require_file(checkpoint, "checkpoint");
  require_file(data, "dataset");
  const SplitName sp = parse_split(split);
  const GnnModel model = load_checkpoint(checkpoint);
  const Dataset ds = decode_jsonl(fs::path(data));
  if (ds.feature_dim != model.config().feature_dim || ds.task != model.config().task)
    throw UsageError("checkpoint does not match dataset (feature dimension or task)");
  std::printf("%s accuracy %.4f (%zu samples)\n", split_name(sp), evaluate(model, ds, sp), ds.split(sp).size());
  return 0;
}

// ---- gradcheck --------------------------------------------------------------

int cmd_gradcheck(std::uint64_t seed, double eps, double tol) {
  const GradCheckReport rep = run_gradcheck(seed, eps);
  std::printf("%-22s %8s %14s\n", "check", "entries", "max rel err");
  for (const auto& e : rep.entries) std::printf("%-22s %8d %14.3e\n", e.name.c_str(), e.checked, e.max_rel_error);
  const double worst = rep.max_rel_error();
  std::printf("max relative error %.3e (tolerance %.1e) %s\n", worst, tol, worst < tol ? "OK" : "FAIL");
  return worst < tol ? 0 : kExitRuntime;
}

// ---- theory-check -----------------------------------------------------------

struct TheoryArgs {
  int scms = 1000;
  int premise_scms = 100;
  int alternatives = 100;
  int max_alphabet = 4;
  std::uint64_t seed = 0;
  double tol1 = 1e-9;
  double tol2 = 1e-10;
};

int cmd_theory_check(const TheoryArgs& a) {
  struct Col {
    const char* name;
    double min = std::numeric_limits<double>::infinity();
  };
  Col cols[] = {{"I(G;C)-I(R;C)"}, {"I(X,C;G)-I(X;G)-I(G;C)"}, {"I(S~;G)-I(S~;R)"},
                {"I(X;G)-I(S~;G)"}, {"bound (d)"},               {"bound (d), normalized"}};
  int violations1 = 0, normalized = 0;
  for (int i = 0; i < a.scms; ++i) {
    Rng rng(derive_seed(a.seed, {0x51, static_cast<std::uint64_t>(i)}));
    const auto r = scm::check_theorem1(scm::random_scm(rng, a.max_alphabet));
    const double v[] = {r.slack_rc_gc, r.slack_chain, r.slack_sr_sg, r.slack_sg_xg, r.slack_bound};
    for (int k = 0; k < 5; ++k) cols[k].min = std::min(cols[k].min, v[k]);
    if (r.slack_bound_normalized) {
      ++normalized;
      cols[5].min = std::min(cols[5].min, *r.slack_bound_normalized);
    }
    violations1 += r.min_slack() < -a.tol1;
  }
  std::printf("Theorem 1: %d random SCMs (alphabets <= %d), %d with I(X,C;G) > 0\n", a.scms, a.max_alphabet, normalized);
  std::printf("  %-26s %14s\n", "slack", "min");
  for (const auto& c : cols) std::printf("  %-26s %14.3e\n", c.name, c.min);
  std::printf("  violations (< -%.0e): %d\n", a.tol1, violations1);

  double worst_gap = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
  int unmet = 0, unmatched = 0, violations2 = 0;
  for (int i = 0; i < a.premise_scms; ++i) {
    Rng rng(derive_seed(a.seed, {0x52, static_cast<std::uint64_t>(i)}));
    const auto m = scm::premise_scm(rng, a.max_alphabet);
    const auto r = scm::check_theorem2(m, derive_seed(a.seed, {0x53, static_cast<std::uint64_t>(i)}), a.alternatives);
    if (!r.premise_met) {
      ++unmet;
      continue;
    }
    unmatched += !r.matched;
    worst_gap = std::max(worst_gap, r.equality_gap);
    worst_excess = std::max(worst_excess, r.worst_excess);
    violations2 += r.equality_gap >= a.tol2 || r.worst_excess > a.tol2 || !r.matched;
  }
  std::printf("Theorem 2: %d premise-satisfying SCMs, %d alternatives each\n", a.premise_scms, a.alternatives);
  std::printf("  premise unmet %d, matching channel unrealized %d\n", unmet, unmatched);
  std::printf("  max |I(S~;T) - I(S~;T~)|          %12.3e\n", worst_gap);
  std::printf("  max I(S~;T') - I(S~;T~)            %12.3e\n", worst_excess);
  std::printf("  violations: %d\n", violations2);
  const bool ok = violations1 == 0 && violations2 == 0 && unmet == 0;
  std::printf("%s\n", ok ? "OK" : "FAIL");
  return ok ? 0 : kExitRuntime;
}

// ---- reproduce --------------------------------------------------------------

int cmd_reproduce(const Overrides& ov, const std::string& biases, const std::string& modes, int seeds,
                  const std::string& out) {
  RunConfig cfg = ov.resolve();
  ReproduceOptions opt;
  opt.gen = cfg.gen;
  opt.train = cfg.train;
  opt.model = cfg.model;
  opt.seeds = seeds;
  opt.biases.clear();
  for (const auto& b : split_list(biases)) {
    RunConfig probe;
    probe.set("gen.bias", b);
    opt.biases.push_back(probe.gen.bias);
  }
  opt.modes.clear();
  for (const auto& m : split_list(modes)) opt.modes.push_back(parse_mode(m));
  if (opt.biases.empty() || opt.modes.empty()) throw UsageError("need at least one bias and one mode");
  for (const auto& b : opt.biases) {
    GenSpec gs = opt.gen;
    gs.bias = b;
    validate_spec(gs);
  }
  log_config(cfg, std::cerr);
  const ReproduceResult r = reproduce(opt, [](const std::string& s) { std::cerr << s << "\n"; });
  std::printf("test accuracy (%%), mean±std over %d seeds\n%s", seeds, reproduce_table(r).c_str());
  if (!out.empty()) {
    std::ofstream f(out);
    f << reproduce_csv(r);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diminutive-causal-structure guided graph learning toolkit"};
  app.require_subcommand(1);

  Overrides gen_ov, train_ov, rep_ov;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset (JSONL)");
  gen_ov.bind_common(gen);
  gen_ov.bind(gen, "--family", "gen.family", "spurious-motif | motif-variant | marker");
  gen_ov.bind(gen, "--bias", "gen.bias", "P(paired base | motif) in [1/3,1], or 'balanced'");
  gen_ov.bind(gen, "--count", "gen.count", "number of graphs");
  gen_ov.bind(gen, "--seed", "gen.seed", "generator seed");
  gen_ov.bind(gen, "--task", "gen.task", "graph | node");
  gen_ov.bind(gen, "--base-min", "gen.base_min", "smallest base size");
  gen_ov.bind(gen, "--base-max", "gen.base_max", "largest base size");
  gen_ov.bind(gen, "--feature-dim", "gen.feature_dim", "node feature dimension");
  gen->add_option("--out", gen_out, "output JSONL path")->required();

  TrainArgs targs;
  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  train_ov.bind_common(tr);
  tr->add_option("--data", targs.data, "dataset JSONL")->required();
  tr->add_option("--out-dir", targs.out_dir, "directory for metrics.csv, model.json, config.txt");
  tr->add_option("--svg", targs.svg, "write loss/accuracy curves as SVG");
  tr->add_option("--embeddings", targs.embeddings, "write graph embeddings as CSV");
  train_ov.bind(tr, "--mode", "train.mode", "dcsgl | backbone-only | dcsgl-t | dcsgl-a | dcs-only-d | dcs-only-l");
  train_ov.bind(tr, "--seed", "train.seed", "training seed");
  train_ov.bind(tr, "--epochs", "train.epochs", "minimum epochs before early stopping");
  train_ov.bind(tr, "--max-epochs", "train.max_epochs", "hard epoch cap");
  train_ov.bind(tr, "--patience", "train.patience", "early-stopping patience");
  train_ov.bind(tr, "--m", "train.m", "tap layer (1-based)");
  train_ov.bind(tr, "--K", "train.K", "interventions per sample");
  train_ov.bind(tr, "--lambda", "train.lambda", "weight of L_d");
  train_ov.bind(tr, "--lr", "train.lr", "learning rate");
  train_ov.bind(tr, "--batch-size", "train.batch_size", "batch size");
  train_ov.bind(tr, "--optimizer", "train.optimizer", "adam | sgd");
  train_ov.bind(tr, "--domain", "train.domain", "junction | marker");
  train_ov.bind(tr, "--backbone", "model.backbone", "local-extremum | mean-gcn");

  std::string ev_ckpt, ev_data, ev_split = "test";
  auto* ev = app.add_subcommand("eval", "accuracy of a checkpoint on a dataset split");
  ev->add_option("--checkpoint", ev_ckpt, "model.json from train")->required();
  ev->add_option("--data", ev_data, "dataset JSONL")->required();
  ev->add_option("--split", ev_split, "train | val | test");

  std::uint64_t gc_seed = 0;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every primitive and L_a");
  gc->add_option("--seed", gc_seed, "seed for random inputs");
  gc->add_option("--eps", gc_eps, "central-difference step");
  gc->add_option("--tol", gc_tol, "maximum relative error");

  TheoryArgs th;
  auto* tc = app.add_subcommand("theory-check", "exact-enumeration checks of Theorems 1 and 2");
  tc->add_option("--scms", th.scms, "random SCMs for Theorem 1");
  tc->add_option("--premise-scms", th.premise_scms, "premise-satisfying SCMs for Theorem 2");
  tc->add_option("--alternatives", th.alternatives, "random P(T'|R) per SCM");
  tc->add_option("--max-alphabet", th.max_alphabet, "largest alphabet")->check(CLI::Range(2, scm::kMaxAlphabet));
  tc->add_option("--seed", th.seed, "seed");

  std::string rp_biases = "0.9", rp_modes = "backbone-only,dcsgl,dcsgl-t,dcsgl-a", rp_out;
  int rp_seeds = 5;
  auto* rp = app.add_subcommand("reproduce", "backbone vs DCSGL vs ablations over seeds");
  rep_ov.bind_common(rp);
  rp->add_option("--biases", rp_biases, "comma list of biases ('balanced' allowed)");
  rp->add_option("--modes", rp_modes, "comma list of training modes");
  rp->add_option("--seeds", rp_seeds, "seeds per cell")->check(CLI::Range(1, 1000));
  rp->add_option("--out", rp_out, "CSV output path");
  rep_ov.bind(rp, "--family", "gen.family", "dataset family");
  rep_ov.bind(rp, "--count", "gen.count", "graphs per dataset");
  rep_ov.bind(rp, "--data-seed", "gen.seed", "generator seed");
  rep_ov.bind(rp, "--epochs", "train.epochs", "minimum epochs");
  rep_ov.bind(rp, "--max-epochs", "train.max_epochs", "hard epoch cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_ov, gen_out);
    if (*tr) return cmd_train(train_ov, targs);
    if (*ev) return cmd_eval(ev_ckpt, ev_data, ev_split);
    if (*gc) return cmd_gradcheck(gc_seed, gc_eps, gc_tol);
    if (*tc) return cmd_theory_check(th);
    if (*rp) return cmd_reproduce(rep_ov, rp_biases, rp_modes, rp_seeds, rp_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
