#include "dcsgl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "dcsgl/config.hpp"

namespace dcsgl {

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

const ReproduceCell* ReproduceResult::find(std::optional<double> bias, TrainMode mode) const {
  for (const auto& c : cells)
    if (c.bias == bias && c.mode == mode) return &c;
  return nullptr;
}

std::string bias_label(std::optional<double> bias) { return bias ? format_double(*bias) : "balanced"; }

ReproduceResult reproduce(const ReproduceOptions& opt, const ProgressFn& progress) {
  if (opt.seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  ReproduceResult out;
  for (const auto& bias : opt.biases) {
    GenSpec gs = opt.gen;
    gs.bias = bias;
    const Dataset ds = gen_motif_dataset(gs);
    GnnConfig gnn = gnn_config_for(ds, opt.model);
    for (TrainMode mode : opt.modes) {
      ReproduceCell cell;
      cell.bias = bias;
      cell.mode = mode;
      const auto t0 = std::chrono::steady_clock::now();
      for (int s = 1; s <= opt.seeds; ++s) {
        TrainConfig tc = opt.train;
        tc.mode = mode;
        tc.seed = static_cast<std::uint64_t>(s);
        TrainResult res = train(tc, ds, gnn);
        const double acc = res.report.test_accuracy.value_or(0.0) * 100.0;
        cell.seeds.push_back(tc.seed);
        cell.test_accuracy.push_back(acc);
        cell.reports.push_back(std::move(res.report));
        if (progress) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "bias=%s mode=%s seed=%d test=%.2f epochs=%d", bias_label(bias).c_str(),
                        mode_name(mode), s, acc, cell.reports.back().epochs_run);
          progress(buf);
        }
      }
      cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

std::string reproduce_csv(const ReproduceResult& r) {
  std::string out = "bias,mode,seeds,mean_accuracy,std_accuracy,runs\n";
  char buf[64];
  for (const auto& c : r.cells) {
    const MeanStd ms = c.summary();
    out += bias_label(c.bias) + "," + mode_name(c.mode) + "," + std::to_string(c.test_accuracy.size()) + ",";
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,", ms.mean, ms.std);
    out += buf;
    for (std::size_t i = 0; i < c.test_accuracy.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.4f", i ? ";" : "", c.test_accuracy[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string reproduce_table(const ReproduceResult& r) {
  std::vector<std::optional<double>> biases;
  std::vector<TrainMode> modes;
  for (const auto& c : r.cells) {
    if (std::find(biases.begin(), biases.end(), c.bias) == biases.end()) biases.push_back(c.bias);
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) modes.push_back(c.mode);
  }
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-16s", "mode \\ bias");
  out += buf;
  for (const auto& b : biases) {
    std::snprintf(buf, sizeof buf, "%16s", bias_label(b).c_str());
    out += buf;
  }
  out += "\n";
  for (TrainMode m : modes) {
    std::snprintf(buf, sizeof buf, "%-16s", mode_name(m));
    out += buf;
    for (const auto& b : biases) {
      const ReproduceCell* c = r.find(b, m);
      if (!c) {
        std::snprintf(buf, sizeof buf, "%16s", "-");
      } else {
        const MeanStd ms = c->summary();
        char cellbuf[32];
        std::snprintf(cellbuf, sizeof cellbuf, "%.2f±%.2f", ms.mean, ms.std);
        // '±' is two bytes in UTF-8; pad one extra column
        std::snprintf(buf, sizeof buf, "%17s", cellbuf);
      }
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace dcsgl
