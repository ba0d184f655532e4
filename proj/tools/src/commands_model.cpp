// Copyright (c) 2026, The posereg Authors. All rights reserved.
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

// train, predict, eval, gradcheck and bench.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "commands.hpp"
#include "frames.hpp"
#include "posereg/checkpoint.hpp"
#include "posereg/error.hpp"
#include "posereg/evaluation.hpp"
#include "posereg/gradcheck.hpp"
#include "posereg/inference.hpp"
#include "posereg/rng.hpp"
#include "posereg/training.hpp"

namespace posereg::cli {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

void add_network_flags(CLI::App* app, std::string& preset, std::string& file) {
  app->add_option("--preset", preset, "Network preset: desk-64 or paper-224")->capture_default_str();
  app->add_option("--network", file, "Layer description file (overrides --preset)");
}

class TrainCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("train", "Train (or finetune) a network on annotated frames");
    app->add_option("--annotations", annotations_, "Training annotation JSONL")->required();
    app->add_option("--val-annotations", val_annotations_, "Validation annotation JSONL for PCK@0.2 logging");
    add_network_flags(app, preset_, network_file_);
    app->add_option("--init", init_, "Start from this checkpoint (its iteration count carries on)");
    app->add_flag("--finetune", finetune_, "Use the finetuning learning rate (1e-3) unless --lr is given");
    app->add_option("--detector", detector_, "Boxes competing with ground truth: none, oracle, file, blob")
        ->check(CLI::IsMember({"none", "oracle", "file", "blob"}))
        ->capture_default_str();
    app->add_option("--detections", detections_, "Detection JSONL for --detector file");
    app->add_option("--batch", batch_, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
    lr_opt_ = app->add_option("--lr", lr_, "Learning rate (default 1e-2, or 1e-3 with --finetune)")
                  ->check(CLI::PositiveNumber);
    app->add_option("--momentum", momentum_, "Momentum")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    app->add_option("--iterations", iterations_, "Iterations to run")->capture_default_str();
    app->add_option("--seed", seed_, "Seed for initialization and batch sampling")->capture_default_str();
    app->add_option("--eval-every", eval_every_, "Validation cadence in iterations (0 = off)")->capture_default_str();
    app->add_option("--print-every", print_every_, "Progress line cadence (0 = quiet)")->capture_default_str();
    app->add_option("--out", out_, "Checkpoint to write")->required();
    app->add_option("--log", log_, "Training log CSV");
    return app;
  }

  int execute(std::ostream& out, std::ostream&) override {
    std::optional<Checkpoint> start;
    if (!init_.empty()) start = load_checkpoint(init_);
    const NetworkConfig net = start ? start->params.config : resolve_network(preset_, network_file_);
    if (start && !network_file_.empty() && resolve_network(preset_, network_file_) != net) {
      throw InvalidInput("--network does not match the network stored in " + init_);
    }
    TrainConfig tc;
    tc.batch = batch_;
    tc.lr = lr_opt_->count() > 0 ? lr_ : (finetune_ ? 1e-3 : 1e-2);
    tc.momentum = momentum_;
    tc.iterations = iterations_;
    tc.seed = seed_;
    tc.eval_every = eval_every_;
    {
      ConfigEcho echo(out, "train");
      echo("annotations", annotations_)("val-annotations", val_annotations_);
      echo("preset", preset_)("network", network_file_);
      echo("init", init_)("finetune", finetune_)("detector", detector_)("detections", detections_);
      echo("batch", tc.batch)("lr", tc.lr)("momentum", tc.momentum)("iterations", tc.iterations);
      echo("seed", tc.seed)("eval-every", tc.eval_every)("out", out_)("log", log_);
    }
    out << "# network\n" << net.canonical_text() << '\n';

    const auto anns = load_annotations(annotations_);
    const FrameStore frames = FrameStore::load(annotations_, anns);
    const auto detector = make_detector(detector_, anns, detections_);
    const auto crops = build_crops(anns, frames, detect_all(detector.get(), frames), net.input_side);
    std::vector<TrainCrop> val;
    if (!val_annotations_.empty()) {
      const auto vanns = load_annotations(val_annotations_);
      val = build_eval_crops(vanns, FrameStore::load(val_annotations_, vanns), net.input_side);
    }
    out << "training crops: " << crops.size() << (val.empty() ? "" : ", validation crops: " + std::to_string(val.size()))
        << '\n';

    const Parameters<float> init = start ? start->params : init_parameters<float>(net, seed_);
    TrainOptions options;
    options.validation = val;
    options.on_row = [&](const LogRow& row) {
      const bool print = (print_every_ > 0 && row.iteration % print_every_ == 0) || row.val_pck.has_value();
      if (!print) return;
      out << "iteration " << row.iteration << " loss " << fmt("%.6g", row.loss);
      if (row.val_pck) out << " val_pck " << fmt("%.2f", *row.val_pck);
      out << '\n' << std::flush;
    };
    const TrainResult result = train(tc, crops, init, start ? start->iteration : 0, options);
    save_checkpoint(result.checkpoint, out_);
    if (!log_.empty()) write_log_csv(log_, result.log);
    out << "saved " << out_ << " at iteration " << result.checkpoint.iteration << '\n';
    return 0;
  }

 private:
  std::string annotations_, val_annotations_, init_, detections_, out_, log_, network_file_;
  std::string preset_ = "desk-64";
  std::string detector_ = "none";
  bool finetune_ = false;
  std::size_t batch_ = 256;
  double lr_ = 1e-2;
  double momentum_ = 0.9;
  std::size_t iterations_ = 1000;
  std::uint64_t seed_ = 0;
  std::size_t eval_every_ = 0;
  std::size_t print_every_ = 100;
  CLI::Option* lr_opt_{};
};

class PredictCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("predict", "Detect people and regress their joints");
    app->add_option("--checkpoint", checkpoint_, "Trained checkpoint")->required();
    app->add_option("--annotations", annotations_, "Annotation JSONL listing the frames (enables --detector oracle)");
    app->add_option("--image", images_, "Frame image path (repeatable)");
    app->add_option("--detector", detector_, "Person detector: oracle, file or blob (default oracle with annotations)")
        ->check(CLI::IsMember({"oracle", "file", "blob"}));
    app->add_option("--detections", detections_, "Detection JSONL for --detector file");
    app->add_option("--out", out_, "Prediction JSONL to write")->required();
    return app;
  }

  int execute(std::ostream& out, std::ostream&) override {
    if (annotations_.empty() == images_.empty()) throw InvalidInput("predict needs exactly one of --annotations and --image");
    std::string kind = detector_;
    if (kind.empty()) kind = annotations_.empty() ? "blob" : "oracle";
    {
      ConfigEcho echo(out, "predict");
      echo("checkpoint", checkpoint_)("annotations", annotations_)("image", images_)("detector", kind);
      echo("detections", detections_)("out", out_);
    }
    const Checkpoint ckpt = load_checkpoint(checkpoint_);
    std::vector<PersonAnnotation> anns;
    FrameStore frames;
    if (!annotations_.empty()) {
      anns = load_annotations(annotations_);
      frames = FrameStore::load(annotations_, anns);
    } else {
      frames = FrameStore::load_paths(images_);
    }
    if (kind == "oracle" && anns.empty()) throw InvalidInput("--detector oracle needs --annotations");
    const auto detector = make_detector(kind, anns, detections_);
    std::vector<FramePrediction> preds;
    std::size_t people = 0;
    for (const auto& name : frames.order()) {
      preds.push_back(predict_frame(ckpt.params, *detector, name, frames.at(name)));
      people += preds.back().people.size();
    }
    write_predictions(out_, preds);
    out << "wrote " << people << " people in " << preds.size() << " frames to " << out_ << '\n';
    return 0;
  }

 private:
  std::string checkpoint_, annotations_, detector_, detections_, out_;
  std::vector<std::string> images_;
};

class EvalCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("eval", "Score predictions (PCK) and detections against ground truth");
    app->add_option("--gt", gt_, "Ground-truth annotation JSONL")->required();
    app->add_option("--pred", pred_, "Prediction JSONL (or annotation JSONL)");
    app->add_option("--detections", detections_, "Detection JSONL to score (false positive/negative rates)");
    app->add_option("--alpha", alpha_, "PCK threshold as a fraction of torso length")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--curve", curve_, "Alphas for a PCK curve (increasing)");
    app->add_option("--curve-out", curve_out_, "CSV file for the curve (alpha,pck)");
    app->add_option("--json", json_out_, "Write the full report as JSON");
    app->add_option("--csv", csv_out_, "Write the per-group table row as CSV");
    app->add_option("--label", label_, "Row label for the CSV table")->capture_default_str();
    return app;
  }

  int execute(std::ostream& out, std::ostream&) override {
    if (pred_.empty() && detections_.empty()) throw InvalidInput("eval needs --pred and/or --detections");
    {
      ConfigEcho echo(out, "eval");
      echo("gt", gt_)("pred", pred_)("detections", detections_)("alpha", alpha_)("curve", curve_);
      echo("curve-out", curve_out_)("json", json_out_)("csv", csv_out_)("label", label_);
    }
    const auto gt = load_annotations(gt_, false);
    if (!pred_.empty()) {
      const auto matched = match_predictions(load_predictions(pred_), gt);
      std::vector<Skeleton> gts;
      gts.reserve(gt.size());
      for (const auto& a : gt) gts.push_back(a.skeleton);
      const PckReport report = pck(matched, gts, alpha_);
      const std::string json = report_json(report);
      const std::string csv = report_csv_header() + '\n' + report_csv_row(report, label_) + '\n';
      out << json << '\n' << csv;
      if (!json_out_.empty()) write_text(json_out_, json + '\n');
      if (!csv_out_.empty()) write_text(csv_out_, csv);
      if (!curve_.empty()) {
        const std::string text = curve_csv(pck_curve(matched, gts, curve_));
        out << text;
        if (!curve_out_.empty()) write_text(curve_out_, text);
      }
    }
    if (!detections_.empty()) {
      const DetectorRates r = detector_eval(load_detections(detections_), gt);
      out << "detections " << r.detections << ", false " << r.false_detections << ", false positive rate "
          << fmt("%.4f", r.false_positive_rate) << "\nground truth " << r.ground_truths << ", missed " << r.missed
          << ", false negative rate " << fmt("%.4f", r.false_negative_rate) << '\n';
    }
    return 0;
  }

 private:
  std::string gt_, pred_, detections_, curve_out_, json_out_, csv_out_;
  std::string label_ = "model";
  double alpha_ = 0.2;
  std::vector<double> curve_;
};

class GradcheckCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("gradcheck", "Compare backpropagation with finite differences (64-bit)");
    add_network_flags(app, preset_, network_file_);
    app->add_option("--seed", o_.seed, "Seed for parameters and the random batch")->capture_default_str();
    app->add_option("--batch", o_.batch, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--epsilon", o_.epsilon, "Central difference step")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--tolerance", o_.tolerance, "Maximum relative error to pass")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    return app;
  }

  int execute(std::ostream& out, std::ostream& err) override {
    const NetworkConfig net = resolve_network(preset_, network_file_);
    {
      ConfigEcho echo(out, "gradcheck");
      echo("preset", preset_)("network", network_file_)("seed", o_.seed)("batch", o_.batch);
      echo("epsilon", o_.epsilon)("tolerance", o_.tolerance);
    }
    const GradcheckResult r = gradcheck(net, o_);
    out << "parameters checked: " << r.checked << "\nkinks re-measured: " << r.kinks
        << "\nmax relative error: " << fmt("%.3e", r.max_rel_error) << "\nworst: " << r.worst
        << "\nseconds: " << fmt("%.1f", r.seconds) << '\n';
    if (r.max_rel_error < o_.tolerance) {
      out << "PASS\n";
      return 0;
    }
    err << "gradient check failed: " << fmt("%.3e", r.max_rel_error) << " >= " << fmt("%.1e", o_.tolerance) << '\n';
    return 3;
  }

 private:
  std::string preset_ = "desk-64";
  std::string network_file_;
  GradcheckOptions o_;
};

class BenchCommand final : public Command {
 public:
  CLI::App* attach(CLI::App& root) override {
    CLI::App* app = root.add_subcommand("bench", "Time single-image forward passes");
    add_network_flags(app, preset_, network_file_);
    app->add_option("--iterations", iterations_, "Timed forward passes (>= 1)")->capture_default_str();
    app->add_option("--warmup", warmup_, "Untimed passes first")->capture_default_str();
    app->add_option("--seed", seed_, "Seed for the random parameters")->capture_default_str();
    return app;
  }

  int execute(std::ostream& out, std::ostream& err) override {
    if (iterations_ == 0) {
      err << "error: --iterations must be at least 1\n";
      return 1;
    }
    const NetworkConfig net = resolve_network(preset_, network_file_);
    {
      ConfigEcho echo(out, "bench");
      echo("preset", preset_)("network", network_file_)("iterations", iterations_);
      echo("warmup", warmup_)("seed", seed_);
    }
    const Parameters<float> params = init_parameters<float>(net, seed_);
    Shape shape = net.input_shape();
    shape.insert(shape.begin(), 1);
    Tensor<float> input(shape);
    Rng rng(seed_);
    for (float& v : input) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (std::size_t i = 0; i < warmup_; ++i) (void)predict(params, input);
    std::vector<double> ms;
    for (std::size_t i = 0; i < iterations_; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)predict(params, input);
      ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
    double var = 0;
    for (double v : ms) var += (v - mean) * (v - mean);
    var /= ms.size();
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                            : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    out << "parameters: " << params.count() << "\nforward ms: mean " << fmt("%.3f", mean) << ", median "
        << fmt("%.3f", median) << ", stddev " << fmt("%.3f", std::sqrt(var)) << ", min " << fmt("%.3f", sorted.front())
        << ", max " << fmt("%.3f", sorted.back()) << "\nreference: 16 ms per forward pass on a GPU (published figure)\n";
    return 0;
  }

 private:
  std::string preset_ = "desk-64";
  std::string network_file_;
  std::size_t iterations_ = 50;
  std::size_t warmup_ = 3;
  std::uint64_t seed_ = 0;
};

}  // namespace

std::unique_ptr<Command> make_train_command() { return std::make_unique<TrainCommand>(); }
std::unique_ptr<Command> make_predict_command() { return std::make_unique<PredictCommand>(); }
std::unique_ptr<Command> make_eval_command() { return std::make_unique<EvalCommand>(); }
std::unique_ptr<Command> make_gradcheck_command() { return std::make_unique<GradcheckCommand>(); }
std::unique_ptr<Command> make_bench_command() { return std::make_unique<BenchCommand>(); }

}  // namespace posereg::cli
