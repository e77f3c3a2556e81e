// Copyright 2026 The Shuffled KDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shuffled_kde/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "nlohmann/json.hpp"
#include "shuffled_kde/bitsum.h"
#include "shuffled_kde/classify.h"
#include "shuffled_kde/dataset_io.h"
#include "shuffled_kde/json_text.h"
#include "shuffled_kde/kde_protocol.h"
#include "shuffled_kde/lsq.h"
#include "shuffled_kde/privacy.h"
#include "shuffled_kde/random.h"
#include "shuffled_kde/shuffle_net.h"
#include "shuffled_kde/synth.h"

namespace shuffled_kde {

namespace {

struct ExperimentConfig {
  std::string dataset;
  std::string vocab;
  std::string model;
  std::string queries;
  std::string kernel = "gaussian";
  std::string bitsum = "exact";
  int repetitions = 256;
  std::vector<double> eps = {1.0};
  double delta = 1e-6;
  std::string eps_label = "inf";
  std::string composition = "advanced";
  int trials = 30;
  uint64_t seed = 1;
  std::string out = ".";

  double three_nb_c = 0.2;
  double p_rr = 0.0;
  bool p_rr_set = false;
  double split = 0.5;
  std::string exec_mode = "cells";

  int classes = 0;
  int per_class = 0;
  int dim = 0;
  int test_per_class = 0;
  double separation = 0.0;
  double spread = 0.5;

  int k = 3;
  int decode_class = 0;
  int num_queries = 100;
  bool transcript = false;
  int s = 0;
};

// Parsed enumerations and derived settings shared by the commands.
struct Resolved {
  KernelKind kernel = KernelKind::kGaussian;
  BitsumVariant variant = BitsumVariant::kExact;
  CompositionMode mode = CompositionMode::kAdvanced;
  double eps_label = 0.0;
  BitsumOptions bitsum_options;
  ExecutionMode exec = ExecutionMode::kCellCounts;
};

absl::StatusOr<double> ParseEpsLabel(const std::string& text) {
  const std::string t = absl::AsciiStrToLower(text);
  if (t == "inf" || t == "infinity" || t == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  if (!absl::SimpleAtod(text, &v) || !(v >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "eps-label must be a number >= 0 or 'inf', got '", text, "'"));
  }
  return v;
}

std::string EpsLabelText(double v) {
  return std::isinf(v) ? "inf" : FormatDouble(v);
}

absl::StatusOr<Resolved> Resolve(const ExperimentConfig& cfg) {
  Resolved r;
  absl::StatusOr<KernelKind> kernel = ParseKernelKind(cfg.kernel);
  if (!kernel.ok()) return kernel.status();
  r.kernel = *kernel;
  absl::StatusOr<BitsumVariant> variant = ParseBitsumVariant(cfg.bitsum);
  if (!variant.ok()) return variant.status();
  r.variant = *variant;
  absl::StatusOr<CompositionMode> mode = ParseCompositionMode(cfg.composition);
  if (!mode.ok()) return mode.status();
  r.mode = *mode;
  absl::StatusOr<double> eps_label = ParseEpsLabel(cfg.eps_label);
  if (!eps_label.ok()) return eps_label.status();
  r.eps_label = *eps_label;
  r.bitsum_options.three_nb_c = cfg.three_nb_c;
  if (cfg.p_rr_set) r.bitsum_options.p_rr = cfg.p_rr;
  if (cfg.exec_mode == "cells") {
    r.exec = ExecutionMode::kCellCounts;
  } else if (cfg.exec_mode == "transcript") {
    r.exec = ExecutionMode::kTranscript;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown exec-mode '", cfg.exec_mode,
                     "' (expected cells or transcript)"));
  }
  if (cfg.repetitions < 1) {
    return absl::InvalidArgumentError("I must be >= 1");
  }
  if (cfg.eps.empty()) return absl::InvalidArgumentError("eps list is empty");
  for (double e : cfg.eps) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      return absl::InvalidArgumentError(
          absl::StrCat("every eps must be positive and finite, got ", e));
    }
  }
  if (cfg.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  return r;
}

BudgetSpec MakeBudget(const ExperimentConfig& cfg, const Resolved& r,
                      double eps) {
  return BudgetSpec{eps, cfg.delta, r.mode, r.eps_label, cfg.split};
}

absl::Status RequireSingleEps(const ExperimentConfig& cfg) {
  if (cfg.eps.size() != 1) {
    return absl::InvalidArgumentError(
        "this command takes exactly one eps value");
  }
  return absl::OkStatus();
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Configuration echo carried by every result row.
struct Echo {
  std::string kernel;
  std::string bitsum;
  int repetitions = 0;
  double eps = 0.0;
  double eps_label = 0.0;
  double delta = 0.0;
  std::string mode;
  uint64_t seed = 0;
};

Echo MakeEcho(const ExperimentConfig& cfg, const Resolved& r, double eps) {
  return Echo{KernelKindName(r.kernel),
              BitsumVariantName(r.variant),
              cfg.repetitions,
              eps,
              r.eps_label,
              cfg.delta,
              CompositionModeName(r.mode),
              cfg.seed};
}

Echo ModelEcho(const ClassifierModel& model) {
  const BudgetSpec& b = model.budget();
  return Echo{KernelKindName(model.spec().kind()),
              BitsumVariantName(model.variant()),
              model.class_model(0).repetitions(),
              b.target_eps,
              b.eps_label,
              b.target_delta,
              CompositionModeName(b.mode),
              model.master_seed()};
}

constexpr char kResultHeader[] =
    "kernel,bitsum,I,eps,eps_label,delta,mode,seed,metric,value\n";

void AddRow(std::string& csv, const Echo& e, const std::string& metric,
            double value) {
  absl::StrAppend(&csv, e.kernel, ",", e.bitsum, ",", e.repetitions, ",",
                  FormatDouble(e.eps), ",", EpsLabelText(e.eps_label), ",",
                  FormatDouble(e.delta), ",", e.mode, ",", e.seed, ",", metric,
                  ",", FormatDouble(value), "\n");
}

absl::StatusOr<std::string> OutputPath(const ExperimentConfig& cfg,
                                       const std::string& name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) {
    return absl::PermissionDeniedError(absl::StrCat(
        "cannot create output directory ", cfg.out, ": ", ec.message()));
  }
  return (fs::path(cfg.out) / name).string();
}

absl::Status WriteOutput(const ExperimentConfig& cfg, const std::string& name,
                         const std::string& contents, std::ostream& out) {
  absl::StatusOr<std::string> path = OutputPath(cfg, name);
  if (!path.ok()) return path.status();
  if (absl::Status s = WriteFileAtomic(*path, contents); !s.ok()) return s;
  out << "wrote " << *path << "\n";
  return absl::OkStatus();
}

absl::StatusOr<ClassifierModel> LoadModel(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<ClassifierModel> model =
      ClassifierModel::FromJsonString(*text);
  if (!model.ok()) {
    return absl::Status(model.status().code(),
                        absl::StrCat(path, ": ", model.status().message()));
  }
  return model;
}

absl::StatusOr<BitsumConfig> MakeBitsum(const Resolved& r, int64_t n,
                                        const PerInstanceBudget& per) {
  return BitsumConfig::Create(r.variant, n, per.eps0, per.delta0,
                              r.bitsum_options);
}

// ---------------------------------------------------------------------------

absl::Status CmdGenSynth(const ExperimentConfig& cfg, std::ostream& out) {
  MixtureOptions o;
  o.classes = cfg.classes;
  o.per_class = cfg.per_class;
  o.dim = cfg.dim;
  o.separation = cfg.separation;
  o.spread = cfg.spread;
  o.test_per_class = cfg.test_per_class;
  o.seed = cfg.seed;
  absl::StatusOr<Mixture> mix = GenerateMixture(o);
  if (!mix.ok()) return mix.status();
  if (absl::Status s =
          WriteOutput(cfg, "train.txt", FormatDataset(mix->train), out);
      !s.ok()) {
    return s;
  }
  if (mix->test.has_value()) {
    if (absl::Status s =
            WriteOutput(cfg, "test.txt", FormatDataset(*mix->test), out);
        !s.ok()) {
      return s;
    }
  }
  return WriteOutput(cfg, "synth.json", MixtureMetadataJson(o, mix->centers),
                     out);
}

absl::Status CmdTrain(const ExperimentConfig& cfg, const Resolved& r,
                      std::ostream& out) {
  if (absl::Status s = RequireSingleEps(cfg); !s.ok()) return s;
  absl::StatusOr<LabeledDataset> ds = ReadDatasetFile(cfg.dataset);
  if (!ds.ok()) return ds.status();
  absl::StatusOr<LsqSpec> spec = LsqSpec::Create(r.kernel, ds->vectors.dim());
  if (!spec.ok()) return spec.status();

  TrainOptions options{*spec,
                       cfg.repetitions,
                       r.variant,
                       r.bitsum_options,
                       MakeBudget(cfg, r, cfg.eps[0]),
                       cfg.seed,
                       r.exec};
  absl::StatusOr<ClassifierModel> model = Train(*ds, options);
  if (!model.ok()) return model.status();
  absl::StatusOr<BudgetReport> report =
      TotalBudgetReport(options.budget, spec->s(), cfg.repetitions);
  if (!report.ok()) return report.status();

  const Echo echo = MakeEcho(cfg, r, cfg.eps[0]);
  std::string csv = kResultHeader;
  for (int c = 0; c < model->m(); ++c) {
    AddRow(csv, echo, absl::StrCat("reported_count_class_", c + 1),
           static_cast<double>(model->counts()[c]));
  }
  AddRow(csv, echo, "eps0", report->per_instance.eps0);
  AddRow(csv, echo, "delta0", report->per_instance.delta0);
  AddRow(csv, echo, "composed_eps", report->composed.eps);
  AddRow(csv, echo, "composed_delta", report->composed.delta);
  AddRow(csv, echo, "communication_eps", report->communication_threat.eps);

  if (absl::Status s = WriteOutput(cfg, "model.json", model->ToJson(), out);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteOutput(cfg, "train_results.csv", csv, out);
      !s.ok()) {
    return s;
  }
  out << report->ToString();
  return absl::OkStatus();
}

absl::Status CmdClassify(const ExperimentConfig& cfg, std::ostream& out) {
  absl::StatusOr<ClassifierModel> model = LoadModel(cfg.model);
  if (!model.ok()) return model.status();
  absl::StatusOr<LabeledDataset> ds = ReadDatasetFile(cfg.dataset);
  if (!ds.ok()) return ds.status();
  if (ds->m != model->m() || ds->vectors.dim() != model->spec().dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset (d = ", ds->vectors.dim(), ", m = ", ds->m,
                     ") does not match the model (d = ", model->spec().dim(),
                     ", m = ", model->m(), ")"));
  }
  absl::StatusOr<Evaluation> eval = Evaluate(*model, *ds);
  if (!eval.ok()) return eval.status();

  std::string predictions = "row,label,predicted\n";
  for (size_t u = 0; u < ds->size(); ++u) {
    absl::StrAppend(&predictions, u + 1, ",", ds->labels[u] + 1, ",",
                    eval->predictions[u] + 1, "\n");
  }
  const Echo echo = ModelEcho(*model);
  std::string csv = kResultHeader;
  AddRow(csv, echo, "accuracy", eval->accuracy);
  AddRow(csv, echo, "test_size", static_cast<double>(ds->size()));
  for (int t = 0; t < ds->m; ++t) {
    for (int p = 0; p < ds->m; ++p) {
      AddRow(csv, echo, absl::StrCat("confusion_", t + 1, "_", p + 1),
             static_cast<double>(eval->confusion[t][p]));
    }
  }
  if (absl::Status s = WriteOutput(cfg, "predictions.csv", predictions, out);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteOutput(cfg, "classify_results.csv", csv, out);
      !s.ok()) {
    return s;
  }
  out << "accuracy " << FormatDouble(eval->accuracy) << "\n";
  return absl::OkStatus();
}

absl::Status CmdDecode(const ExperimentConfig& cfg, std::ostream& out) {
  absl::StatusOr<ClassifierModel> model = LoadModel(cfg.model);
  if (!model.ok()) return model.status();
  absl::StatusOr<Vocabulary> vocab =
      ReadVocabularyFile(cfg.vocab, model->spec().dim());
  if (!vocab.ok()) return vocab.status();
  if (cfg.k < 1 || static_cast<size_t>(cfg.k) > vocab->terms.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k must lie in [1, ", vocab->terms.size(), "], got ", cfg.k));
  }
  if (cfg.decode_class < 0 || cfg.decode_class > model->m()) {
    return absl::InvalidArgumentError(
        absl::StrCat("class must lie in [1, ", model->m(),
                     "] (0 for all), got ", cfg.decode_class));
  }
  const int first = cfg.decode_class == 0 ? 0 : cfg.decode_class - 1;
  const int last = cfg.decode_class == 0 ? model->m() : cfg.decode_class;

  std::string csv = "class,rank,term,score\n";
  for (int c = first; c < last; ++c) {
    absl::StatusOr<std::vector<DecodedTerm>> top =
        DecodeClass(*model, c, *vocab, cfg.k);
    if (!top.ok()) return top.status();
    for (size_t rank = 0; rank < top->size(); ++rank) {
      absl::StrAppend(&csv, c + 1, ",", rank + 1, ",",
                      CsvField((*top)[rank].term), ",",
                      FormatDouble((*top)[rank].score), "\n");
    }
  }
  return WriteOutput(cfg, "decode.csv", csv, out);
}

absl::Status CmdKdeEval(const ExperimentConfig& cfg, const Resolved& r,
                        std::ostream& out) {
  absl::StatusOr<LabeledDataset> ds = ReadDatasetFile(cfg.dataset);
  if (!ds.ok()) return ds.status();
  const int d = ds->vectors.dim();
  absl::StatusOr<LsqSpec> spec = LsqSpec::Create(r.kernel, d);
  if (!spec.ok()) return spec.status();

  Points queries(d);
  if (!cfg.queries.empty()) {
    absl::StatusOr<LabeledDataset> q = ReadDatasetFile(cfg.queries);
    if (!q.ok()) return q.status();
    if (q->vectors.dim() != d) {
      return absl::InvalidArgumentError("query file dimension mismatch");
    }
    queries = q->vectors;
  } else {
    if (cfg.num_queries < 1) {
      return absl::InvalidArgumentError("num-queries must be >= 1");
    }
    // Evenly spaced dataset rows.
    const size_t n = ds->size();
    const size_t count = std::min<size_t>(cfg.num_queries, n);
    for (size_t k = 0; k < count; ++k)
      queries.Append(ds->vectors[k * n / count]);
  }
  std::vector<double> exact(queries.size());
  for (size_t k = 0; k < queries.size(); ++k) {
    exact[k] = ExactKde(r.kernel, ds->vectors, queries[k]);
  }

  const int64_t n = static_cast<int64_t>(ds->size());
  std::string summary =
      "kernel,bitsum,I,eps,eps_label,delta,mode,seed,trials,n,queries,eps0,"
      "delta0,bitsum_rmse,empirical_max_rmse,empirical_mean_rmse,"
      "theoretical_bound\n";
  std::string per_query = "eps,query,exact_kde,rmse\n";
  std::string results = kResultHeader;
  for (double eps : cfg.eps) {
    absl::StatusOr<PerInstanceBudget> per =
        SolvePerInstance(MakeBudget(cfg, r, eps), spec->s(), cfg.repetitions);
    if (!per.ok()) return per.status();
    absl::StatusOr<BitsumConfig> bitsum = MakeBitsum(r, n, *per);
    if (!bitsum.ok()) return bitsum.status();
    KdeSetup setup{*spec, cfg.repetitions, *bitsum, r.exec};
    absl::StatusOr<RmseReport> report =
        EmpiricalSupRmse(setup, ds->vectors, queries, cfg.trials, cfg.seed);
    if (!report.ok()) return report.status();
    const double err_pi = RmseTheoretical(*bitsum);
    const double bound = BoundSupRmse(*spec, cfg.repetitions, err_pi, n);

    const Echo echo = MakeEcho(cfg, r, eps);
    absl::StrAppend(&summary, echo.kernel, ",", echo.bitsum, ",",
                    cfg.repetitions, ",", FormatDouble(eps), ",",
                    EpsLabelText(r.eps_label), ",", FormatDouble(cfg.delta),
                    ",", echo.mode, ",", cfg.seed, ",", cfg.trials, ",", n, ",",
                    queries.size(), ",", FormatDouble(per->eps0), ",",
                    FormatDouble(per->delta0), ",", FormatDouble(err_pi), ",",
                    FormatDouble(report->max), ",", FormatDouble(report->mean),
                    ",", FormatDouble(bound), "\n");
    for (size_t k = 0; k < queries.size(); ++k) {
      absl::StrAppend(&per_query, FormatDouble(eps), ",", k + 1, ",",
                      FormatDouble(exact[k]), ",",
                      FormatDouble(report->per_query[k]), "\n");
    }
    AddRow(results, echo, "empirical_max_rmse", report->max);
    AddRow(results, echo, "empirical_mean_rmse", report->mean);
    AddRow(results, echo, "theoretical_bound", bound);
    out << absl::StrFormat(
        "eps %-8g  empirical max RMSE %.6g  mean %.6g  bound %.6g\n", eps,
        report->max, report->mean, bound);
  }
  if (absl::Status s = WriteOutput(cfg, "kde_eval.csv", summary, out);
      !s.ok()) {
    return s;
  }
  if (absl::Status s =
          WriteOutput(cfg, "kde_eval_per_query.csv", per_query, out);
      !s.ok()) {
    return s;
  }
  return WriteOutput(cfg, "kde_eval_results.csv", results, out);
}

absl::Status CmdMeter(const ExperimentConfig& cfg, const Resolved& r,
                      std::ostream& out) {
  if (absl::Status s = RequireSingleEps(cfg); !s.ok()) return s;
  absl::StatusOr<LabeledDataset> ds = ReadDatasetFile(cfg.dataset);
  if (!ds.ok()) return ds.status();
  absl::StatusOr<LsqSpec> spec = LsqSpec::Create(r.kernel, ds->vectors.dim());
  if (!spec.ok()) return spec.status();
  const int64_t n = static_cast<int64_t>(ds->size());
  absl::StatusOr<PerInstanceBudget> per = SolvePerInstance(
      MakeBudget(cfg, r, cfg.eps[0]), spec->s(), cfg.repetitions);
  if (!per.ok()) return per.status();
  absl::StatusOr<BitsumConfig> bitsum = MakeBitsum(r, n, *per);
  if (!bitsum.ok()) return bitsum.status();
  absl::StatusOr<ProtocolInit> init = ProtocolInit::Create(
      *spec, cfg.repetitions, *bitsum, DeriveSeed(cfg.seed, "public"));
  if (!init.ok()) return init.status();

  ExecutionTrace trace;
  const ExecutionMode mode =
      cfg.transcript ? ExecutionMode::kTranscript : r.exec;
  absl::StatusOr<ReleasedModel> model = RunProtocol(
      *init, ds->vectors, DeriveSeed(cfg.seed, "execution"), mode, &trace);
  if (!model.ok()) return model.status();
  const TranscriptMeter& meter = trace.meter;

  // Expected payload count, given each user's rounding probabilities.
  double expected = 0.0;
  std::vector<double> features(spec->q());
  for (size_t u = 0; u < ds->size(); ++u) {
    for (const LsqPair& pair : init->pairs()) {
      EvalFeaturesUnchecked(pair, ds->vectors[u], features);
      for (double v : features) {
        expected +=
            ExpectedMessagesPerUser(*bitsum, RoundingProbability(v, spec->r()));
      }
    }
  }
  expected /= static_cast<double>(n);

  std::string per_user = "user,messages,bits\n";
  int64_t lo = std::numeric_limits<int64_t>::max();
  int64_t hi = 0;
  for (size_t u = 0; u < meter.per_user_message_counts.size(); ++u) {
    const int64_t c = meter.per_user_message_counts[u];
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    absl::StrAppend(&per_user, u + 1, ",", c, ",", c * meter.bits_per_message,
                    "\n");
  }
  const Echo echo = MakeEcho(cfg, r, cfg.eps[0]);
  std::string results = kResultHeader;
  AddRow(results, echo, "bits_per_message", meter.bits_per_message);
  AddRow(results, echo, "total_messages",
         static_cast<double>(meter.total_messages()));
  AddRow(results, echo, "total_bits", static_cast<double>(meter.total_bits));
  AddRow(results, echo, "mean_messages", meter.mean_messages());
  AddRow(results, echo, "expected_mean_messages", expected);
  AddRow(results, echo, "min_messages", static_cast<double>(lo));
  AddRow(results, echo, "max_messages", static_cast<double>(hi));

  if (absl::Status s = WriteOutput(cfg, "meter_per_user.csv", per_user, out);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteOutput(cfg, "meter_results.csv", results, out);
      !s.ok()) {
    return s;
  }
  if (cfg.transcript) {
    std::ostringstream t;
    t << "tag_index,payload_bit\n";
    WriteTranscript(t, trace.shuffled, spec->q());
    if (absl::Status s = WriteOutput(cfg, "transcript.csv", t.str(), out);
        !s.ok()) {
      return s;
    }
  }
  out << absl::StrFormat(
      "users %d  bits/message %d  messages/user mean %.6g (expected %.6g, "
      "min %d, max %d)  total bits %d\n",
      n, meter.bits_per_message, meter.mean_messages(), expected, lo, hi,
      meter.total_bits);
  return absl::OkStatus();
}

absl::Status CmdAccount(const ExperimentConfig& cfg, const Resolved& r,
                        bool write_csv, std::ostream& out) {
  int s = cfg.s;
  if (s == 0) {
    if (r.kernel == KernelKind::kInnerProductIdentity && cfg.dim < 1) {
      return absl::InvalidArgumentError(
          "ip-identity needs --dim (S = d) unless --s is given");
    }
    absl::StatusOr<LsqSpec> spec =
        LsqSpec::Create(r.kernel, std::max(cfg.dim, 1));
    if (!spec.ok()) return spec.status();
    s = spec->s();
  }
  if (s < 1) return absl::InvalidArgumentError("S must be >= 1");

  std::string results = kResultHeader;
  for (double eps : cfg.eps) {
    absl::StatusOr<BudgetReport> report =
        TotalBudgetReport(MakeBudget(cfg, r, eps), s, cfg.repetitions);
    if (!report.ok()) return report.status();
    out << "target eps             " << FormatDouble(eps) << "\n"
        << report->ToString() << "\n";
    const Echo echo = MakeEcho(cfg, r, eps);
    AddRow(results, echo, "eps0", report->per_instance.eps0);
    AddRow(results, echo, "delta0", report->per_instance.delta0);
    AddRow(results, echo, "delta_prime", report->per_instance.delta_prime);
    AddRow(results, echo, "composed_eps", report->composed.eps);
    AddRow(results, echo, "composed_delta", report->composed.delta);
    AddRow(results, echo, "communication_eps",
           report->communication_threat.eps);
  }
  if (write_csv) return WriteOutput(cfg, "account.csv", results, out);
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------

// --config support. The document is a flat JSON object whose keys are long
// option names (underscores may stand in for dashes). Keys the invoked
// subcommand does not know are ignored, so one document can serve several
// subcommands. Options given on the command line take precedence.

absl::StatusOr<std::vector<std::string>> JsonInputs(const std::string& key,
                                                    const nlohmann::json& v) {
  std::vector<std::string> inputs;
  auto scalar = [&](const nlohmann::json& x) -> absl::Status {
    if (x.is_string()) {
      inputs.push_back(x.get<std::string>());
    } else if (x.is_boolean()) {
      inputs.push_back(x.get<bool>() ? "true" : "false");
    } else if (x.is_number_unsigned()) {
      inputs.push_back(std::to_string(x.get<uint64_t>()));
    } else if (x.is_number_integer()) {
      inputs.push_back(std::to_string(x.get<int64_t>()));
    } else if (x.is_number_float()) {
      inputs.push_back(FormatDouble(x.get<double>()));
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("config key '", key, "' has an unsupported value"));
    }
    return absl::OkStatus();
  };
  if (v.is_array()) {
    for (const nlohmann::json& x : v) {
      if (absl::Status s = scalar(x); !s.ok()) return s;
    }
  } else if (absl::Status s = scalar(v); !s.ok()) {
    return s;
  }
  return inputs;
}

absl::Status ApplyJsonConfig(CLI::App* sub, const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  const nlohmann::json doc = nlohmann::json::parse(*text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": config must be a JSON object"));
  }
  for (const auto& [key, value] : doc.items()) {
    if (value.is_null()) continue;
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr && name.size() == 1) {
      opt = sub->get_option_no_throw("-" + name);
    }
    if (opt == nullptr || opt->count() > 0) continue;
    absl::StatusOr<std::vector<std::string>> inputs = JsonInputs(key, value);
    if (!inputs.ok()) return inputs.status();
    try {
      for (const std::string& in : *inputs) opt->add_result(in);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": key '", key, "': ", e.what()));
    }
  }
  return absl::OkStatus();
}

// Options that must be present after the config document is applied.
struct RequiredOptions {
  std::vector<std::pair<CLI::App*, CLI::Option*>> entries;

  void Add(CLI::App* sub, CLI::Option* opt) { entries.emplace_back(sub, opt); }

  absl::Status Check(const CLI::App* sub) const {
    for (const auto& [owner, opt] : entries) {
      if (owner == sub && opt->count() == 0) {
        return absl::InvalidArgumentError(
            absl::StrCat(opt->get_name(), " is required"));
      }
    }
    return absl::OkStatus();
  }
};

void AddSeed(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

void AddOut(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
}

void AddProtocolOptions(CLI::App* sub, ExperimentConfig& c,
                        CLI::Option** p_rr) {
  sub->add_option("--kernel", c.kernel, "gaussian | ip-signed | ip-identity")
      ->capture_default_str();
  sub->add_option("--bitsum", c.bitsum, "exact | rr | 3nb | central-gaussian")
      ->capture_default_str();
  sub->add_option("-I,--repetitions", c.repetitions, "Repetitions I")
      ->capture_default_str();
  sub->add_option("--eps", c.eps, "Target eps (list allowed where noted)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--delta", c.delta, "Target delta")->capture_default_str();
  sub->add_option("--eps-label", c.eps_label,
                  "Label randomized-response eps, or inf")
      ->capture_default_str();
  sub->add_option("--composition", c.composition, "advanced | pure")
      ->capture_default_str();
  sub->add_option("--split", c.split, "Fraction of delta assigned to delta'")
      ->capture_default_str();
  sub->add_option("--three-nb-c", c.three_nb_c, "3NB constant c")
      ->capture_default_str();
  *p_rr = sub->add_option("--p-rr", c.p_rr, "RR flip probability override");
  sub->add_option("--exec-mode", c.exec_mode, "cells | transcript")
      ->capture_default_str();
  AddSeed(sub, c);
  AddOut(sub, c);
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return kExitOk;
  if (IsInfeasible(status)) return kExitInfeasible;
  switch (status.code()) {
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kDataLoss:
    case absl::StatusCode::kInternal:
    case absl::StatusCode::kUnavailable:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  ExperimentConfig cfg;
  RequiredOptions req;
  std::string config_path;
  CLI::App app{"Shuffled differential-privacy kernel density estimation"};
  app.name("shuffled-kde");
  app.require_subcommand(1);

  CLI::App* gen = app.add_subcommand(
      "gen-synth", "Generate a spherical Gaussian mixture dataset");
  req.Add(gen,
          gen->add_option("--classes", cfg.classes, "Number of classes m"));
  req.Add(gen, gen->add_option("--per-class", cfg.per_class,
                               "Training points per class"));
  req.Add(gen, gen->add_option("--dim", cfg.dim, "Dimension d"));
  gen->add_option("--separation", cfg.separation,
                  "Minimum pairwise center angle (radians)")
      ->capture_default_str();
  gen->add_option("--spread", cfg.spread, "Noise scale around centers")
      ->capture_default_str();
  gen->add_option("--test-per-class", cfg.test_per_class,
                  "Held-out points per class")
      ->capture_default_str();
  AddSeed(gen, cfg);
  AddOut(gen, cfg);

  CLI::Option* p_rr = nullptr;

  CLI::App* train = app.add_subcommand("train", "Train a private classifier");
  req.Add(train,
          train->add_option("--dataset", cfg.dataset, "Training dataset"));
  AddProtocolOptions(train, cfg, &p_rr);
  CLI::Option* train_p_rr = p_rr;

  CLI::App* classify =
      app.add_subcommand("classify", "Classify a labeled test set");
  req.Add(classify, classify->add_option("--model", cfg.model, "Model file"));
  req.Add(classify,
          classify->add_option("--dataset", cfg.dataset, "Test dataset"));
  AddOut(classify, cfg);

  CLI::App* decode =
      app.add_subcommand("decode", "Rank vocabulary terms per class");
  req.Add(decode, decode->add_option("--model", cfg.model, "Model file"));
  req.Add(decode, decode->add_option("--vocab", cfg.vocab, "Vocabulary file"));
  decode->add_option("-k", cfg.k, "Terms per class")->capture_default_str();
  decode
      ->add_option("--class", cfg.decode_class,
                   "Class to decode (1-based, 0 for all)")
      ->capture_default_str();
  AddOut(decode, cfg);

  CLI::App* kde = app.add_subcommand(
      "kde-eval", "Empirical supRMSE against the theoretical bound");
  req.Add(kde, kde->add_option("--dataset", cfg.dataset, "Dataset"));
  kde->add_option("--queries", cfg.queries,
                  "Query file in dataset format (default: dataset rows)");
  kde->add_option("--num-queries", cfg.num_queries,
                  "Number of evenly spaced dataset rows used as queries")
      ->capture_default_str();
  kde->add_option("--trials", cfg.trials, "Independent executions")
      ->capture_default_str();
  AddProtocolOptions(kde, cfg, &p_rr);
  CLI::Option* kde_p_rr = p_rr;

  CLI::App* meter =
      app.add_subcommand("meter", "Per-user communication of one execution");
  req.Add(meter, meter->add_option("--dataset", cfg.dataset, "Dataset"));
  meter->add_flag("--transcript", cfg.transcript,
                  "Also write the shuffled transcript");
  AddProtocolOptions(meter, cfg, &p_rr);
  CLI::Option* meter_p_rr = p_rr;

  CLI::App* account = app.add_subcommand("account", "Privacy accounting table");
  account->add_option("--eps", cfg.eps, "Target eps list")
      ->delimiter(',')
      ->capture_default_str();
  account->add_option("--delta", cfg.delta, "Target delta")
      ->capture_default_str();
  account->add_option("--eps-label", cfg.eps_label, "Label eps, or inf")
      ->capture_default_str();
  account->add_option("--composition", cfg.composition, "advanced | pure")
      ->capture_default_str();
  account
      ->add_option("--split", cfg.split, "Fraction of delta assigned to delta'")
      ->capture_default_str();
  account->add_option("-I,--repetitions", cfg.repetitions, "Repetitions I")
      ->capture_default_str();
  account->add_option("--s", cfg.s, "Sparsity S (default: from kernel)");
  account
      ->add_option("--kernel", cfg.kernel, "gaussian | ip-signed | ip-identity")
      ->capture_default_str();
  account->add_option("--dim", cfg.dim, "Dimension d (for ip-identity)");
  CLI::Option* account_out =
      account->add_option("--out", cfg.out, "Write account.csv here");

  const std::vector<CLI::App*> subs = {gen, train, classify, decode,
                                       kde, meter, account};
  for (CLI::App* sub : subs) {
    sub->add_option("--config", config_path,
                    "JSON document with option values");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  CLI::App* invoked = nullptr;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) invoked = sub;
  }
  absl::Status prep = absl::OkStatus();
  if (!config_path.empty()) prep = ApplyJsonConfig(invoked, config_path);
  if (prep.ok()) prep = req.Check(invoked);
  if (!prep.ok()) {
    err << "error: " << prep.message() << "\n";
    return ExitCodeFor(prep);
  }
  cfg.p_rr_set = (train->parsed() && train_p_rr->count() > 0) ||
                 (kde->parsed() && kde_p_rr->count() > 0) ||
                 (meter->parsed() && meter_p_rr->count() > 0);

  absl::Status status;
  if (gen->parsed()) {
    status = CmdGenSynth(cfg, out);
  } else if (classify->parsed()) {
    status = CmdClassify(cfg, out);
  } else if (decode->parsed()) {
    status = CmdDecode(cfg, out);
  } else {
    absl::StatusOr<Resolved> r = Resolve(cfg);
    if (!r.ok()) {
      status = r.status();
    } else if (train->parsed()) {
      status = CmdTrain(cfg, *r, out);
    } else if (kde->parsed()) {
      status = CmdKdeEval(cfg, *r, out);
    } else if (meter->parsed()) {
      status = CmdMeter(cfg, *r, out);
    } else if (account->parsed()) {
      status = CmdAccount(cfg, *r, account_out->count() > 0, out);
    }
  }
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
  }
  return ExitCodeFor(status);
}

}  // namespace shuffled_kde
