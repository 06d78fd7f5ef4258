// SPDX-License-Identifier: Apache-2.0
// aetorque: command-line front end over the C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aetorque.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct OptionSpec {
  const char* flag;
  const char* key;  // config key; nullptr = flag name with '-' -> '_'
  const char* help;
};

struct SwitchSpec {
  const char* flag;
  const char* key;
  bool value;
  const char* help;
};

const std::vector<OptionSpec> kSynthOptions = {
    {"--campaigns", nullptr, "comma-separated campaign ids (default B,C,D,E,F)"},
    {"--sensors", nullptr, "comma-separated sensor ids (default synthetic)"},
    {"--sample-rate-hz", nullptr, "sample rate (default 100000)"},
    {"--excitation-hz", nullptr, "vibrometer frequency (default 120)"},
    {"--seconds-per-level", nullptr, "recording time per torque level (default 1)"},
    {"--n-levels", nullptr, "number of torque classes (default 7)"},
    {"--snr-db", nullptr, "peak-to-peak SNR in dB"},
    {"--bursts-per-cycle", nullptr, "AE bursts per vibration cycle"},
    {"--burst-decay-cycles", nullptr, "burst e-folding time in burst periods"},
    {"--detune-fraction", nullptr, "per-campaign frequency detuning"},
    {"--gain-jitter", nullptr, "per-burst amplitude jitter"},
};

const std::vector<OptionSpec> kPipelineOptions = {
    {"--denoise-level", nullptr, "wavelet denoising depth, 0 = off"},
    {"--block-seconds", nullptr, "denoising block length in seconds"},
    {"--voices", nullptr, "voices per octave (default 12)"},
    {"--octaves", nullptr, "octaves below Nyquist (default 8)"},
};

const std::vector<OptionSpec> kSplitOptions = {
    {"--mode", nullptr, "noshm | loco | gradual"},
    {"--test-campaign", nullptr, "held-out campaign"},
    {"--prior-levels", nullptr, "gradual mode: classes 1..N of the test campaign join training"},
    {"--fractions", nullptr, "noshm train,val,test fractions (default 0.8,0.1,0.1)"},
    {"--loco-train-fraction", nullptr, "train share of the training campaigns (default 0.8)"},
    {"--num-classes", nullptr, "number of classes (default 7)"},
};

const std::vector<OptionSpec> kTrainOptions = {
    {"--epochs", nullptr, "training epochs (default 3)"},
    {"--batch-size", nullptr, "mini-batch size (default 8)"},
    {"--optimizer", nullptr, "adamw | sgdm"},
    {"--sched", "schedule", "onecycle | constant | piecewise"},
    {"--lr-max", nullptr, "maximum learning rate (default 0.01)"},
    {"--loss", nullptr, "cre | cdw1 | cdw2 | cdf | pom1a | pom1b"},
    {"--momentum", nullptr, "SGDM momentum / AdamW beta1"},
    {"--weight-decay", nullptr, "decoupled weight decay"},
    {"--beta2", nullptr, "AdamW beta2"},
    {"--epsilon", nullptr, "AdamW epsilon"},
    {"--div-factor", nullptr, "1cycle initial lr divisor"},
    {"--warmup-fraction", nullptr, "1cycle warm-up share"},
    {"--final-div-factor", nullptr, "1cycle final lr divisor"},
    {"--piecewise-drop", nullptr, "piecewise schedule drop factor"},
    {"--piecewise-period-epochs", nullptr, "piecewise schedule period"},
    {"--val-every", nullptr, "validation interval in iterations"},
    {"--init-scale", nullptr, "weight init standard deviation"},
};

struct StageSpec {
  std::string name;
  std::string description;
  std::vector<OptionSpec> options;
  std::vector<SwitchSpec> switches;
};

std::vector<OptionSpec> concat(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<StageSpec> stage_specs() {
  const OptionSpec in{"--in", nullptr, "input path"};
  const OptionSpec out{"--out", nullptr, "output directory"};
  return {
      {"synth", "Generate synthetic vibrometer and AE campaigns", concat({{out}, kSynthOptions}), {}},
      {"segment",
       "Cut AE streams into vibration cycles",
       {in, out, {"--ae", nullptr, "AE stream (with --vibro)"}, {"--vibro", nullptr, "vibrometer stream"}},
       {{"--no-hanning", "hanning", false, "store segments without the Hanning window"}}},
      {"denoise",
       "Wavelet-denoise a stream or a directory of streams",
       {in, out, {"--level", nullptr, "decomposition depth (default 4)"},
        {"--block-seconds", nullptr, "block length in seconds (default 1)"}},
       {}},
      {"scalogram",
       "Morse CWT scalograms, feature rows and PNG images",
       concat({{in, out, {"--scaling", nullptr, "per_image | fixed"}, {"--range-min", nullptr, "fixed range low"},
                {"--range-max", nullptr, "fixed range high"}},
               {kPipelineOptions[2], kPipelineOptions[3]}}),
       {{"--literal-12-filters", "literal_12_filters", true, "twelve filters in total"},
        {"--no-png", "png", false, "skip PNG images"}}},
      {"dataset", "Write train/val/test manifests", concat({{in, out}, kSplitOptions}),
       {}},
      {"train",
       "Train the reference linear-softmax model",
       concat({{in, out, {"--train", nullptr, "train manifest"}, {"--val", nullptr, "validation manifest"},
                {"--num-classes", nullptr, "number of classes"}},
               kTrainOptions}),
       {}},
      {"eval",
       "Evaluate a model on a test manifest",
       {out, {"--model", nullptr, "model.bin"}, {"--test", nullptr, "test manifest or dataset directory"}},
       {}},
      {"predict",
       "Per-sample predictions",
       {out, {"--model", nullptr, "model.bin"}, {"--test", nullptr, "test manifest or dataset directory"}},
       {}},
      {"sweep",
       "Repeated experiments over denoise level, prior level, sensors, loss or schedule",
       concat({{out, {"--in", nullptr, "directory of streams (default: generate)"},
                {"--kind", nullptr, "denoise | prior | sensors | loss | schedule"},
                {"--levels", nullptr, "denoise levels (default 0..9)"},
                {"--priors", nullptr, "prior levels (default 0..K-1)"},
                {"--repeats", nullptr, "repeats per setting (default 5)"}},
               kSynthOptions, kPipelineOptions, kSplitOptions, kTrainOptions}),
       {{"--no-hanning", "hanning", false, "skip the Hanning window"},
        {"--literal-12-filters", "literal_12_filters", true, "twelve filters in total"}}},
      {"report", "Summary tables and plots from run directories",
       {{"--in", nullptr, "directory with run outputs"}, {"--out", nullptr, "output directory (default --in)"}},
       {}},
  };
}

std::string key_of(const char* flag, const char* key) {
  if (key) return key;
  std::string k = flag + 2;
  for (auto& c : k) {
    if (c == '-') c = '_';
  }
  return k;
}

// Numbers, booleans and JSON arrays keep their type; anything else is a string.
json typed_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded() || v.is_object() || v.is_string() || v.is_null()) return text;
  return v;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// key=value lines ('#' comments), or a run.json written by an earlier run.
json load_config_file(const std::string& path, const std::string& stage) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object()) {
    if (parsed.contains("config") && parsed.contains("stage")) {
      if (parsed["stage"] != stage) {
        throw UsageError(path + " records stage '" + parsed["stage"].get<std::string>() + "', not '" + stage + "'");
      }
      return parsed["config"];
    }
    return parsed;
  }
  json cfg = json::object();
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    for (auto& c : key) {
      if (c == '-') c = '_';
    }
    cfg[key] = typed_value(trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic-emission torque classification pipeline", "aetorque"};
  app.set_version_flag("--version", std::string(aet_version()));
  app.require_subcommand(1);

  const auto specs = stage_specs();
  struct Bound {
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;
    std::string config_path;
    std::string seed;
    std::string jobs;
    bool quiet = false;
  };
  std::map<std::string, Bound> bound;
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.description);
    auto& b = bound[spec.name];
    sub->add_option("--config", b.config_path, "key=value config file or a previous run.json");
    sub->add_option("--seed", b.seed, "random seed (fallback: AE_PIPELINE_SEED, then 0)");
    sub->add_option("--jobs", b.jobs, "worker threads (default: all cores)");
    sub->add_flag("-q,--quiet", b.quiet, "do not print the result summary");
    for (const auto& o : spec.options) sub->add_option(o.flag, b.values[key_of(o.flag, o.key)], o.help);
    for (const auto& s : spec.switches) sub->add_flag(s.flag, b.switches[s.flag], s.help);
    subs[spec.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const StageSpec* spec = nullptr;
  for (const auto& s : specs) {
    if (subs[s.name]->parsed()) spec = &s;
  }
  if (!spec) {
    std::cerr << app.help();
    return 2;
  }
  auto* sub = subs[spec->name];
  auto& b = bound[spec->name];

  json cfg = json::object();
  try {
    if (!b.config_path.empty()) cfg = load_config_file(b.config_path, spec->name);
    for (const auto& o : spec->options) {
      if (sub->count(o.flag) > 0) cfg[key_of(o.flag, o.key)] = typed_value(b.values[key_of(o.flag, o.key)]);
    }
    for (const auto& s : spec->switches) {
      if (b.switches[s.flag]) cfg[s.key] = s.value;
    }
    if (sub->count("--jobs") > 0) cfg["jobs"] = typed_value(b.jobs);
    std::string seed = b.seed;
    if (seed.empty() && !cfg.contains("seed")) {
      const char* env = std::getenv("AE_PIPELINE_SEED");
      if (env && *env) seed = env;
    }
    if (!seed.empty()) {
      const json v = typed_value(seed);
      if (!v.is_number_unsigned()) throw UsageError("seed must be a non-negative integer, got '" + seed + "'");
      cfg["seed"] = v;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  }

  char* result = nullptr;
  const aet_status st = aet_run_stage(spec->name.c_str(), cfg.dump().c_str(), &result);
  if (st != AET_OK) {
    const json err = {{"error", {{"stage", spec->name},
                                 {"code", aet_status_name(st)},
                                 {"status", static_cast<int>(st)},
                                 {"message", aet_last_error()}}}};
    std::cerr << err.dump() << '\n';
    if (st == AET_ERR_INVALID_ARGUMENT) {
      std::cerr << '\n' << sub->help();
      return 2;
    }
    return 1;
  }
  if (!b.quiet && result) std::cout << json::parse(result).dump(2) << '\n';
  aet_string_free(result);
  return 0;
}
