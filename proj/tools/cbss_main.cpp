// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "cbss/bss_eval.hpp"
#include "cbss/demos.hpp"
#include "cbss/errors.hpp"
#include "cbss/image.hpp"
#include "cbss/mixsim.hpp"
#include "cbss/pds.hpp"
#include "cbss/source_models.hpp"
#include "cbss/stft.hpp"
#include "cbss/wav.hpp"

#ifndef CBSS_DATA_DIR
#define CBSS_DATA_DIR "data"
#endif

namespace {

using cbss::AudioIoError;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioIoError("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(cbss::fnv1a64(bytes.data(), bytes.size()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw AudioIoError("cannot write " + path.string());
}

fs::path resolve_out_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    const char* env = std::getenv("CBSS_OUT_DIR");
    dir = env != nullptr && *env != '\0' ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& out_dir, const std::string& command, std::uint64_t seed,
                    const json& flags, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "cbss";
  m["version"] = kVersion;
  m["command"] = command;
  m["timestamp"] = iso_timestamp();
  m["seed"] = seed;
  m["flags"] = flags;
  m["inputs"] = json::array();
  for (const auto& p : inputs) m["inputs"].push_back({{"path", p}, {"fnv1a64", file_checksum(p)}});
  m["outputs"] = outputs;
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

json metrics_json(const cbss::Metrics& m) {
  return {{"sdr_db", m.sdr_db}, {"sir_db", m.sir_db}, {"sar_db", m.sar_db}};
}

// Loads every channel of every listed file as one source/reference each.
// All files must agree on the sample rate.
std::vector<Eigen::VectorXd> load_channels(const std::vector<std::string>& paths, double* rate,
                                           long* length) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : paths) {
    const cbss::TimeSignal x = cbss::read_wav(p);
    if (*rate <= 0.0) *rate = x.sample_rate;
    if (x.sample_rate != *rate)
      throw cbss::DimensionError("sample rate mismatch: " + p);
    if (*length < 0) *length = x.length();
    if (x.length() != *length)
      throw cbss::DimensionError("length mismatch: " + p);
    for (auto& c : cbss::channels_of(x)) out.push_back(std::move(c));
  }
  return out;
}

struct SeparateArgs {
  std::string input;
  std::string out_dir;
  std::string model = "ica-l1";
  double lambda = -1.0;  // negative: use the model default
  bool plain = false;
  double mu1 = 1.0, mu2 = 1.0, alpha = 1.75;
  int iters = 2000;
  int fft_size = 1024, hop = 512;
  bool normalize_input = true;
  int log_every = 25;
  std::uint64_t seed = 0;
};

int run_separate(const SeparateArgs& a) {
  const cbss::TimeSignal mixture = cbss::read_wav(a.input);
  if (mixture.channels() < 2)
    throw cbss::DimensionError("separation needs a multichannel mixture; got " +
                               std::to_string(mixture.channels()) + " channel(s)");

  const cbss::PenaltyKind kind = a.model == "iva-l21" ? cbss::PenaltyKind::laplace_iva
                                                      : cbss::PenaltyKind::laplace_ica;
  const double lambda = a.lambda >= 0.0 ? a.lambda : cbss::default_lambda(kind);
  const cbss::LaplaceModel model(cbss::PenaltyModel{kind, lambda});

  cbss::SolverConfig cfg;
  cfg.mu1 = a.mu1;
  cfg.mu2 = a.mu2;
  cfg.alpha = a.alpha;
  cfg.iterations = a.iters;
  cfg.variant = a.plain ? cbss::Variant::plain : cbss::Variant::consistent;
  cfg.normalize_input = a.normalize_input;
  cfg.log_every = a.log_every;

  const cbss::WindowPair win =
      cbss::design_tight_window(cbss::WindowShape::hann, a.fft_size, a.hop);
  const cbss::SeparationResult res = cbss::separate(mixture, model, cfg, win);

  const fs::path dir = resolve_out_dir(a.out_dir);
  std::vector<std::string> outputs;
  for (int m = 0; m < res.sources.channels(); ++m) {
    const std::string name = "source_" + std::to_string(m + 1) + ".wav";
    cbss::write_wav(dir / name,
                    cbss::TimeSignal::from_mono(res.sources.channel(m), mixture.sample_rate));
    outputs.push_back(name);
  }
  {
    std::ofstream csv(dir / "diagnostics.csv", std::ios::binary);
    res.diagnostics.write_csv(csv);
    if (!csv) throw AudioIoError("cannot write " + (dir / "diagnostics.csv").string());
    outputs.push_back("diagnostics.csv");
  }

  const json flags = {{"input", a.input},
                      {"model", a.model},
                      {"lambda", lambda},
                      {"variant", a.plain ? "plain" : "consistent"},
                      {"mu1", a.mu1},
                      {"mu2", a.mu2},
                      {"alpha", a.alpha},
                      {"iters", a.iters},
                      {"fft_size", a.fft_size},
                      {"hop", a.hop},
                      {"normalize_input", a.normalize_input},
                      {"log_every", a.log_every},
                      {"out_dir", dir.string()}};
  write_manifest(dir, "separate", a.seed, flags, {a.input}, outputs);

  std::cout << "objective " << res.diagnostics.rows.front().objective << " -> "
            << res.diagnostics.rows.back().objective << " after " << a.iters << " iterations\n";
  for (const auto& o : outputs) std::cout << "wrote " << (dir / o).string() << "\n";
  return 0;
}

struct MixArgs {
  std::vector<std::string> sources;
  std::string out_dir;
  std::string kind = "instantaneous";
  std::uint64_t seed = 1;
  int taps = 2048;
  double decay_ms = 130.0;
  double max_cond = 10.0;
};

int run_mix(const MixArgs& a) {
  double rate = 0.0;
  long length = -1;
  const std::vector<Eigen::VectorXd> chans = load_channels(a.sources, &rate, &length);
  const int m = static_cast<int>(chans.size());
  if (m < 2) throw cbss::DimensionError("mixing needs at least two source channels");

  cbss::TimeSignal sources;
  sources.sample_rate = rate;
  sources.samples.resize(m, length);
  for (int i = 0; i < m; ++i) sources.samples.row(i) = chans[i].transpose();

  // --decay-ms is the exponential envelope time constant.
  const double decay_samples = a.decay_ms / 1000.0 * rate;
  const cbss::MixSpec spec =
      a.kind == "convolutive"
          ? cbss::make_convolutive_spec(a.seed, m, m, a.taps, decay_samples)
          : cbss::make_instantaneous_spec(a.seed, m, m, a.max_cond);
  const cbss::TimeSignal mixture = cbss::mix(spec, sources);

  const fs::path dir = resolve_out_dir(a.out_dir);
  cbss::write_wav(dir / "mixture.wav", mixture);

  json side;
  side["kind"] = a.kind;
  side["seed"] = a.seed;
  side["channels"] = m;
  side["sample_rate"] = rate;
  side["sources"] = a.sources;
  if (spec.kind == cbss::MixKind::instantaneous) {
    json rows = json::array();
    for (int i = 0; i < m; ++i) {
      json row = json::array();
      for (int j = 0; j < m; ++j) row.push_back(spec.matrix(i, j));
      rows.push_back(row);
    }
    side["matrix"] = rows;
  } else {
    side["taps"] = a.taps;
    side["decay_ms"] = a.decay_ms;
    side["decay_samples"] = decay_samples;
    json rows = json::array();
    for (int i = 0; i < m; ++i) {
      json row = json::array();
      for (int j = 0; j < m; ++j) {
        const auto& r = spec.rirs[i][j];
        row.push_back(hex64(cbss::fnv1a64(r.data(), sizeof(double) * r.size())));
      }
      rows.push_back(row);
    }
    side["rir_checksums"] = rows;
  }
  write_text(dir / "mixture.json", side.dump(2) + "\n");

  const json flags = {{"sources", a.sources}, {"kind", a.kind},       {"seed", a.seed},
                      {"taps", a.taps},       {"decay_ms", a.decay_ms}, {"max_cond", a.max_cond},
                      {"out_dir", dir.string()}};
  write_manifest(dir, "mix", a.seed, flags, a.sources,
                 {"mixture.wav", "mixture.json"});
  std::cout << "wrote " << (dir / "mixture.wav").string() << "\n";
  return 0;
}

struct EvalArgs {
  std::vector<std::string> refs;
  std::vector<std::string> ests;
  std::string mixture;
  int filter_len = 512;
  std::string out_dir;  // empty: report to stdout only
  std::string csv;
};

int run_eval(const EvalArgs& a) {
  double rate = 0.0;
  long length = -1;
  const std::vector<Eigen::VectorXd> refs = load_channels(a.refs, &rate, &length);
  const std::vector<Eigen::VectorXd> ests = load_channels(a.ests, &rate, &length);
  if (refs.size() != ests.size())
    throw cbss::DimensionError("estimate count " + std::to_string(ests.size()) +
                               " does not match reference count " + std::to_string(refs.size()));

  cbss::MetricsReport rep;
  if (!a.mixture.empty()) {
    const cbss::TimeSignal mixture = cbss::read_wav(a.mixture);
    if (mixture.sample_rate != rate || mixture.length() != length)
      throw cbss::DimensionError("mixture shape does not match the references");
    rep = cbss::evaluate_with_baseline(ests, mixture, refs, a.filter_len);
  } else {
    rep = cbss::evaluate(ests, refs, a.filter_len);
  }

  json report;
  report["filter_len"] = a.filter_len;
  report["regularized"] = rep.regularized;
  report["assignment"] = rep.assignment;
  report["per_source"] = json::array();
  for (std::size_t i = 0; i < rep.per_source.size(); ++i) {
    json row = metrics_json(rep.per_source[i]);
    row["estimate"] = i;
    row["reference"] = rep.assignment[i];
    report["per_source"].push_back(row);
  }
  if (!rep.mixture_baseline.empty()) {
    report["mixture_baseline"] = json::array();
    for (const auto& m : rep.mixture_baseline) report["mixture_baseline"].push_back(metrics_json(m));
    report["improvement"] = json::array();
    for (const auto& m : rep.improvement) report["improvement"].push_back(metrics_json(m));
  }
  const std::string text = report.dump(2) + "\n";
  std::cout << text;

  std::string csv_text = "estimate,reference,sdr_db,sir_db,sar_db,sdr_improvement_db,"
                         "sir_improvement_db,sar_improvement_db\n";
  for (std::size_t i = 0; i < rep.per_source.size(); ++i) {
    const auto& p = rep.per_source[i];
    char buf[256];
    if (!rep.improvement.empty()) {
      const auto& d = rep.improvement[i];
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                    rep.assignment[i], p.sdr_db, p.sir_db, p.sar_db, d.sdr_db, d.sir_db, d.sar_db);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,nan,nan,nan\n", i,
                    rep.assignment[i], p.sdr_db, p.sir_db, p.sar_db);
    }
    csv_text += buf;
  }
  if (!a.csv.empty()) write_text(a.csv, csv_text);

  if (!a.out_dir.empty()) {
    const fs::path dir = resolve_out_dir(a.out_dir);
    write_text(dir / "report.json", text);
    write_text(dir / "metrics.csv", csv_text);
    std::vector<std::string> inputs = a.refs;
    inputs.insert(inputs.end(), a.ests.begin(), a.ests.end());
    if (!a.mixture.empty()) inputs.push_back(a.mixture);
    const json flags = {{"refs", a.refs},
                        {"ests", a.ests},
                        {"mix", a.mixture},
                        {"filter_len", a.filter_len},
                        {"out_dir", dir.string()}};
    write_manifest(dir, "eval", 0, flags, inputs, {"report.json", "metrics.csv"});
  }
  return 0;
}

struct DemoConsistencyArgs {
  std::string input = std::string(CBSS_DATA_DIR) + "/speech_a.wav";
  std::string out_dir;
  double dropout = 0.5;
  std::uint64_t seed = 7;
  int fft_size = 1024, hop = 512;
};

int run_demo_consistency(const DemoConsistencyArgs& a) {
  const cbss::TimeSignal x = cbss::read_wav(a.input);
  const cbss::WindowPair win =
      cbss::design_tight_window(cbss::WindowShape::hann, a.fft_size, a.hop);
  const cbss::ConsistencyDemo demo =
      cbss::run_consistency_demo(x.channel(0), x.sample_rate, win, a.dropout, a.seed);

  const fs::path dir = resolve_out_dir(a.out_dir);
  const std::vector<std::pair<std::string, const cbss::Spectrogram*>> images = {
      {"pulse.pgm", &demo.pulse},
      {"pulse_projected.pgm", &demo.pulse_proj},
      {"pulse_projected_twice.pgm", &demo.pulse_proj2},
      {"dropout.pgm", &demo.dropped},
      {"dropout_projected.pgm", &demo.dropped_proj},
      {"dropout_projected_twice.pgm", &demo.dropped_proj2}};
  std::vector<std::string> outputs;
  for (const auto& [name, spec] : images) {
    cbss::write_magnitude_pgm(dir / name, *spec, 0);
    outputs.push_back(name);
  }

  const double tol = 1e-10;
  const bool ok = demo.pulse_fixed_point <= tol && demo.dropped_fixed_point <= tol;
  json report;
  report["pulse_inconsistency"] = demo.pulse_inconsistency;
  report["dropout_inconsistency"] = demo.dropped_inconsistency;
  report["pulse_second_projection_gap"] = demo.pulse_fixed_point;
  report["dropout_second_projection_gap"] = demo.dropped_fixed_point;
  report["fixed_point_tolerance"] = tol;
  report["projection_is_fixed_point"] = ok;
  write_text(dir / "report.json", report.dump(2) + "\n");
  outputs.push_back("report.json");

  const json flags = {{"input", a.input},       {"dropout", a.dropout},
                      {"seed", a.seed},         {"fft_size", a.fft_size},
                      {"hop", a.hop},           {"out_dir", dir.string()}};
  write_manifest(dir, "demo-consistency", a.seed, flags, {a.input}, outputs);

  std::cout << "second projection gap: pulse " << demo.pulse_fixed_point << ", dropout "
            << demo.dropped_fixed_point << (ok ? " (projection is idempotent)\n" : "\n");
  if (!ok) {
    std::cerr << "error: second projection changed the spectrogram beyond " << tol << "\n";
    return 1;
  }
  return 0;
}

struct DemoPermutationArgs {
  std::string input_a = std::string(CBSS_DATA_DIR) + "/speech_a.wav";
  std::string input_b = std::string(CBSS_DATA_DIR) + "/speech_b.wav";
  std::string out_dir;
  std::uint64_t seed = 5;
  int fft_size = 1024, hop = 512;
  int filter_len = 1;
};

int run_demo_permutation(const DemoPermutationArgs& a) {
  const cbss::TimeSignal xa = cbss::read_wav(a.input_a);
  const cbss::TimeSignal xb = cbss::read_wav(a.input_b);
  if (xa.sample_rate != xb.sample_rate)
    throw cbss::DimensionError("the two sources must share a sample rate");
  const long n = std::min(xa.length(), xb.length());
  const cbss::WindowPair win =
      cbss::design_tight_window(cbss::WindowShape::hann, a.fft_size, a.hop);
  const cbss::PermutationDemo demo =
      cbss::run_permutation_demo(xa.channel(0).head(n), xb.channel(0).head(n), xa.sample_rate,
                                 win, a.seed, a.filter_len);

  const fs::path dir = resolve_out_dir(a.out_dir);
  const std::vector<std::pair<std::string, const cbss::Spectrogram*>> columns = {
      {"exclusive", &demo.exclusive}, {"permuted", &demo.scrambled}, {"projected", &demo.projected}};
  std::vector<std::string> outputs;
  for (const auto& [stem, spec] : columns)
    for (int ch = 0; ch < 2; ++ch) {
      const std::string name = stem + "_ch" + std::to_string(ch + 1) + ".pgm";
      cbss::write_magnitude_pgm(dir / name, *spec, ch);
      outputs.push_back(name);
    }

  json report;
  report["leakage_identity"] = demo.leakage_identity;
  report["leakage_scrambled"] = demo.leakage_scrambled;
  report["identity_leakage_below_1e-10"] = demo.leakage_identity <= 1e-10;
  report["scrambled_leakage_at_least_1_percent"] = demo.leakage_scrambled >= 0.01;
  write_text(dir / "report.json", report.dump(2) + "\n");
  outputs.push_back("report.json");

  const json flags = {{"input_a", a.input_a},   {"input_b", a.input_b},
                      {"seed", a.seed},         {"fft_size", a.fft_size},
                      {"hop", a.hop},           {"filter_len", a.filter_len},
                      {"out_dir", dir.string()}};
  write_manifest(dir, "demo-permutation", a.seed, flags, {a.input_a, a.input_b}, outputs);

  std::cout << "cross-channel leakage: identity " << demo.leakage_identity << ", permuted "
            << demo.leakage_scrambled << "\n";
  const bool ok = demo.leakage_identity <= 1e-10 && demo.leakage_scrambled >= 0.01;
  if (!ok) {
    std::cerr << "error: leakage went outside the expected regime\n";
    return 1;
  }
  return 0;
}

int guarded(const std::function<int()>& f) {
  try {
    return f();
  } catch (const AudioIoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cbss::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cbss::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-frequency blind source separation with spectrogram consistency"};
  app.require_subcommand(1);
  int rc = 0;

  SeparateArgs sep;
  auto* cs = app.add_subcommand("separate", "demix a multichannel WAV into source estimates");
  cs->add_option("input", sep.input, "multichannel mixture WAV")->required();
  cs->add_option("--out-dir", sep.out_dir, "output directory (default: $CBSS_OUT_DIR or .)");
  cs->add_option("--model", sep.model, "source model (default ica-l1)")
      ->check(CLI::IsMember({"ica-l1", "iva-l21"}));
  cs->add_option("--lambda", sep.lambda, "penalty weight (default 0.1 for ica-l1, 1 for iva-l21)");
  auto* fp = cs->add_flag("--plain", sep.plain, "skip the consistency projection");
  cs->add_flag("--consistent", "project onto consistent spectrograms (default)")->excludes(fp);
  cs->add_option("--mu1", sep.mu1, "primal step size (default 1)");
  cs->add_option("--mu2", sep.mu2, "dual step size (default 1)");
  cs->add_option("--alpha", sep.alpha, "relaxation in (0,2) (default 1.75)");
  cs->add_option("--iters", sep.iters, "iteration count (default 2000)");
  cs->add_option("--fft-size", sep.fft_size, "FFT length (default 1024)");
  cs->add_option("--hop", sep.hop, "hop size (default 512)");
  cs->add_flag("--normalize-input,!--no-normalize-input", sep.normalize_input,
               "rescale the mixture by its operator norm (default on)");
  cs->add_option("--log-every", sep.log_every, "diagnostics stride (default 25)");
  cs->add_option("--seed", sep.seed, "recorded in the manifest");
  cs->callback([&] { rc = guarded([&] { return run_separate(sep); }); });

  MixArgs mx;
  auto* cm = app.add_subcommand("mix", "mix source WAVs into a synthetic observation");
  cm->add_option("sources", mx.sources, "source WAVs (channels are stacked in order)")
      ->required();
  cm->add_option("--out-dir", mx.out_dir, "output directory (default: $CBSS_OUT_DIR or .)");
  cm->add_option("--kind", mx.kind, "mixing model (default instantaneous)")
      ->check(CLI::IsMember({"instantaneous", "convolutive"}));
  cm->add_option("--seed", mx.seed, "mixing randomness seed (default 1)");
  cm->add_option("--taps", mx.taps, "impulse response length (default 2048)");
  cm->add_option("--decay-ms", mx.decay_ms,
                 "impulse response envelope time constant in ms (default 130)");
  cm->add_option("--max-cond", mx.max_cond, "condition number bound for instantaneous mixing");
  cm->callback([&] { rc = guarded([&] { return run_mix(mx); }); });

  EvalArgs ev;
  auto* ce = app.add_subcommand("eval", "score estimates against references (SDR/SIR/SAR)");
  ce->add_option("--ref", ev.refs, "reference WAVs")->required();
  ce->add_option("--est", ev.ests, "estimate WAVs")->required();
  ce->add_option("--mix", ev.mixture, "mixture WAV for improvement-over-baseline scores");
  ce->add_option("--filter-len", ev.filter_len, "allowed distortion filter taps (default 512)");
  ce->add_option("--out-dir", ev.out_dir, "also write report.json and metrics.csv here");
  ce->add_option("--csv", ev.csv, "write the per-source CSV rows to this file");
  ce->callback([&] { rc = guarded([&] { return run_eval(ev); }); });

  DemoConsistencyArgs dc;
  auto* cd = app.add_subcommand("demo-consistency",
                                "project sparse and dropout spectrograms twice; render images");
  cd->add_option("--input", dc.input, "speech WAV (default: bundled fixture)");
  cd->add_option("--out-dir", dc.out_dir, "output directory (default: $CBSS_OUT_DIR or .)");
  cd->add_option("--dropout", dc.dropout, "dropout rate in [0,1] (default 0.5)");
  cd->add_option("--seed", dc.seed, "pulse/dropout seed (default 7)");
  cd->add_option("--fft-size", dc.fft_size, "FFT length (default 1024)");
  cd->add_option("--hop", dc.hop, "hop size (default 512)");
  cd->callback([&] { rc = guarded([&] { return run_demo_consistency(dc); }); });

  DemoPermutationArgs dp;
  auto* cp = app.add_subcommand("demo-permutation",
                                "scramble exclusive spectrograms per bin, project, report leakage");
  cp->add_option("--input-a", dp.input_a, "first source WAV (default: bundled fixture)");
  cp->add_option("--input-b", dp.input_b, "second source WAV (default: bundled fixture)");
  cp->add_option("--out-dir", dp.out_dir, "output directory (default: $CBSS_OUT_DIR or .)");
  cp->add_option("--seed", dp.seed, "permutation seed (default 5)");
  cp->add_option("--fft-size", dp.fft_size, "FFT length (default 1024)");
  cp->add_option("--hop", dp.hop, "hop size (default 512)");
  cp->add_option("--filter-len", dp.filter_len, "leakage filter taps (default 1)");
  cp->callback([&] { rc = guarded([&] { return run_demo_permutation(dp); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return rc;
}
