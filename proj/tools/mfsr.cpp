#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfsr/degrade.hpp"
#include "mfsr/experiment.hpp"
#include "mfsr/hash.hpp"
#include "mfsr/imageio.hpp"
#include "mfsr/quality.hpp"
#include "mfsr/random.hpp"
#include "mfsr/run_config.hpp"
#include "mfsr/solver.hpp"
#include "mfsr/testcards.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Degradation {
  int scale = 4;
  int blur_size = 3;
  double blur_sigma = 1.0;
};

void add_degradation_flags(CLI::App* cmd, Degradation& d) {
  cmd->add_option("--scale", d.scale, "Decimation factor")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--blur-size", d.blur_size, "Odd Gaussian blur kernel size")->capture_default_str();
  cmd->add_option("--blur-sigma", d.blur_sigma, "Gaussian blur sigma")->capture_default_str();
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

json input_entry(const fs::path& p) {
  return {{"path", p.string()}, {"fnv1a64", mfsr::hex64(mfsr::fnv1a64_file(p))}};
}

json config_json(const mfsr::RunConfig& rc) {
  json j = json::object();
  for (const auto& [k, v] : rc.entries()) j[k] = v;
  return j;
}

json base_manifest(const std::string& command, std::uint64_t seed) {
  return {{"tool", "mfsr"},
          {"version", kVersion},
          {"command", command},
          {"seed", seed},
          {"rng", mfsr::Rng::kAlgorithm}};
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

mfsr::RunConfig load_run_config(const std::optional<fs::path>& file,
                                const std::vector<std::string>& overrides) {
  mfsr::RunConfig rc;
  if (file) rc.load_file(*file);
  for (const auto& s : overrides) rc.set_assignment(s);
  return rc;
}

bool is_frame_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".imgf" || ext == ".pgm" || ext == ".ppm";
}

std::string frame_name(std::size_t index, std::size_t count, const std::string& ext) {
  const int width = std::max<int>(3, static_cast<int>(std::to_string(count - 1).size()));
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%0*zu", width, index);
  return buf + ext;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  fs::path input;
  fs::path out;
  int k = 16;
  Degradation deg;
  double noise_var = 0.0;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto channels = mfsr::read_channels(a.input);
  const auto blur = mfsr::BlurKernel::gaussian(a.deg.blur_size, a.deg.blur_sigma);
  std::vector<std::vector<mfsr::Frame>> per_channel;
  for (const auto& c : channels)
    per_channel.push_back(mfsr::simulate_stack(c, a.k, a.deg.scale, blur, a.noise_var, a.seed));

  fs::create_directories(a.out);
  const bool colour = channels.size() == 3;
  const std::string ext = colour ? ".ppm" : ".imgf";
  std::vector<mfsr::FrameMotion> motions;
  json frames = json::array();
  for (std::size_t f = 0; f < static_cast<std::size_t>(a.k); ++f) {
    std::vector<mfsr::Image> frame;
    for (const auto& stack : per_channel) frame.push_back(stack[f].image);
    motions.push_back(per_channel.front()[f].motion);
    const auto name = frame_name(f, static_cast<std::size_t>(a.k), ext);
    mfsr::write_channels(frame, a.out / name, colour ? mfsr::ImageFormat::pgm : mfsr::ImageFormat::imgf);
    frames.push_back(name);
  }
  mfsr::write_shifts(motions, a.out / "shifts.txt");

  json m = base_manifest("simulate", a.seed);
  m["inputs"] = {input_entry(a.input)};
  m["params"] = {{"k", a.k},
                 {"scale", a.deg.scale},
                 {"blur_size", a.deg.blur_size},
                 {"blur_sigma", a.deg.blur_sigma},
                 {"noise_var", a.noise_var},
                 {"channels", channels.size()}};
  m["frames"] = frames;
  m["shifts"] = "shifts.txt";
  write_json(m, a.out / "manifest.json");
  std::cerr << "simulate: wrote " << a.k << " frames of " << per_channel.front().front().image.width()
            << 'x' << per_channel.front().front().image.height() << " to " << a.out.string() << '\n';
  return 0;
}

// ---- reconstruct ----------------------------------------------------------

struct ReconstructArgs {
  fs::path frames;
  fs::path shifts;
  fs::path out;
  std::string method = "nltv-lgr";
  std::vector<fs::path> gradient_files;
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  Degradation deg;
  std::optional<fs::path> log;
  std::optional<fs::path> manifest;
  bool timing = false;
};

json iteration_json(std::size_t channel, const mfsr::IterationLog& it) {
  return {{"channel", channel},
          {"iter", it.iter},
          {"objective", number_or_string(it.objective)},
          {"surrogate", number_or_string(it.surrogate)},
          {"z_change", number_or_string(it.z_change)},
          {"pcg_iters", it.pcg_iters},
          {"pcg_residual", number_or_string(it.pcg_residual)},
          {"admm_steps", it.admm_steps},
          {"accepted", it.accepted},
          {"graph_rebuilt", it.graph_rebuilt}};
}

int cmd_reconstruct(const ReconstructArgs& a) {
  const auto ablation = mfsr::parse_ablation(a.method);
  if (!ablation)
    throw std::invalid_argument("unknown method '" + a.method +
                                "' (expected nltv, nltv-lg, nltv-gpt or nltv-lgr)");
  if (mfsr::needs_external_gradient(*ablation) && a.gradient_files.empty())
    throw std::invalid_argument("method " + a.method +
                                " takes its gradient guidance from an external GRDF field; "
                                "pass it with --gradient-file, or use nltv-gpt for internal guidance");
  if (!mfsr::needs_external_gradient(*ablation) && !a.gradient_files.empty())
    std::cerr << "warning: --gradient-file is ignored by method " << a.method << '\n';

  mfsr::RunConfig rc = load_run_config(a.config, a.overrides);
  mfsr::ReconstructionConfig cfg = rc.config();
  cfg.solver.ablation = *ablation;
  cfg.solver.seed = a.seed;

  if (!fs::is_directory(a.frames)) throw std::runtime_error("frames directory not found: " + a.frames.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.frames))
    if (e.is_regular_file() && is_frame_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  const auto motions = mfsr::read_shifts(a.shifts);
  if (files.size() != motions.size())
    throw std::runtime_error("found " + std::to_string(files.size()) + " frames in " + a.frames.string() +
                             " but " + std::to_string(motions.size()) + " shifts in " + a.shifts.string());
  if (files.empty()) throw std::runtime_error("no frames in " + a.frames.string());

  std::vector<std::vector<mfsr::Image>> stacks;  // [channel][frame]
  for (const auto& f : files) {
    auto ch = mfsr::read_channels(f);
    if (stacks.empty()) stacks.resize(ch.size());
    if (ch.size() != stacks.size()) throw std::runtime_error(f.string() + ": channel count differs from frame 0");
    for (std::size_t c = 0; c < ch.size(); ++c) stacks[c].push_back(std::move(ch[c]));
  }
  const std::size_t nch = stacks.size();
  const int hr_w = stacks[0][0].width() * a.deg.scale;
  const int hr_h = stacks[0][0].height() * a.deg.scale;

  std::vector<mfsr::GradientField> fields;
  for (const auto& g : a.gradient_files) fields.push_back(mfsr::read_gradient_field(g, hr_w, hr_h));
  if (!fields.empty() && fields.size() != 1 && fields.size() != nch)
    throw std::invalid_argument("give one --gradient-file for all channels or one per channel");

  const auto blur = mfsr::BlurKernel::gaussian(a.deg.blur_size, a.deg.blur_sigma);
  const fs::path log_path = a.log ? *a.log : fs::path(a.out.string() + ".log.jsonl");
  const fs::path manifest_path = a.manifest ? *a.manifest : fs::path(a.out.string() + ".manifest.json");

  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());

  std::vector<mfsr::Image> outputs;
  json results = json::array();
  for (std::size_t c = 0; c < nch; ++c) {
    std::optional<mfsr::GradientField> ext;
    if (!fields.empty()) ext = fields[fields.size() == 1 ? 0 : c];
    const auto rep = mfsr::reconstruct(stacks[c], motions, blur, a.deg.scale, cfg, ext);
    for (const auto& it : rep.log) log << iteration_json(c, it).dump() << '\n';
    json r = {{"channel", c},
              {"iterations", rep.iterations},
              {"early_stopped", rep.early_stopped},
              {"p", rep.p},
              {"noise_sigma_g", rep.initial_noise.sigma_g},
              {"noise_sigma_l", rep.initial_noise.sigma_l},
              {"noise_gamma", rep.initial_noise.gamma},
              {"eta", rep.eta},
              {"tau", rep.tau},
              {"pcg_warnings", rep.pcg_warnings},
              {"final_objective", number_or_string(rep.objective_trace.back())}};
    if (a.timing)
      r["timings_s"] = {{"init", rep.timings.init_s},     {"guidance", rep.timings.guidance_s},
                        {"graph", rep.timings.graph_s},   {"z_solve", rep.timings.z_solve_s},
                        {"b_solve", rep.timings.b_solve_s}, {"total", rep.timings.total_s}};
    results.push_back(r);
    if (rep.pcg_warnings > 0)
      std::cerr << "warning: channel " << c << ": " << rep.pcg_warnings
                << " z-solves stopped before reaching the PCG tolerance\n";
    std::cerr << "reconstruct: channel " << c << ": " << rep.iterations << " iterations, p = " << rep.p
              << '\n';
    outputs.push_back(rep.z);
  }
  if (!log) throw std::runtime_error("write failed: " + log_path.string());

  mfsr::write_channels(outputs, a.out, nch == 3 ? mfsr::ImageFormat::pgm : mfsr::format_for(a.out));

  json m = base_manifest("reconstruct", a.seed);
  json inputs = json::array();
  for (const auto& f : files) inputs.push_back(input_entry(f));
  inputs.push_back(input_entry(a.shifts));
  for (const auto& g : a.gradient_files) inputs.push_back(input_entry(g));
  if (a.config) inputs.push_back(input_entry(*a.config));
  m["inputs"] = inputs;
  m["method"] = a.method;
  m["params"] = {{"scale", a.deg.scale}, {"blur_size", a.deg.blur_size}, {"blur_sigma", a.deg.blur_sigma}};
  m["config"] = config_json(rc);
  m["overrides"] = a.overrides;
  m["results"] = results;
  m["output"] = {{"fnv1a64", mfsr::hex64(mfsr::fnv1a64_file(a.out))}};
  write_json(m, manifest_path);
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  fs::path truth;
  fs::path test;
  std::optional<fs::path> manifest;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto truth = mfsr::read_channels(a.truth);
  const auto test = mfsr::read_channels(a.test);
  if (truth.size() != test.size())
    throw std::invalid_argument("channel count mismatch: " + std::to_string(truth.size()) + " vs " +
                                std::to_string(test.size()));
  double sq = 0.0, ssim_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    if (!truth[c].same_shape(test[c]))
      throw std::invalid_argument("dimension mismatch: " + std::to_string(truth[c].width()) + "x" +
                                  std::to_string(truth[c].height()) + " vs " +
                                  std::to_string(test[c].width()) + "x" + std::to_string(test[c].height()));
    for (std::size_t i = 0; i < truth[c].size(); ++i) {
      const double d = truth[c][i] - test[c][i];
      sq += d * d;
    }
    n += truth[c].size();
    ssim_sum += mfsr::ssim(truth[c], test[c]);
  }
  const double psnr = truth.size() == 1 ? mfsr::psnr(truth[0], test[0])
                      : sq == 0.0       ? mfsr::kPsnrIdentical
                                        : 10.0 * std::log10(255.0 * 255.0 * static_cast<double>(n) / sq);
  const double ssim = ssim_sum / static_cast<double>(truth.size());
  std::cout << "psnr_db " << num(psnr) << "\nssim " << num(ssim) << '\n';

  if (a.manifest) {
    json m = base_manifest("evaluate", 0);
    m["inputs"] = {input_entry(a.truth), input_entry(a.test)};
    m["results"] = {{"psnr_db", number_or_string(psnr)}, {"ssim", ssim}};
    write_json(m, *a.manifest);
  }
  return 0;
}

// ---- ablate ---------------------------------------------------------------

struct AblateArgs {
  fs::path input_dir;
  fs::path out;
  std::vector<std::string> methods;
  int k = 16;
  Degradation deg;
  double noise_var = 0.0;
  std::uint64_t seed = 0;
  std::optional<fs::path> gradient_dir;
  std::string fixture = "blurred-truth";
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  bool timing = false;
};

int cmd_ablate(const AblateArgs& a) {
  mfsr::RunConfig rc = load_run_config(a.config, a.overrides);
  mfsr::ExperimentSpec spec;
  spec.input_dir = a.input_dir;
  spec.output_dir = a.out;
  spec.scale = a.deg.scale;
  spec.frames = a.k;
  spec.blur_size = a.deg.blur_size;
  spec.blur_sigma = a.deg.blur_sigma;
  spec.noise_var = a.noise_var;
  spec.seed = a.seed;
  spec.gradient_dir = a.gradient_dir;
  const auto fixture = mfsr::parse_fixture(a.fixture);
  if (!fixture) throw std::invalid_argument("unknown fixture '" + a.fixture + "' (expected blurred-truth, truth or bicubic)");
  spec.fixture = *fixture;
  spec.record_timing = a.timing;
  spec.recon = rc.config();
  if (!a.methods.empty()) spec.methods = a.methods;

  const auto table = mfsr::run_experiment(spec, &std::cerr);
  const auto summary = mfsr::summarize(table);
  std::cout << "method,mean_psnr_db,mean_ssim,mean_time_s,count\n";
  for (const auto& s : summary)
    std::cout << s.method << ',' << num(s.mean_psnr) << ',' << num(s.mean_ssim) << ','
              << num(s.mean_time_s) << ',' << s.count << '\n';

  json m = base_manifest("ablate", a.seed);
  json inputs = json::array();
  for (const auto& id : table.images)
    for (const auto& e : fs::directory_iterator(a.input_dir))
      if (e.path().stem() == id && (e.path().extension() == ".pgm" || e.path().extension() == ".imgf"))
        inputs.push_back(input_entry(e.path()));
  if (a.config) inputs.push_back(input_entry(*a.config));
  m["inputs"] = inputs;
  m["skipped"] = table.skipped;
  m["methods"] = spec.methods;
  m["params"] = {{"k", a.k},
                 {"scale", a.deg.scale},
                 {"blur_size", a.deg.blur_size},
                 {"blur_sigma", a.deg.blur_sigma},
                 {"noise_var", a.noise_var},
                 {"gradient_dir", a.gradient_dir ? a.gradient_dir->string() : std::string()},
                 {"fixture", a.gradient_dir ? std::string() : a.fixture},
                 {"timing", a.timing}};
  m["config"] = config_json(rc);
  m["overrides"] = a.overrides;
  m["results_csv"] = {{"path", "results.csv"},
                      {"fnv1a64", mfsr::hex64(mfsr::fnv1a64_file(a.out / "results.csv"))}};
  write_json(m, a.out / "manifest.json");
  return 0;
}

// ---- cards ----------------------------------------------------------------

int cmd_cards(const fs::path& out, int size) {
  fs::create_directories(out);
  for (const auto& [name, img] : mfsr::standard_test_cards(size))
    mfsr::write_image(img, out / (name + ".pgm"), mfsr::ImageFormat::pgm);
  return 0;
}

bool parse_on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw std::invalid_argument("expected on or off, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-frame super-resolution with NLTV and gradient-guidance priors"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Degrade an HR image into a stack of shifted LR frames");
  simulate->add_option("--input", sim.input, "HR image (PGM, PPM or IMGF)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--k", sim.k, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  add_degradation_flags(simulate, sim.deg);
  simulate->add_option("--noise-var", sim.noise_var, "Noise variance on the [0,1] scale")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();

  ReconstructArgs rec;
  std::string rec_timing = "off";
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an HR image from LR frames");
  reconstruct->add_option("--frames", rec.frames, "Directory of LR frames, sorted by name")->required();
  reconstruct->add_option("--shifts", rec.shifts, "Shift sidecar: index dx dy per line")->required()->check(CLI::ExistingFile);
  reconstruct->add_option("--out", rec.out, "Output image (.imgf for float, PGM otherwise)")->required();
  reconstruct->add_option("--method", rec.method, "nltv | nltv-lg | nltv-gpt | nltv-lgr")->capture_default_str();
  reconstruct->add_option("--gradient-file", rec.gradient_files, "External GRDF gradient field")->check(CLI::ExistingFile);
  reconstruct->add_option("--config", rec.config, "key = value config file")->check(CLI::ExistingFile);
  reconstruct->add_option("--set", rec.overrides, "Config override key=value (repeatable, later wins)");
  reconstruct->add_option("--seed", rec.seed, "Seed for the preconditioner probes")->capture_default_str();
  add_degradation_flags(reconstruct, rec.deg);
  reconstruct->add_option("--log", rec.log, "Iteration log (JSON lines); default <out>.log.jsonl");
  reconstruct->add_option("--manifest", rec.manifest, "Manifest path; default <out>.manifest.json");
  reconstruct->add_option("--timing", rec_timing, "Record stage timings in the manifest (on|off)")->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "PSNR and SSIM of a test image against ground truth");
  evaluate->add_option("--truth", ev.truth, "Ground-truth image")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--test", ev.test, "Image to score")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--manifest", ev.manifest, "Optional manifest path");

  AblateArgs ab;
  std::string ab_methods;
  std::string ab_timing = "off";
  auto* ablate = app.add_subcommand("ablate", "Run the experiment harness over a directory of HR images");
  ablate->add_option("--input-dir", ab.input_dir, "Directory of HR images (PGM or IMGF)")->required();
  ablate->add_option("--out", ab.out, "Output directory")->required();
  ablate->add_option("--methods", ab_methods, "Comma list from bicubic,nltv,nltv-lg,nltv-gpt,nltv-lgr (default all)");
  ablate->add_option("--k", ab.k, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  add_degradation_flags(ablate, ab.deg);
  ablate->add_option("--noise-var", ab.noise_var, "Noise variance on the [0,1] scale")->capture_default_str();
  ablate->add_option("--seed", ab.seed, "Experiment seed")->capture_default_str();
  ablate->add_option("--gradient-dir", ab.gradient_dir, "Directory of <image>.grdf fields for nltv-lg/nltv-lgr");
  ablate->add_option("--fixture", ab.fixture, "Stand-in field without --gradient-dir: blurred-truth | truth | bicubic")->capture_default_str();
  ablate->add_option("--config", ab.config, "key = value config file")->check(CLI::ExistingFile);
  ablate->add_option("--set", ab.overrides, "Config override key=value (repeatable, later wins)");
  ablate->add_option("--timing", ab_timing, "Record wall time in the CSV (on|off)")->capture_default_str();

  fs::path cards_out;
  int cards_size = 64;
  auto* cards = app.add_subcommand("cards", "Write the synthetic HR test cards");
  cards->add_option("--out", cards_out, "Output directory")->required();
  cards->add_option("--size", cards_size, "Card width and height")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*reconstruct) {
      rec.timing = parse_on_off(rec_timing);
      return cmd_reconstruct(rec);
    }
    if (*evaluate) return cmd_evaluate(ev);
    if (*ablate) {
      ab.timing = parse_on_off(ab_timing);
      std::stringstream ss(ab_methods);
      for (std::string m; std::getline(ss, m, ',');)
        if (!m.empty()) ab.methods.push_back(m);
      return cmd_ablate(ab);
    }
    if (*cards) return cmd_cards(cards_out, cards_size);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
