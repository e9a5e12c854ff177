#include "mfsr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mfsr/degrade.hpp"
#include "mfsr/gradient.hpp"
#include "mfsr/gradprior.hpp"
#include "mfsr/hash.hpp"
#include "mfsr/imageio.hpp"
#include "mfsr/quality.hpp"
#include "mfsr/resample.hpp"

namespace mfsr {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pgm" || ext == ".imgf";
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

GradientField fixture_field(GradientFixture f, const Image& truth, const BlurKernel& blur,
                            const Image& reference, int scale) {
  switch (f) {
    case GradientFixture::blurred_truth: return discrete_gradient(convolve(truth, blur));
    case GradientFixture::truth: return discrete_gradient(truth);
    case GradientFixture::bicubic: break;
  }
  return upsampled_gradient(reference, scale);
}

}  // namespace

bool is_known_method(std::string_view method) {
  return std::find(std::begin(kAllMethods), std::end(kAllMethods), method) != std::end(kAllMethods);
}

const char* to_string(GradientFixture f) noexcept {
  switch (f) {
    case GradientFixture::blurred_truth: return "blurred-truth";
    case GradientFixture::truth: return "truth";
    case GradientFixture::bicubic: return "bicubic";
  }
  return "unknown";
}

std::optional<GradientFixture> parse_fixture(std::string_view name) {
  for (auto f : {GradientFixture::blurred_truth, GradientFixture::truth, GradientFixture::bicubic})
    if (name == to_string(f)) return f;
  return std::nullopt;
}

std::uint64_t image_seed(std::uint64_t seed, std::string_view image) {
  return seed ^ fnv1a64(image);
}

ResultTable run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  if (spec.methods.empty()) throw std::invalid_argument("no methods requested");
  for (const auto& m : spec.methods)
    if (!is_known_method(m)) throw std::invalid_argument("unknown method: " + m);
  if (spec.scale < 1) throw std::invalid_argument("scale must be >= 1");
  if (spec.frames < 1) throw std::invalid_argument("frame count must be >= 1");
  if (!fs::is_directory(spec.input_dir))
    throw std::runtime_error("input directory not found: " + spec.input_dir.string());

  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(spec.input_dir))
    if (e.is_regular_file() && is_image_file(e.path())) inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());

  fs::create_directories(spec.output_dir);
  const BlurKernel blur = BlurKernel::gaussian(spec.blur_size, spec.blur_sigma);

  ResultTable table;
  table.methods = spec.methods;
  for (const auto& path : inputs) {
    const std::string id = path.stem().string();
    Image truth;
    try {
      truth = read_image(path);
    } catch (const std::exception& e) {
      if (log) *log << "warning: skipping " << path.string() << ": " << e.what() << '\n';
      table.skipped.push_back(id);
      continue;
    }
    if (truth.width() % spec.scale != 0 || truth.height() % spec.scale != 0) {
      if (log)
        *log << "warning: skipping " << path.string() << ": size " << truth.width() << 'x'
             << truth.height() << " is not divisible by scale " << spec.scale << '\n';
      table.skipped.push_back(id);
      continue;
    }
    table.images.push_back(id);

    const auto frames =
        simulate_stack(truth, spec.frames, spec.scale, blur, spec.noise_var, image_seed(spec.seed, id));
    std::vector<Image> stack;
    std::vector<FrameMotion> motions;
    for (const auto& f : frames) {
      stack.push_back(f.image);
      motions.push_back(f.motion);
    }

    std::optional<GradientField> external;
    auto load_external = [&]() -> const std::optional<GradientField>& {
      if (external) return external;
      fs::path grdf;
      if (spec.gradient_dir) {
        grdf = *spec.gradient_dir / (id + ".grdf");
      } else {
        grdf = spec.output_dir / (id + "_fixture.grdf");
        write_gradient_field(fixture_field(spec.fixture, truth, blur, stack.front(), spec.scale), grdf);
      }
      external = read_gradient_field(grdf, truth.width(), truth.height());
      return external;
    };

    for (const auto& method : spec.methods) {
      ResultRow row;
      row.image = id;
      row.method = method;
      const auto t0 = std::chrono::steady_clock::now();
      Image out;
      if (method == "bicubic") {
        out = bicubic_upsample(stack.front(), spec.scale);
      } else {
        ReconstructionConfig cfg = spec.recon;
        cfg.solver.ablation = *parse_ablation(method);
        cfg.solver.seed = image_seed(spec.seed, id);
        const bool ext = needs_external_gradient(cfg.solver.ablation);
        const auto report = reconstruct(stack, motions, blur, spec.scale, cfg,
                                        ext ? load_external() : std::optional<GradientField>{});
        out = report.z;
        row.iterations = report.iterations;
        row.p = report.p;
        row.objective_trace = report.objective_trace;
        row.surrogate_trace = report.surrogate_trace;
      }
      const auto t1 = std::chrono::steady_clock::now();
      if (spec.record_timing) row.time_s = std::chrono::duration<double>(t1 - t0).count();

      const Image q = quantize_8bit(out);
      write_image(q, spec.output_dir / (id + "_" + method + ".pgm"), ImageFormat::pgm);
      const auto m = compare(truth, q);
      row.psnr = m.psnr;
      row.ssim = m.ssim;
      table.rows.push_back(std::move(row));
    }
  }
  if (table.images.empty())
    throw std::runtime_error("no usable images in " + spec.input_dir.string());

  write_csv(table, spec.output_dir / "results.csv");
  return table;
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "image,method,psnr_db,ssim,time_s\n";
  for (const auto& r : table.rows) {
    char t[64];
    std::snprintf(t, sizeof t, "%.3f", r.time_s);
    os << r.image << ',' << r.method << ',' << format_metric(r.psnr) << ','
       << format_metric(r.ssim) << ',' << t << '\n';
  }
  return os.str();
}

void write_csv(const ResultTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv(table);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<MethodSummary> summarize(const ResultTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("summarize: empty result table");
  std::vector<MethodSummary> out;
  for (const auto& m : table.methods) {
    MethodSummary s;
    s.method = m;
    for (const auto& r : table.rows) {
      if (r.method != m) continue;
      s.mean_psnr += r.psnr;
      s.mean_ssim += r.ssim;
      s.mean_time_s += r.time_s;
      ++s.count;
    }
    if (s.count > 0) {
      const double n = static_cast<double>(s.count);
      s.mean_psnr /= n;
      s.mean_ssim /= n;
      s.mean_time_s /= n;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace mfsr
