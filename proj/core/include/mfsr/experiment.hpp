#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfsr/solver.hpp"

namespace mfsr {

/// Methods compared by the experiment harness: "bicubic" plus the ablations.
inline constexpr std::string_view kAllMethods[] = {"bicubic", "nltv", "nltv-lg", "nltv-gpt",
                                                   "nltv-lgr"};

bool is_known_method(std::string_view method);

/// Stand-in for a learned HR gradient estimate when no gradient directory is
/// given. blurred_truth is the gradient of the ground truth seen through the
/// degradation blur, truth the exact ground-truth gradient; bicubic uses only
/// the reference frame.
enum class GradientFixture { blurred_truth, truth, bicubic };

const char* to_string(GradientFixture f) noexcept;
std::optional<GradientFixture> parse_fixture(std::string_view name);

struct ExperimentSpec {
  std::filesystem::path input_dir;
  int scale = 4;
  int frames = 16;
  int blur_size = 3;
  double blur_sigma = 1.0;
  double noise_var = 0.0;
  std::vector<std::string> methods{kAllMethods, kAllMethods + 5};
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  /// Directory holding <image>.grdf fields for nltv-lg and nltv-lgr. When
  /// absent, `fixture` is written to <output_dir>/<image>_fixture.grdf and
  /// read back.
  std::optional<std::filesystem::path> gradient_dir;
  GradientFixture fixture = GradientFixture::blurred_truth;
  bool record_timing = true;
  ReconstructionConfig recon;
};

struct ResultRow {
  std::string image;
  std::string method;
  double psnr = 0.0;
  double ssim = 0.0;
  double time_s = 0.0;
  // Not written to the CSV.
  int iterations = 0;
  double p = 2.0;
  std::vector<double> objective_trace;
  std::vector<double> surrogate_trace;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<std::string> methods;  // column order
  std::vector<std::string> images;   // processed images, sorted
  std::vector<std::string> skipped;  // unreadable or unusable inputs
};

struct MethodSummary {
  std::string method;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_time_s = 0.0;
  std::size_t count = 0;
};

/// Per-image seed, independent of processing order.
std::uint64_t image_seed(std::uint64_t seed, std::string_view image);

/// Simulates a stack per input image, reconstructs with every method, scores
/// the 8-bit outputs against the input and writes results.csv plus
/// <image>_<method>.pgm into output_dir. Warnings go to `log` when non-null.
ResultTable run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

/// Header image,method,psnr_db,ssim,time_s. time_s is 0 when timing is off.
std::string to_csv(const ResultTable& table);
void write_csv(const ResultTable& table, const std::filesystem::path& path);

/// Mean metrics per method in table column order; throws on an empty table.
std::vector<MethodSummary> summarize(const ResultTable& table);

}  // namespace mfsr
