#include "cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wavefuse/error.hpp"
#include "wavefuse/fusion_rules.hpp"
#include "wavefuse/imageio.hpp"
#include "wavefuse/metrics.hpp"
#include "wavefuse/network.hpp"
#include "wavefuse/pipeline.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::cli {

namespace fs = std::filesystem;
using imageio::GrayImage;

namespace {

void apply_thread_cap(std::ostream& err) {
  const char* env = std::getenv("WAVEFUSE_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    err << "warning: ignoring WAVEFUSE_THREADS=" << env << " (expected a positive integer)\n";
    return;
  }
  omp_set_num_threads(static_cast<int>(n));
}

struct FuseFlags {
  std::string rule = "combined";
  std::size_t levels = 2;
  std::string wavelet = "db1";
  std::size_t window = 3;
  double match_threshold = 0.6;
  std::size_t block_radius = 1;
  std::string extension = "symmetric";

  fusion::FusionRuleConfig config() const {
    fusion::FusionRuleConfig c;
    c.rule = fusion::parse_rule(rule);
    c.levels = levels;
    c.basis = wavelet;
    c.window = window;
    c.match_threshold = match_threshold;
    c.block_radius = block_radius;
    c.extension = extension == "periodization" ? wavelet::Extension::periodization
                                               : wavelet::Extension::symmetric;
    c.validate();
    return c;
  }
};

void add_fuse_flags(CLI::App* cmd, FuseFlags& f) {
  cmd->add_option("--rule", f.rule, "Fusion rule")
      ->check(CLI::IsMember({"regional", "l1", "l1norm", "combined"}))
      ->capture_default_str();
  cmd->add_option("--levels", f.levels, "Wavelet decomposition levels")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  cmd->add_option("--wavelet", f.wavelet, "Wavelet basis")
      ->check(CLI::IsMember(wavelet::basis_names()))
      ->capture_default_str();
  cmd->add_option("--window", f.window, "Regional-energy window (odd)")->capture_default_str();
  cmd->add_option("--match-threshold", f.match_threshold, "Matching-degree threshold T")
      ->capture_default_str();
  cmd->add_option("--block-radius", f.block_radius, "l1-norm averaging radius")->capture_default_str();
  cmd->add_option("--extension", f.extension, "Border extension")
      ->check(CLI::IsMember({"symmetric", "periodization"}))
      ->capture_default_str();
}

// Both images resized to the smaller common dimensions when they disagree.
void harmonize(GrayImage& a, GrayImage& b, std::ostream& err) {
  if (a.same_dims(b)) return;
  const std::size_t w = std::min(a.width, b.width);
  const std::size_t h = std::min(a.height, b.height);
  err << "warning: input sizes differ (" << a.width << "x" << a.height << " vs " << b.width << "x"
      << b.height << "), resizing both to " << w << "x" << h << "\n";
  a = imageio::resize_bilinear(a, w, h);
  b = imageio::resize_bilinear(b, w, h);
}

fs::path loss_csv_path(const fs::path& model) {
  fs::path p = model;
  p.replace_extension(".loss.csv");
  return p;
}

// ---- train ---------------------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string out = "model.wvfs";
  network::TrainConfig cfg;
};

int do_train(const TrainFlags& f, std::ostream& out) {
  network::TrainConfig cfg = f.cfg;
  cfg.dataset_dir = f.data;
  const fs::path model_path = f.out;
  const fs::path csv_path = loss_csv_path(model_path);
  auto result = network::train(cfg, [&](std::size_t epoch, const network::LossBreakdown& l) {
    out << "epoch " << epoch + 1 << "/" << cfg.epochs << " loss " << l.total << " (mse " << l.pixel
        << ", 1-ssim " << l.ssim_loss << ")\n";
  });
  network::save_model(result.weights, model_path);
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw IoError("cannot write loss CSV: " + csv_path.string());
  csv.precision(17);
  csv << "epoch,total,pixel,ssim_loss\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const auto& h = result.history[i];
    csv << i + 1 << "," << h.total << "," << h.pixel << "," << h.ssim_loss << "\n";
  }
  out << "wrote " << model_path.string() << " after " << result.steps << " steps\n";
  return kExitOk;
}

// ---- fuse ----------------------------------------------------------------------------

struct FuseCmd {
  std::string model, a, b, output;
  FuseFlags flags;
};

int do_fuse(const FuseCmd& f, std::ostream& out, std::ostream& err) {
  const auto config = f.flags.config();
  const auto weights = network::load_model(f.model);
  GrayImage a = imageio::load_grayscale(f.a);
  GrayImage b = imageio::load_grayscale(f.b);
  harmonize(a, b, err);
  imageio::save_grayscale(pipeline::fuse_images(a, b, weights, config), f.output);
  out << "wrote " << f.output << "\n";
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------------------

struct EvalCmd {
  std::string a, b, fused;
  std::string format = "csv";
  std::string batch;
  std::string output;
};

metrics::MetricReport evaluate_files(const std::string& a, const std::string& b, const std::string& f) {
  const GrayImage ia = imageio::load_grayscale(a);
  const GrayImage ib = imageio::load_grayscale(b);
  const GrayImage fi = imageio::load_grayscale(f);
  auto dims = [](const GrayImage& g) { return std::to_string(g.width) + "x" + std::to_string(g.height); };
  if (ia.width != ib.width || ia.height != ib.height || ia.width != fi.width || ia.height != fi.height) {
    throw DimensionError("image dimensions differ: " + a + " is " + dims(ia) + ", " + b + " is " + dims(ib) +
                         ", " + f + " is " + dims(fi));
  }
  auto report = metrics::evaluate_all(ia, ib, fi);
  report.source_a = a;
  report.source_b = b;
  report.fused = f;
  return report;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  return fields;
}

void emit_reports(const std::vector<metrics::MetricReport>& reports, const std::string& format,
                  std::ostream& os, bool header) {
  if (format == "json") {
    if (reports.size() == 1) {
      os << metrics::to_json(reports.front()) << "\n";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      os << metrics::to_json(reports[i]) << (i + 1 < reports.size() ? ",\n" : "\n");
    }
    os << "]\n";
    return;
  }
  if (header) os << metrics::csv_header() << "\n";
  for (const auto& r : reports) os << metrics::csv_row(r) << "\n";
}

int do_eval(const EvalCmd& f, std::ostream& out, std::ostream& err) {
  std::vector<metrics::MetricReport> reports;
  if (!f.batch.empty()) {
    std::ifstream manifest(f.batch);
    if (!manifest) throw IoError("cannot open manifest: " + f.batch);
    const fs::path base = fs::path(f.batch).parent_path();
    auto resolve = [&](const std::string& p) {
      const fs::path path(p);
      return (path.is_absolute() ? path : base / path).string();
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(manifest, line)) {
      ++line_no;
      const auto fields = split_csv(line);
      if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
      if (line_no == 1 && fields[0] == "source_a") continue;
      if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
        err << "warning: manifest line " << line_no << " skipped: expected source_a,source_b,fused\n";
        continue;
      }
      try {
        reports.push_back(evaluate_files(resolve(fields[0]), resolve(fields[1]), resolve(fields[2])));
      } catch (const Error& e) {
        err << "warning: manifest line " << line_no << " skipped: " << e.what() << "\n";
      }
    }
    if (reports.empty()) throw DataError("no manifest row could be evaluated");
  } else {
    reports.push_back(evaluate_files(f.a, f.b, f.fused));
  }

  if (f.output.empty()) {
    emit_reports(reports, f.format, out, true);
  } else {
    // CSV output appends; the header is written only to a new or empty file.
    const bool append = f.format == "csv";
    const bool header = !append || !fs::exists(f.output) || fs::file_size(f.output) == 0;
    std::ofstream file(f.output, append ? std::ios::app : std::ios::trunc);
    if (!file) throw IoError("cannot write " + f.output);
    emit_reports(reports, f.format, file, header);
  }
  return kExitOk;
}

// ---- bench ---------------------------------------------------------------------------

struct BenchCmd {
  std::string pairs;
  std::string model;
  std::vector<std::size_t> levels{1, 2, 3};
  std::vector<std::string> wavelets{"db1", "db2", "db3", "db4"};
  std::vector<std::string> rules{"regional", "l1", "combined"};
  std::string output;
  FuseFlags base;
};

struct ImagePair {
  std::string name;
  GrayImage a, b;
};

std::vector<ImagePair> load_pairs(const fs::path& dir, std::ostream& err) {
  if (!fs::is_directory(dir)) throw IoError("pairs directory not found: " + dir.string());
  std::map<std::string, fs::path> first, second;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string stem = entry.path().stem().string();
    if (stem.size() < 3) continue;
    const std::string tag = stem.substr(stem.size() - 2);
    const std::string name = stem.substr(0, stem.size() - 2);
    if (tag == "_a") first[name] = entry.path();
    if (tag == "_b") second[name] = entry.path();
  }
  std::vector<ImagePair> pairs;
  for (const auto& [name, pa] : first) {
    auto it = second.find(name);
    if (it == second.end()) {
      err << "warning: " << pa.filename().string() << " has no _b partner\n";
      continue;
    }
    ImagePair p{name, imageio::load_grayscale(pa), imageio::load_grayscale(it->second)};
    harmonize(p.a, p.b, err);
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw DataError("no name_a/name_b image pairs in " + dir.string());
  return pairs;
}

std::array<double, metrics::kMetricNames.size()> mean_metrics(
    const std::vector<ImagePair>& pairs, const std::function<GrayImage(const ImagePair&)>& fuse) {
  std::array<double, metrics::kMetricNames.size()> sum{};
  for (const auto& p : pairs) {
    const auto report = metrics::evaluate_all(p.a, p.b, fuse(p));
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += report.values[i];
  }
  for (double& v : sum) v /= static_cast<double>(pairs.size());
  return sum;
}

int do_bench(const BenchCmd& f, std::ostream& out, std::ostream& err) {
  const auto weights = network::load_model(f.model);
  const auto pairs = load_pairs(f.pairs, err);

  std::ostringstream csv;
  csv.precision(17);
  csv << "config,rule,levels,wavelet,pairs";
  for (auto name : metrics::kMetricNames) csv << "," << name;
  csv << "\n";
  auto row = [&](const std::string& label, const std::string& rule, const std::string& levels,
                 const std::string& basis, const std::array<double, 9>& m) {
    csv << label << "," << rule << "," << levels << "," << basis << "," << pairs.size();
    for (double v : m) csv << "," << v;
    csv << "\n";
  };

  row("none", "none", "0", "none",
      mean_metrics(pairs, [&](const ImagePair& p) {
        return pipeline::fuse_images_baseline(p.a, p.b, weights);
      }));
  for (std::size_t levels : f.levels) {
    for (const auto& basis : f.wavelets) {
      for (const auto& rule : f.rules) {
        FuseFlags flags = f.base;
        flags.levels = levels;
        flags.wavelet = basis;
        flags.rule = rule;
        const auto config = flags.config();
        const std::string canonical = fusion::rule_name(config.rule);
        const std::string label = canonical + "-" + basis + "-L" + std::to_string(levels);
        err << "bench " << label << "\n";
        row(label, canonical, std::to_string(levels), basis,
            mean_metrics(pairs, [&](const ImagePair& p) {
              return pipeline::fuse_images(p.a, p.b, weights, config);
            }));
      }
    }
  }

  if (f.output.empty()) {
    out << csv.str();
  } else {
    std::ofstream file(f.output, std::ios::trunc);
    if (!file) throw IoError("cannot write " + f.output);
    file << csv.str();
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wavelet-domain feature fusion with a convolutional autoencoder", "wavefuse"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train the autoencoder on a directory of images");
  train_cmd->add_option("--data", train.data, "Directory of PGM/PNG training images")->required();
  train_cmd->add_option("--out", train.out, "Model file to write")->capture_default_str();
  train_cmd->add_option("--epochs", train.cfg.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--batch", train.cfg.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lr", train.cfg.learning_rate)->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--lambda", train.cfg.lambda_ssim)->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--seed", train.cfg.seed)->capture_default_str();
  train_cmd->add_option("--size", train.cfg.image_size, "Training images are resized to SIZE x SIZE")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--max-steps", train.cfg.max_steps, "Stop after this many steps (0: no cap)")
      ->capture_default_str();

  FuseCmd fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse two source images");
  fuse_cmd->add_option("--model", fuse.model)->required();
  fuse_cmd->add_option("-a", fuse.a, "First source image")->required();
  fuse_cmd->add_option("-b", fuse.b, "Second source image")->required();
  fuse_cmd->add_option("-o,--output", fuse.output, "Fused image (.png or .pgm)")->required();
  add_fuse_flags(fuse_cmd, fuse.flags);

  EvalCmd eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compute fusion quality metrics");
  auto* ea = eval_cmd->add_option("-a", eval.a, "First source image");
  auto* eb = eval_cmd->add_option("-b", eval.b, "Second source image");
  auto* ef = eval_cmd->add_option("--fused", eval.fused, "Fused image");
  auto* batch = eval_cmd->add_option("--batch", eval.batch, "Manifest CSV of source_a,source_b,fused rows");
  eval_cmd->add_option("--format", eval.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  eval_cmd->add_option("--out", eval.output, "Write (CSV: append) to this file instead of stdout");
  ea->excludes(batch);
  eb->excludes(batch);
  ef->excludes(batch);

  BenchCmd bench;
  auto* bench_cmd = app.add_subcommand("bench", "Sweep levels x bases x rules over image pairs");
  bench_cmd->add_option("--pairs", bench.pairs, "Directory of name_a/name_b image pairs")->required();
  bench_cmd->add_option("--model", bench.model)->required();
  bench_cmd->add_option("--levels", bench.levels)->delimiter(',')->check(CLI::Range(1, 16))->capture_default_str();
  bench_cmd->add_option("--wavelets", bench.wavelets)
      ->delimiter(',')
      ->check(CLI::IsMember(wavelet::basis_names()))
      ->capture_default_str();
  bench_cmd->add_option("--rules", bench.rules)
      ->delimiter(',')
      ->check(CLI::IsMember({"regional", "l1", "l1norm", "combined"}))
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.output, "CSV file (default: stdout)");
  bench_cmd->add_option("--window", bench.base.window)->capture_default_str();
  bench_cmd->add_option("--match-threshold", bench.base.match_threshold)->capture_default_str();
  bench_cmd->add_option("--block-radius", bench.base.block_radius)->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*eval_cmd && eval.batch.empty() && (eval.a.empty() || eval.b.empty() || eval.fused.empty())) {
      throw CLI::RequiredError("eval needs -a, -b and --fused, or --batch");
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  apply_thread_cap(err);
  try {
    if (*train_cmd) return do_train(train, out);
    if (*fuse_cmd) return do_fuse(fuse, out, err);
    if (*eval_cmd) return do_eval(eval, out, err);
    if (*bench_cmd) return do_bench(bench, out, err);
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace wavefuse::cli
