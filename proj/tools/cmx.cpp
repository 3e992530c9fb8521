#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "cmx/classify.hpp"
#include "cmx/distances.hpp"
#include "cmx/engine.hpp"
#include "cmx/error.hpp"
#include "cmx/image.hpp"
#include "cmx/lossy.hpp"
#include "cmx/ppm.hpp"
#include "cmx/service.hpp"

namespace fs = std::filesystem;
using namespace cmx;

namespace {

struct ModelFlags {
  int level = Config::kDefaultLevel;
  bool ekf = false;
  std::string config_file;

  void add_to(CLI::App* app) {
    app->add_option("--level", level, "memory level: 2^(16+N) counters per context model")
        ->check(CLI::Range(0, Config::kMaxLevel));
    app->add_flag("--ekf", ekf, "EKF output layer instead of SGD");
    app->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  }

  Config build() const {
    Config c = Config::for_level(level);
    if (!config_file.empty()) {
      const auto text = read_file(config_file);
      c = Config::parse({reinterpret_cast<const char*>(text.data()), text.size()});
    }
    if (ekf) c.second_layer = SecondLayer::kEkf;
    return c;
  }
};

std::vector<fs::path> files_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool looks_like_pgm(const std::vector<std::uint8_t>& b) {
  return b.size() > 2 && b[0] == 'P' && (b[1] == '2' || b[1] == '5');
}

// Shapes in PGM files become their ray series; anything else is used as is.
Document load_document(const fs::path& p, int measurements) {
  auto bytes = read_file(p);
  if (looks_like_pgm(bytes)) return shape_to_series(decode_pnm(bytes), measurements);
  return bytes;
}

int run_classify(const fs::path& train_dir, const fs::path& test_dir, const std::string& method, int measurements,
                 const Config& config) {
  TrainingSet classes;
  for (const auto& e : fs::directory_iterator(train_dir)) {
    if (!e.is_directory()) continue;
    auto& docs = classes[e.path().filename().string()];
    for (const auto& f : files_in(e.path())) docs.push_back(load_document(f, measurements));
  }

  // Test files either sit in per-class subdirectories (truth known) or flat.
  std::vector<std::pair<fs::path, std::string>> tests;
  for (const auto& f : files_in(test_dir)) tests.emplace_back(f, "");
  for (const auto& e : fs::directory_iterator(test_dir)) {
    if (!e.is_directory()) continue;
    for (const auto& f : files_in(e.path())) tests.emplace_back(f, e.path().filename().string());
  }
  std::sort(tests.begin(), tests.end());

  std::optional<SmdlClassifier> smdl;
  if (method == "smdl") smdl = SmdlClassifier::train(classes, config);

  std::map<std::string, std::map<std::string, int>> confusion;
  int correct = 0, labeled = 0;
  for (const auto& [path, truth] : tests) {
    const Document doc = load_document(path, measurements);
    const Scored s = method == "smdl"   ? smdl->classify(doc)
                     : method == "amdl" ? amdl_classify(classes, doc, config)
                                        : bcn_classify(classes, doc, config);
    std::cout << path.string() << '\t' << s.label << '\n';
    if (!truth.empty()) {
      ++confusion[truth][s.label];
      ++labeled;
      correct += truth == s.label;
    }
  }
  if (labeled > 0) {
    std::cout << "\nconfusion (rows: true, columns: predicted)\n";
    std::cout << std::string(12, ' ');
    for (const auto& [label, _] : classes) std::printf("%12s", label.c_str());
    std::cout << '\n';
    for (const auto& [truth, row] : confusion) {
      std::printf("%12s", truth.c_str());
      for (const auto& [label, _] : classes) {
        const auto it = row.find(label);
        std::printf("%12d", it == row.end() ? 0 : it->second);
      }
      std::cout << '\n';
    }
    std::printf("accuracy %.4f (%d/%d)\n", static_cast<double>(correct) / labeled, correct, labeled);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cmx: context-mixing compressor, PPM baseline, compression distances, classification and lossy images"};
  app.require_subcommand(1);

  // compress / decompress
  auto* compress_cmd = app.add_subcommand("compress", "compress a file");
  std::string in_path, out_path;
  ModelFlags model;
  int ppm_k = -1;
  compress_cmd->add_option("in", in_path)->required()->check(CLI::ExistingFile);
  compress_cmd->add_option("out", out_path)->required();
  compress_cmd->add_option("--ppm", ppm_k, "use the PPM baseline of order K instead")->check(CLI::Range(0, 16));
  model.add_to(compress_cmd);

  auto* decompress_cmd = app.add_subcommand("decompress", "decompress a CMX1 archive");
  decompress_cmd->add_option("in", in_path)->required()->check(CLI::ExistingFile);
  decompress_cmd->add_option("out", out_path)->required();
  std::string decompress_config;
  decompress_cmd->add_option("--config", decompress_config, "config file used at compression")
      ->check(CLI::ExistingFile);

  // entropy / predict / ppm-entropy
  auto* entropy_cmd = app.add_subcommand("entropy", "adaptive cross entropy in bits/byte");
  std::vector<std::string> train_files;
  entropy_cmd->add_option("file", in_path)->required()->check(CLI::ExistingFile);
  entropy_cmd->add_option("--train", train_files, "files to train on first")->check(CLI::ExistingFile);
  ModelFlags entropy_model;
  entropy_model.add_to(entropy_cmd);

  auto* predict_cmd = app.add_subcommand("predict", "train, then print the most likely continuation");
  int n_chars = 40;
  std::string prompt;
  predict_cmd->add_option("--train", train_files, "files to train on")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("-n", n_chars, "characters to predict")->check(CLI::Range(0, 100000));
  predict_cmd->add_option("--prompt", prompt, "text fed after training");
  ModelFlags predict_model;
  predict_model.add_to(predict_cmd);

  auto* ppm_cmd = app.add_subcommand("ppm-entropy", "PPM cross entropy in bits/byte");
  int k = 5;
  ppm_cmd->add_option("file", in_path)->required()->check(CLI::ExistingFile);
  ppm_cmd->add_option("-k", k, "maximum context order")->check(CLI::Range(0, 16));

  // dist
  auto* dist_cmd = app.add_subcommand("dist", "compression distance between two files");
  std::string metric, file_b;
  dist_cmd->add_option("metric", metric, "c | e1 | e2 | ncd | cdm")->required();
  dist_cmd->add_option("a", in_path)->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("b", file_b)->required()->check(CLI::ExistingFile);
  ModelFlags dist_model;
  dist_model.add_to(dist_cmd);

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "compression-based classification");
  std::string train_dir, test_dir, method = "smdl";
  int measurements = 40;
  classify_cmd->add_option("--train", train_dir, "directory with one subdirectory per class")
      ->required()
      ->check(CLI::ExistingDirectory);
  classify_cmd->add_option("--test", test_dir, "test files, optionally in per-class subdirectories")
      ->required()
      ->check(CLI::ExistingDirectory);
  classify_cmd->add_option("--method", method)->check(CLI::IsMember({"smdl", "amdl", "bcn"}));
  classify_cmd->add_option("--measurements", measurements, "rays per PGM shape")->check(CLI::Range(1, 100000));
  ModelFlags classify_model;
  classify_model.level = 2;
  classify_model.add_to(classify_cmd);

  // lossy
  auto* ltrain_cmd = app.add_subcommand("lossy-train", "learn a k-means patch filter bank from PGM/PPM images");
  int n_filters = 256, iters = 50;
  std::uint64_t seed = 1;
  ltrain_cmd->add_option("dir", in_path)->required()->check(CLI::ExistingDirectory);
  ltrain_cmd->add_option("-k", n_filters)->check(CLI::Range(1, 256));
  ltrain_cmd->add_option("--seed", seed);
  ltrain_cmd->add_option("--iters", iters)->check(CLI::Range(1, 10000));
  ltrain_cmd->add_option("-o", out_path, "bank file")->required();

  auto* lenc_cmd = app.add_subcommand("lossy-encode", "encode a PGM/PPM image with a filter bank");
  std::string bank_path;
  lenc_cmd->add_option("in", in_path)->required()->check(CLI::ExistingFile);
  lenc_cmd->add_option("bank", bank_path)->required()->check(CLI::ExistingFile);
  lenc_cmd->add_option("out", out_path)->required();
  ModelFlags lossy_model;
  lossy_model.level = 2;
  lossy_model.add_to(lenc_cmd);

  auto* ldec_cmd = app.add_subcommand("lossy-decode", "decode to PGM/PPM");
  ldec_cmd->add_option("in", in_path)->required()->check(CLI::ExistingFile);
  ldec_cmd->add_option("bank", bank_path)->required()->check(CLI::ExistingFile);
  ldec_cmd->add_option("out", out_path)->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "JSON-over-HTTP prediction service");
  int port = 8371;
  std::string host = "127.0.0.1";
  int idle_minutes = 15;
  serve_cmd->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--idle-minutes", idle_minutes)->check(CLI::Range(1, 100000));
  ModelFlags serve_model;
  serve_model.level = 2;
  serve_model.add_to(serve_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compress_cmd) {
      const auto data = read_file(in_path);
      write_file(out_path, ppm_k >= 0 ? ppm_compress(data, ppm_k) : compress(data, model.build()));
    } else if (*decompress_cmd) {
      const auto archive = read_file(in_path);
      const Archive header = Archive::parse(archive);
      std::vector<std::uint8_t> data;
      if (header.flags & Archive::kFlagPpm) {
        data = ppm_decompress(archive);
      } else if (!decompress_config.empty()) {
        const auto text = read_file(decompress_config);
        data = decompress(archive, Config::parse({reinterpret_cast<const char*>(text.data()), text.size()}));
      } else {
        data = decompress(archive);
      }
      write_file(out_path, data);
    } else if (*entropy_cmd) {
      Predictor p(entropy_model.build());
      for (const auto& f : train_files) p.train(read_file(f));
      std::printf("%.6f\n", p.cross_entropy_of(read_file(in_path)));
    } else if (*predict_cmd) {
      Predictor p(predict_model.build());
      for (const auto& f : train_files) p.train(read_file(f));
      p.train(as_bytes(prompt));
      std::cout << prompt << '|' << p.predict_next_chars(n_chars) << '\n';
    } else if (*ppm_cmd) {
      std::printf("%.6f\n", ppm_entropy(read_file(in_path), k));
    } else if (*dist_cmd) {
      const EngineCompressor c(dist_model.build());
      std::printf("%.6f\n", distance(parse_metric(metric), c, read_file(in_path), read_file(file_b)));
    } else if (*classify_cmd) {
      return run_classify(train_dir, test_dir, method, measurements, classify_model.build());
    } else if (*ltrain_cmd) {
      std::vector<Patch> patches;
      int channels = -1;
      for (const auto& f : files_in(in_path)) {
        const Image img = read_pnm(f);
        if (channels < 0) channels = img.channels;
        if (img.channels != channels) throw Error(ErrorCode::kInvalidInput, "mixed gray and color images");
        auto p = extract_patches(img);
        patches.insert(patches.end(), p.begin(), p.end());
      }
      if (channels < 0) throw Error(ErrorCode::kInvalidInput, "no images in " + in_path);
      const KMeansResult r = learn_filters(patches, n_filters, iters, seed, 6, channels);
      write_file(out_path, r.bank.serialize());
      std::fprintf(stderr, "%zu patches, %d filters, %d iterations, objective %.1f\n", patches.size(), r.bank.k(),
                   r.iterations, r.objective.back());
    } else if (*lenc_cmd) {
      const FilterBank bank = FilterBank::parse(read_file(bank_path));
      write_file(out_path, lossy_encode(read_pnm(in_path), bank, lossy_model.build()));
    } else if (*ldec_cmd) {
      const FilterBank bank = FilterBank::parse(read_file(bank_path));
      write_pnm(out_path, lossy_decode(read_file(in_path), bank));
    } else if (*serve_cmd) {
      ServiceOptions opts;
      if (const char* dir = std::getenv("CMX_CORPUS_DIR")) opts.corpus_dir = dir;
      opts.idle_timeout = std::chrono::minutes(idle_minutes);
      opts.config = serve_model.build();
      SessionManager manager(opts);
      std::fprintf(stderr, "listening on %s:%d, corpora from %s\n", host.c_str(), port, opts.corpus_dir.c_str());
      run_server(manager, host, port);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "cmx: %s (%s)\n", e.what(), to_string(e.code()));
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cmx: %s\n", e.what());
    return 1;
  }
  return 0;
}
