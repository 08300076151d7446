// leafid: command-line front end for leaf preprocessing, feature extraction,
// training, classification, evaluation and the annotation service.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "leafid/annotation.hpp"
#include "leafid/features.hpp"
#include "leafid/image_io.hpp"
#include "leafid/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

void write_json(const fs::path& path, const json& j) {
  leafid::fsutil::write_atomic(path, j.dump(2) + "\n");
}

int run_preprocess(const std::string& image, const std::string& out, double level) {
  leafid::features::FeatureConfig cfg;
  cfg.level = level;
  const auto pre = leafid::features::preprocess(leafid::io::read_rgb(image), cfg);
  fs::create_directories(out);
  leafid::io::write_gray_png(fs::path(out) / "gray.png", pre.gray);
  leafid::io::write_gray_png(fs::path(out) / "mask.png", leafid::io::render_mask(pre.mask));
  leafid::io::write_gray_png(fs::path(out) / "margin.png", leafid::io::render_mask(pre.margin));
  return kOk;
}

int run_extract(const std::string& image, const std::string& terminals, double tau, const std::string& out) {
  leafid::features::FeatureConfig cfg;
  cfg.tau = tau;
  const auto t = leafid::pipeline::read_terminals(terminals);
  leafid::features::FeatureRecord rec{fs::path(image).stem().string(),
                                      leafid::pipeline::extract_file(image, t, cfg), std::nullopt};
  write_json(out, json(rec));
  return kOk;
}

int run_train(const std::string& manifest, const std::string& out, double spread, int components, double level,
              double tau) {
  leafid::pipeline::PipelineConfig cfg;
  cfg.spread = spread;
  cfg.components = components;
  cfg.features.level = level;
  cfg.features.tau = tau;
  const auto bundle = leafid::pipeline::train_pipeline(leafid::pipeline::Manifest::load(manifest), cfg, &std::cerr);
  leafid::pipeline::save_bundle(bundle, out);
  return kOk;
}

int run_classify(const std::string& image, const std::string& model, const std::string& terminals, int top) {
  const auto bundle = leafid::pipeline::load_bundle(model);
  const auto t = leafid::pipeline::read_terminals(terminals);
  const auto ranking = leafid::pipeline::classify_file(bundle, image, t, top);
  std::cout << leafid::pipeline::ranking_document(fs::path(image).stem().string(), ranking).dump(2) << '\n';
  return kOk;
}

int run_evaluate(const std::string& manifest, const std::string& model, const std::string& report) {
  const auto bundle = leafid::pipeline::load_bundle(model);
  const auto r = leafid::pipeline::evaluate(leafid::pipeline::Manifest::load(manifest), bundle);
  write_json(report, leafid::pipeline::to_json(r));
  std::cout << "class,tested,incorrect\n";
  for (const auto& c : r.classes) std::cout << c.name << ',' << c.tested << ',' << c.incorrect << '\n';
  std::cout << "accuracy " << r.accuracy() << " (" << (r.total() - r.incorrect()) << "/" << r.total() << ")\n";
  return kOk;
}

int run_serve(const std::string& model, const std::string& data, int port) {
  const auto bundle = leafid::pipeline::load_bundle(model);
  leafid::annotation::AnnotationStore store(data, &std::cerr);
  leafid::annotation::AnnotationService service(store, bundle);
  httplib::Server server;
  service.mount(server);
  std::cerr << "serving " << data << " on port " << port << '\n';
  if (!server.listen("0.0.0.0", port)) {
    std::cerr << "error: cannot listen on port " << port << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leaf recognition from morphological features"};
  app.require_subcommand(1);

  std::string image, out, terminals, manifest, model, report, data;
  double level = leafid::raster::kDefaultLevel;
  double tau = 10.0 / 255.0;
  double spread = leafid::pnn::kDefaultSpread;
  int components = 5;
  int top = 3;
  int port = 8080;

  auto* pre = app.add_subcommand("preprocess", "Write gray.png, mask.png and margin.png for an image");
  pre->add_option("image", image, "Input PNG/JPEG")->required();
  pre->add_option("--out", out, "Output directory")->required();
  pre->add_option("--level", level, "Binarization level in (0,1)");

  auto* ext = app.add_subcommand("extract", "Extract the 12 features of one image");
  ext->add_option("image", image, "Input PNG/JPEG")->required();
  ext->add_option("--terminals", terminals, "Terminal sidecar JSON")->required();
  ext->add_option("--tau", tau, "Vein residue threshold in (0,1)");
  ext->add_option("--out", out, "Output JSON record")->required();

  auto* trn = app.add_subcommand("train", "Train a model bundle from a manifest");
  trn->add_option("--manifest", manifest, "Manifest CSV (image,terminals,label) or JSON")->required();
  trn->add_option("--out", out, "Output bundle JSON")->required();
  trn->add_option("--spread", spread, "PNN spread constant");
  trn->add_option("--components", components, "Principal components kept");
  trn->add_option("--level", level, "Binarization level in (0,1)");
  trn->add_option("--tau", tau, "Vein residue threshold in (0,1)");

  auto* cls = app.add_subcommand("classify", "Rank the classes for one image");
  cls->add_option("image", image, "Input PNG/JPEG")->required();
  cls->add_option("--model", model, "Model bundle JSON")->required();
  cls->add_option("--terminals", terminals, "Terminal sidecar JSON")->required();
  cls->add_option("--top", top, "Number of candidates");

  auto* evl = app.add_subcommand("evaluate", "Evaluate a bundle on a test manifest");
  evl->add_option("--manifest", manifest, "Test manifest")->required();
  evl->add_option("--model", model, "Model bundle JSON")->required();
  evl->add_option("--report", report, "Output report JSON")->required();

  auto* srv = app.add_subcommand("serve", "Start the annotation service");
  srv->add_option("--model", model, "Model bundle JSON")->required();
  srv->add_option("--data", data, "Image directory")->required();
  srv->add_option("--port", port, "TCP port")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*pre) return run_preprocess(image, out, level);
    if (*ext) return run_extract(image, terminals, tau, out);
    if (*trn) return run_train(manifest, out, spread, components, level, tau);
    if (*cls) return run_classify(image, model, terminals, top);
    if (*evl) return run_evaluate(manifest, model, report);
    if (*srv) return run_serve(model, data, port);
  } catch (const leafid::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
