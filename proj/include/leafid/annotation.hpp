#pragma once

// Terminal annotation store and its HTTP front end. Requires cpp-httplib and
// a threads library.

#include <chrono>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leafid/error.hpp"
#include "leafid/fsutil.hpp"
#include "leafid/geometry.hpp"
#include "leafid/image_io.hpp"
#include "leafid/pipeline.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace leafid::annotation {

namespace fs = std::filesystem;
using nlohmann::json;

/// Error carrying the HTTP status it maps to.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& message) : Error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

struct AnnotationRecord {
  std::string image_id;
  geometry::PixelPoint a;
  geometry::PixelPoint b;
  std::string annotated_at;  // ISO 8601, UTC

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

inline json to_json(const AnnotationRecord& r) {
  return {{"image_id", r.image_id},
          {"a", {{"x", r.a.x}, {"y", r.a.y}}},
          {"b", {{"x", r.b.x}, {"y", r.b.y}}},
          {"annotated_at", r.annotated_at}};
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ImageInfo {
  std::string id;
  fs::path path;
  int width = 0;
  int height = 0;
  bool has_terminals = false;
};

/// Images in one directory plus their `<id>.terminals.json` sidecars.
/// The id of an image is its file name without extension.
class AnnotationStore {
 public:
  explicit AnnotationStore(fs::path dir, std::ostream* log = nullptr)
      : dir_(std::move(dir)), log_(log) {
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) throw DataError("data directory is not readable: " + dir_.string());
    fs::directory_iterator probe(dir_, ec);
    if (ec) throw DataError("data directory is not readable: " + dir_.string());
  }

  const fs::path& directory() const noexcept { return dir_; }

  fs::path sidecar(const std::string& id) const { return dir_ / (id + ".terminals.json"); }

  /// Decodable images in lexicographic file-name order. Non-image files and
  /// later files that repeat an id are skipped.
  std::vector<ImageInfo> list_images() const {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir_))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& x, const fs::path& y) { return x.filename().string() < y.filename().string(); });

    std::vector<ImageInfo> out;
    std::map<std::string, bool> seen;
    for (const auto& f : files) {
      const auto name = f.filename().string();
      if (name.ends_with(".terminals.json") || name.find(".tmp.") != std::string::npos) continue;
      const auto dims = io::probe(f);
      if (!dims) {
        if (log_) *log_ << "skipping non-image file " << f.string() << '\n';
        continue;
      }
      const auto id = f.stem().string();
      if (seen[id]) {
        if (log_) *log_ << "skipping " << f.string() << ": duplicate image id '" << id << "'\n";
        continue;
      }
      seen[id] = true;
      out.push_back({id, f, dims->width, dims->height, fs::exists(sidecar(id))});
    }
    return out;
  }

  std::optional<ImageInfo> find(const std::string& id) const {
    if (!valid_id(id)) return std::nullopt;
    for (auto& info : list_images())
      if (info.id == id) return info;
    return std::nullopt;
  }

  ImageInfo require(const std::string& id) const {
    auto info = find(id);
    if (!info) throw ServiceError(404, "unknown image '" + id + "'");
    return *info;
  }

  AnnotationRecord put_terminals(const std::string& id, geometry::PixelPoint a, geometry::PixelPoint b) {
    const auto info = require(id);
    for (const auto& p : {a, b})
      if (p.x < 0 || p.y < 0 || p.x >= info.width || p.y >= info.height)
        throw ServiceError(422, "point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                                    ") lies outside the " + std::to_string(info.width) + "x" +
                                    std::to_string(info.height) + " image");
    if (a == b) throw ServiceError(422, "terminal points coincide");

    AnnotationRecord rec{id, a, b, utc_timestamp()};
    std::lock_guard lock(mutex_for(id));
    fsutil::write_atomic(sidecar(id), to_json(rec).dump(1) + "\n");
    return rec;
  }

  std::optional<AnnotationRecord> get_terminals(const std::string& id) const {
    require(id);
    const auto file = sidecar(id);
    if (!fs::exists(file)) return std::nullopt;
    const auto t = pipeline::read_terminals(file);
    AnnotationRecord rec{id, t.a(), t.b(), {}};
    try {
      const auto j = json::parse(fsutil::read_text(file));
      if (j.contains("annotated_at") && j["annotated_at"].is_string()) rec.annotated_at = j["annotated_at"];
    } catch (const json::exception&) {
    }
    return rec;
  }

 private:
  static bool valid_id(const std::string& id) {
    return !id.empty() && id != "." && id != ".." && id.find('/') == std::string::npos &&
           id.find('\\') == std::string::npos;
  }

  std::mutex& mutex_for(const std::string& id) {
    std::lock_guard lock(table_mutex_);
    auto& m = locks_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  fs::path dir_;
  std::ostream* log_;
  std::mutex table_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// Request handling over a store and an immutable model bundle.
class AnnotationService {
 public:
  AnnotationService(AnnotationStore& store, const pipeline::ModelBundle& bundle)
      : store_(store), bundle_(bundle) {}

  json list_images() const {
    json out = json::array();
    for (const auto& i : store_.list_images())
      out.push_back({{"image_id", i.id}, {"has_terminals", i.has_terminals}, {"width", i.width}, {"height", i.height}});
    return out;
  }

  pnn::Ranking classify_image(const std::string& id, int k = 3) const {
    const auto info = store_.require(id);
    if (k < 1) throw ServiceError(422, "k must be at least 1");
    const auto rec = store_.get_terminals(id);
    if (!rec) throw ServiceError(409, "annotate first: no terminals for '" + id + "'");
    try {
      return pipeline::classify_file(bundle_, info.path, geometry::TerminalPair(rec->a, rec->b), k);
    } catch (const FeatureError& e) {
      throw ServiceError(422, std::string("feature extraction failed (") + e.feature() + "): " + e.what());
    }
  }

  /// Registers the HTTP routes on `server`.
  void mount(httplib::Server& server) {
    server.Get("/api/images", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] { send_json(res, 200, list_images()); });
    });
    server.Get("/api/images/:id", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto info = store_.require(req.path_params.at("id"));
        const auto bytes = fsutil::read_text(info.path);
        const auto fmt = io::sniff_format(info.path);
        res.set_content(bytes, fmt == io::ImageFormat::Png ? "image/png" : "image/jpeg");
      });
    });
    server.Get("/api/images/:id/terminals", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.path_params.at("id");
        const auto rec = store_.get_terminals(id);
        if (!rec) throw ServiceError(404, "no terminals for '" + id + "'");
        send_json(res, 200, to_json(*rec));
      });
    });
    server.Put("/api/images/:id/terminals", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error&) {
          throw ServiceError(400, "request body is not valid JSON");
        }
        auto point = [&](const char* key) {
          if (!body.is_object() || !body.contains(key) || !body[key].is_object() ||
              !body[key].contains("x") || !body[key].contains("y") || !body[key]["x"].is_number_integer() ||
              !body[key]["y"].is_number_integer())
            throw ServiceError(422, std::string("field '") + key + "' must be {x, y} with integer pixels");
          return geometry::PixelPoint{body[key]["x"].get<int>(), body[key]["y"].get<int>()};
        };
        const auto a = point("a");
        const auto b = point("b");
        send_json(res, 200, to_json(store_.put_terminals(req.path_params.at("id"), a, b)));
      });
    });
    server.Post("/api/images/:id/classify", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        int k = 3;
        if (req.has_param("k")) {
          try {
            k = std::stoi(req.get_param_value("k"));
          } catch (const std::exception&) {
            throw ServiceError(400, "k must be an integer");
          }
        }
        const auto id = req.path_params.at("id");
        send_json(res, 200, pipeline::ranking_document(id, classify_image(id, k)));
      });
    });

    const char* ui = std::getenv("LEAFID_UI_DIR");
    if (ui && fs::is_directory(ui)) {
      server.set_mount_point("/", ui);
    } else {
      server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
      });
    }
  }

 private:
  static constexpr const char* kPlaceholderPage =
      "<!doctype html><html><head><meta charset=\"utf-8\"><title>leafid</title></head><body>"
      "<h1>leafid annotation service</h1><p>No UI bundle installed. Set LEAFID_UI_DIR to the "
      "annotator build directory. JSON API under <code>/api/images</code>.</p></body></html>";

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  template <typename Fn>
  static void handle(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const ServiceError& e) {
      send_json(res, e.status(), {{"code", e.status()}, {"message", e.what()}});
    } catch (const Error& e) {
      send_json(res, 422, {{"code", 422}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"code", 500}, {"message", e.what()}});
    }
  }

  AnnotationStore& store_;
  const pipeline::ModelBundle& bundle_;
};

}  // namespace leafid::annotation
