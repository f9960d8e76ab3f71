#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hfa/config.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/optimizer.hpp"

namespace hfa::detail {

using Json = nlohmann::ordered_json;

/// Strict object reader: records type errors and unknown keys as problems with field paths.
class ObjectReader {
 public:
  ObjectReader(const Json* j, std::string path, std::vector<std::string>& problems);
  ObjectReader(const ObjectReader&) = delete;
  ~ObjectReader();

  bool has(const char* key) const;
  const Json* take(const char* key);  // marks the key as known; nullptr when absent
  void problem(const char* key, const std::string& what);
  std::string path_of(const char* key) const;

  void read(const char* key, double& out);
  void read(const char* key, int& out);
  void read(const char* key, std::uint64_t& out);
  void read(const char* key, bool& out);
  void read(const char* key, std::string& out);
  void read(const char* key, Rgb& out);
  /// Runs `fn(reader)` on a nested object.
  template <class Fn>
  void object(const char* key, Fn fn) {
    const Json* c = take(key);
    if (!c) return;
    if (!c->is_object()) {
      problem(key, "expected an object");
      return;
    }
    ObjectReader sub(c, path_of(key), problems_);
    fn(sub);
  }
  std::vector<std::string>& problems() { return problems_; }

 private:
  const Json* j_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

Json to_json(const Rgb& c);
Json to_json(const OptimizerConfig& cfg);
Json to_json(const Heightfield& field);
Json to_json(const ProjectConfig& cfg);

void read_optimizer(ObjectReader& r, OptimizerConfig& cfg);
Heightfield heightfield_from_json(const Json& j, const std::string& path, std::vector<std::string>& problems);

ProjectConfig project_from_json(const Json& j, const std::filesystem::path& base_dir,
                                std::string_view default_name, const ConfigOptions& options);

std::string line_column(std::string_view text, std::size_t byte);

}  // namespace hfa::detail
