#ifndef FRACSOURCE_PIPELINE_HPP
#define FRACSOURCE_PIPELINE_HPP

#include <json.hpp>
#include <optional>
#include <string>

#include "fracsource/source_reconstruction.hpp"

namespace fracsource {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double s = 0.75;
  int N = 500;
  int M = 10000;
  int f_M = 100;
  double T = 1.0;
  double omega_lo = -0.75;
  double omega_hi = 0.75;
  bool epsilon_auto = false;
  double epsilon = 1e4;
  int e_n = 50;
  int n_star = 0;  // 0 selects the N/5 default
  std::string sigma_name = "exp";   // exp | one | cos10 | quad
  std::string f_name = "f1";        // f1..f4 | nodal:<file> | coeffs:<file>
  std::string theorem = "1";        // 1 | 2 | both
  std::string tau_endpoint = "implicit";  // implicit | zero
  double noise = 0.0;
  std::string output_dir = "out";
  std::string cache_dir;            // empty: $FRACSOURCE_CACHE or .fracsource-cache
  bool strict = false;

  int truncation() const { return n_star > 0 ? n_star : N / 5; }
  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  static RunConfig desk_profile();
};

// Spatial test factors of the experiment catalogue, sampled at the nodes.
Vector catalogue_f(const std::string& name, const Mesh1D& mesh);

SigmaProfile catalogue_sigma(const std::string& name, double T);

// Binary cache of double arrays, keyed by parameter strings; writes go to a
// temp file first and are renamed into place.
class Cache {
 public:
  explicit Cache(std::string root);
  bool load(const std::string& key, Matrix& out) const;
  void store(const std::string& key, const Matrix& data) const;
  std::string path_of(const std::string& key) const;

 private:
  std::string root_;
};

struct Manifest {
  nlohmann::json data;
};

Manifest run_pipeline(const RunConfig& config,
                      const std::optional<Vector>& f_override = std::nullopt);

// FNV-1a 64-bit over a file's bytes, hex-encoded; the manifest checksum.
std::string file_checksum(const std::string& path);

}  // namespace fracsource

#endif
