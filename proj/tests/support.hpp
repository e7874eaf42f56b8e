#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "gigaudit/model.hpp"
#include "gigaudit/time.hpp"

namespace testsupport {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("gigaudit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline gigaudit::Timestamp ts(const std::string& iso) {
  return gigaudit::parse_timestamp(iso, gigaudit::TimeZone::utc());
}

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Concatenated bytes of every regular file under root, in path order.
inline std::string tree_bytes(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    out += fs::relative(f, root).string();
    out += '\0';
    out += read_file(f);
    out += '\0';
  }
  return out;
}

inline gigaudit::TripRecord trip(const std::string& accept, const std::string& pickup, const std::string& dropoff,
                                 std::optional<std::int64_t> fare_pence = std::nullopt) {
  gigaudit::TripRecord t;
  t.driver_id = "d1";
  t.request_ts = ts(accept);
  t.accept_ts = ts(accept);
  t.pickup_ts = ts(pickup);
  t.dropoff_ts = ts(dropoff);
  t.distance_miles = 3.0;
  t.product = "UberX";
  if (fare_pence) t.original_fare = gigaudit::Money::pence(*fare_pence);
  return t;
}

inline gigaudit::PaymentEvent payment(const std::string& at, std::int64_t pence,
                                      gigaudit::PaymentCategory cat = gigaudit::PaymentCategory::TripEarnings) {
  gigaudit::PaymentEvent p;
  p.driver_id = "d1";
  p.ts = ts(at);
  p.category = cat;
  p.amount = gigaudit::Money::pence(pence);
  return p;
}

}  // namespace testsupport
