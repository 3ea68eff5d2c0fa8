#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace rts::harness {

// Shortest text that parses back to the same double.
std::string format_real(double v);

// Comma-separated file whose first line records the run seed as "# seed=N".
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, uint64_t seed, std::initializer_list<std::string> header,
            bool append = false);
  CsvWriter(const std::filesystem::path& path, uint64_t seed, const std::vector<std::string>& header,
            bool append = false);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
};

// Data rows of a CSV written by CsvWriter (seed line and header skipped).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Seed recorded in the first line of a CsvWriter file.
uint64_t read_csv_seed(const std::filesystem::path& path);

}  // namespace rts::harness
