#include "rts/harness/csv.hpp"

#include <charconv>
#include <sstream>

#include "rts/types.hpp"

namespace rts::harness {

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, uint64_t seed, std::initializer_list<std::string> header,
                     bool append)
    : CsvWriter(path, seed, std::vector<std::string>(header), append) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, uint64_t seed, const std::vector<std::string>& header,
                     bool append) {
  const bool fresh = !append || !std::filesystem::exists(path);
  out_.open(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out_) throw ConfigError("cannot write " + path.string());
  if (fresh) {
    out_ << "# seed=" << seed << '\n';
    row(header);
  }
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << '\n';
  out_.flush();
  if (!out_) throw ConfigError("CSV write failed");
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

uint64_t read_csv_seed(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# seed=", 0) != 0) throw ConfigError("no seed line in " + path.string());
  return std::stoull(line.substr(7));
}

}  // namespace rts::harness
