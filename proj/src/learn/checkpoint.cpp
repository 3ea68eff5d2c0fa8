#include "rts/learn/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace rts::learn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'T', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kMaxString = 1 << 20;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw CheckpointError("cannot open checkpoint " + path);
  }

  void bytes(void* dst, size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) throw CheckpointError("truncated checkpoint " + path_);
  }
  template <class T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  std::string str() {
    const uint32_t n = get<uint32_t>();
    if (n > kMaxString) throw CheckpointError("corrupt string length in " + path_);
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  CheckpointHeader header() {
    char magic[8];
    bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw CheckpointError("bad magic or version in " + path_);
    CheckpointHeader h;
    h.descriptor = str();
    h.update = get<uint64_t>();
    h.seed = get<uint64_t>();
    return h;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::string& path, const PolicyValueNet<float>& net, uint64_t update, uint64_t seed) {
  // Write to a temporary then rename so a crash never leaves a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot write checkpoint " + tmp);
    os.write(kMagic, sizeof kMagic);
    const std::string desc = net.spec().descriptor();
    put<uint32_t>(os, static_cast<uint32_t>(desc.size()));
    os.write(desc.data(), static_cast<std::streamsize>(desc.size()));
    put<uint64_t>(os, update);
    put<uint64_t>(os, seed);
    put<uint32_t>(os, static_cast<uint32_t>(net.layout().size()));
    for (const auto& p : net.layout()) {
      put<uint32_t>(os, static_cast<uint32_t>(p.name.size()));
      os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      put<uint64_t>(os, p.size());
      os.write(reinterpret_cast<const char*>(net.params().data() + p.offset),
               static_cast<std::streamsize>(p.size() * sizeof(float)));
    }
    if (!os) throw CheckpointError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("cannot rename checkpoint to " + path);
}

CheckpointHeader read_checkpoint_header(const std::string& path) { return Reader(path).header(); }

NetSpec spec_from_descriptor(const std::string& descriptor) {
  NetSpec s;
  std::istringstream is(descriptor);
  std::string kind, tok;
  is >> kind;
  if (kind != "mlp") throw CheckpointError("unknown architecture: " + descriptor);
  bool map = false, head = false, hidden = false;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw CheckpointError("bad descriptor token: " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "map") {
        const auto x = val.find('x');
        s.height = std::stoi(val.substr(0, x));
        s.width = std::stoi(val.substr(x + 1));
        map = true;
      } else if (key == "head") {
        s.head = head_from_name(val);
        head = true;
      } else if (key == "hidden") {
        const auto c = val.find(',');
        s.hidden1 = std::stoi(val.substr(0, c));
        s.hidden2 = std::stoi(val.substr(c + 1));
        hidden = true;
      }
    } catch (const std::exception&) {
      throw CheckpointError("bad descriptor value: " + tok);
    }
  }
  if (!map || !head || !hidden) throw CheckpointError("incomplete descriptor: " + descriptor);
  if (s.descriptor() != descriptor) throw CheckpointError("inconsistent descriptor: " + descriptor);
  return s;
}

CheckpointHeader load_checkpoint(const std::string& path, PolicyValueNet<float>& net) {
  Reader r(path);
  const CheckpointHeader h = r.header();
  if (h.descriptor != net.spec().descriptor()) {
    throw CheckpointError("architecture mismatch: file has '" + h.descriptor + "', expected '" +
                          net.spec().descriptor() + "'");
  }
  const uint32_t count = r.get<uint32_t>();
  if (count != net.layout().size()) throw CheckpointError("array count mismatch in " + path);
  std::vector<float> params(net.params().size());
  for (const auto& p : net.layout()) {
    const std::string name = r.str();
    if (name != p.name) throw CheckpointError("unexpected array '" + name + "' in " + path);
    const uint64_t n = r.get<uint64_t>();
    if (n != p.size()) throw CheckpointError("size mismatch for array " + name);
    r.bytes(params.data() + p.offset, n * sizeof(float));
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes in " + path);
  net.params() = std::move(params);
  return h;
}

}  // namespace rts::learn
