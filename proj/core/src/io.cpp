#include "stp/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>
#include <zlib.h>

#include <array>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "stp/errors.hpp"

namespace stp::io {

namespace fs = std::filesystem;

struct LineReader::Gz {
  gzFile file = nullptr;
  std::array<char, 1 << 16> chunk{};
  ~Gz() {
    if (file) gzclose(file);
  }
};

LineReader::LineReader(const fs::path& path) : gz_(std::make_unique<Gz>()), path_(path.string()) {
  gz_->file = gzopen(path_.c_str(), "rb");
  if (!gz_->file) throw DataError("cannot open " + path_);
  gzbuffer(gz_->file, 1 << 17);
}

LineReader::LineReader(std::istream& in) : in_(&in) {}
LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) {
  line.clear();
  if (in_) {
    if (!std::getline(*in_, line)) {
      if (in_->bad()) throw DataError("read error on input stream");
      return false;
    }
  } else {
    bool got_any = false;
    for (;;) {
      char* r = gzgets(gz_->file, gz_->chunk.data(), static_cast<int>(gz_->chunk.size()));
      if (!r) {
        int err = Z_OK;
        const char* msg = gzerror(gz_->file, &err);
        if (err != Z_OK && err != Z_STREAM_END) throw DataError("read error in " + path_ + ": " + msg);
        break;
      }
      got_any = true;
      const std::size_t n = std::char_traits<char>::length(r);
      if (n > 0 && r[n - 1] == '\n') {
        line.append(r, n - 1);
        break;
      }
      line.append(r, n);
    }
    if (!got_any) return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_number_;
  return true;
}

struct ChunkReader::Gz {
  gzFile file = nullptr;
  ~Gz() {
    if (file) gzclose(file);
  }
};

ChunkReader::ChunkReader(const fs::path& path) : gz_(std::make_unique<Gz>()), path_(path.string()) {
  gz_->file = gzopen(path_.c_str(), "rb");
  if (!gz_->file) throw DataError("cannot open " + path_);
}

ChunkReader::~ChunkReader() = default;

std::size_t ChunkReader::read(char* buffer, std::size_t size) {
  const int n = gzread(gz_->file, buffer, static_cast<unsigned>(size));
  if (n < 0) {
    int err = Z_OK;
    throw DataError("read error in " + path_ + ": " + gzerror(gz_->file, &err));
  }
  return static_cast<std::size_t>(n);
}

AtomicFile::AtomicFile(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path() && !path_.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(path_.parent_path(), ec);
  }
  tmp_ = path_;
  tmp_ += ".tmp-" + std::to_string(::getpid());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw DataError("cannot write " + tmp_.string());
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    fs::remove(tmp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw DataError("write failed for " + path_.string());
  out_.close();
  std::error_code ec;
  fs::rename(tmp_, path_, ec);
  if (ec) throw DataError("cannot rename " + tmp_.string() + " to " + path_.string() + ": " + ec.message());
  committed_ = true;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  AtomicFile f(path);
  f.stream().write(content.data(), static_cast<std::streamsize>(content.size()));
  f.commit();
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("sha256 initialisation failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

FileDigest digest(const fs::path& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  return FileDigest{path.string(), sha256_file(path), ec ? 0 : size};
}

std::string Manifest::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["stage"] = stage;
  auto files = [](const std::vector<FileDigest>& v) {
    ordered_json arr = ordered_json::array();
    for (const auto& d : v) arr.push_back({{"path", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  j["parameters"] = parameters;
  j["counts"] = counts;
  return j.dump(2) + "\n";
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

void write_manifests(Manifest manifest, const std::vector<fs::path>& outputs) {
  manifest.outputs.clear();
  for (const auto& o : outputs) manifest.outputs.push_back(digest(o));
  const std::string body = manifest.to_json();
  for (const auto& o : outputs) write_file_atomic(manifest_path(o), body);
}

}  // namespace stp::io
