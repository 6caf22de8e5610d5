#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace stp::io {

// Reads newline-terminated lines from a plain or gzip-compressed file, or
// from a caller-owned stream. The line buffer is reused, so memory stays
// proportional to the longest line seen.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  explicit LineReader(std::istream& in);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Returns false at end of input. The trailing '\n' (and '\r') is removed.
  bool next(std::string& line);

  std::uint64_t line_number() const { return line_number_; }

 private:
  struct Gz;
  std::unique_ptr<Gz> gz_;
  std::istream* in_ = nullptr;
  std::string path_;
  std::uint64_t line_number_ = 0;
};

// Reads a whole (optionally gzip-compressed) file in chunks and hands them to
// the sink. Used by the OSM XML reader.
class ChunkReader {
 public:
  explicit ChunkReader(const std::filesystem::path& path);
  ~ChunkReader();
  ChunkReader(const ChunkReader&) = delete;
  ChunkReader& operator=(const ChunkReader&) = delete;

  // Fills `buffer` with up to its size; returns bytes read, 0 at EOF.
  std::size_t read(char* buffer, std::size_t size);

 private:
  struct Gz;
  std::unique_ptr<Gz> gz_;
  std::string path_;
};

// Writes to "<path>.tmp-<pid>" and renames onto `path` on commit(). An
// uncommitted file is removed on destruction, so a failed or interrupted run
// never leaves partial output under the final name.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  const std::filesystem::path& path() const { return path_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

FileDigest digest(const std::filesystem::path& path);

// Provenance record written next to every stage output as
// "<output>.manifest.json".
struct Manifest {
  std::string stage;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::uint64_t> counts;

  std::string to_json() const;
};

std::filesystem::path manifest_path(const std::filesystem::path& output);

// Digests every output, then writes one manifest per output atomically.
void write_manifests(Manifest manifest, const std::vector<std::filesystem::path>& outputs);

}  // namespace stp::io
