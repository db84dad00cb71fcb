#include "cadm/frame_io.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "cadm/error.h"

namespace cadm {
namespace fs = std::filesystem;

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_whitespace_and_comments();
    long value = 0;
    size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      ++pos_;
      if (++digits > 9) {
        throw Error(ErrorCode::kParseError,
                    std::string("PPM ") + what + " out of range");
      }
    }
    if (digits == 0) {
      throw Error(ErrorCode::kParseError,
                  std::string("PPM header missing ") + what);
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::kParseError, "PPM header not terminated");
    }
    ++pos_;
  }

  size_t pos() const { return pos_; }
  void advance(size_t n) { pos_ += n; }

 private:
  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

}  // namespace

Frame parse_ppm(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw Error(ErrorCode::kParseError, "missing P6 magic");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const long width = reader.read_uint("width");
  const long height = reader.read_uint("height");
  const long maxval = reader.read_uint("maxval");
  reader.expect_single_whitespace();
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kParseError, "PPM dimensions must be positive");
  }
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "PPM maxval " + std::to_string(maxval) + " (only 255)");
  }
  const size_t payload = static_cast<size_t>(width) * height * 3;
  if (bytes.size() - reader.pos() < payload) {
    throw Error(ErrorCode::kParseError,
                "PPM payload truncated: expected " + std::to_string(payload) +
                    " bytes, found " +
                    std::to_string(bytes.size() - reader.pos()));
  }
  std::vector<uint8_t> data(bytes.begin() + reader.pos(),
                            bytes.begin() + reader.pos() + payload);
  return Frame(static_cast<int>(width), static_cast<int>(height),
               std::move(data));
}

std::vector<uint8_t> encode_ppm(const Frame& frame) {
  const std::string header = "P6\n" + std::to_string(frame.width()) + " " +
                             std::to_string(frame.height()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.data().begin(), frame.data().end());
  return out;
}

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write to " + path.string());
  }
}

Frame read_ppm(const fs::path& path) { return parse_ppm(read_file(path)); }

void write_ppm(const fs::path& path, const Frame& frame) {
  write_file(path, encode_ppm(frame));
}

std::string frame_file_name(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.ppm", index);
  return buf;
}

namespace {

bool is_frame_file(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.size() == 16 && name.starts_with("frame_") &&
         name.ends_with(".ppm") &&
         std::all_of(name.begin() + 6, name.begin() + 12,
                     [](char c) { return std::isdigit(c); });
}

}  // namespace

VideoSequence read_sequence(const fs::path& dir, Rational fps) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kInputError, dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_frame_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw Error(ErrorCode::kInputError,
                "no frame_*.ppm files in " + dir.string());
  }
  std::sort(files.begin(), files.end());
  VideoSequence seq;
  seq.fps = fps;
  seq.frames.reserve(files.size());
  for (const auto& f : files) seq.frames.push_back(read_ppm(f));
  seq.check_uniform();
  return seq;
}

void write_sequence(const fs::path& dir, const std::vector<Frame>& frames) {
  fs::create_directories(dir);
  for (size_t i = 0; i < frames.size(); ++i) {
    write_ppm(dir / frame_file_name(i), frames[i]);
  }
}

std::vector<fs::path> list_sequence_dirs(const fs::path& root) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kInputError, root.string() + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    for (const auto& inner : fs::directory_iterator(entry.path())) {
      if (inner.is_regular_file() && is_frame_file(inner.path())) {
        dirs.push_back(entry.path());
        break;
      }
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace cadm
