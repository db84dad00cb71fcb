#ifndef CADM_FRAME_IO_H_
#define CADM_FRAME_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cadm/frame.h"

namespace cadm {

// Binary PPM (P6) with maxval 255. The parser accepts arbitrary whitespace
// and '#' comments between header tokens; the writer always emits the
// canonical "P6\n<w> <h>\n255\n" header.
Frame parse_ppm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_ppm(const Frame& frame);

Frame read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Frame& frame);

// "frame_%06d.ppm"
std::string frame_file_name(size_t index);

// Reads every frame_*.ppm in |dir| in index order.
VideoSequence read_sequence(const std::filesystem::path& dir,
                            Rational fps = {});
void write_sequence(const std::filesystem::path& dir,
                    const std::vector<Frame>& frames);

// Subdirectories of |root| holding at least one frame file, sorted by name.
std::vector<std::filesystem::path> list_sequence_dirs(
    const std::filesystem::path& root);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                const std::vector<uint8_t>& bytes);

}  // namespace cadm

#endif  // CADM_FRAME_IO_H_
