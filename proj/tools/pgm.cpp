#include "pgm.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "mkot/error.hpp"

namespace mkot::tools {

namespace {

// Next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  std::string token;
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(static_cast<unsigned char>(ch)) && ch != '#') {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  if (ch == '#') in.unget();
  return token;
}

int parse_header_int(std::istream& in, const char* what, int min_value = 1) {
  const std::string token = next_token(in);
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used == token.size() && value >= min_value) return value;
  } catch (const std::exception&) {
  }
  throw Error(std::string("pgm: bad ") + what + " '" + token + "'");
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string());

  const std::string magic = next_token(file);
  if (magic != "P5" && magic != "P2") {
    throw Error("pgm: unsupported magic '" + magic + "' in " + path.string());
  }
  const int cols = parse_header_int(file, "width");
  const int rows = parse_header_int(file, "height");
  const int maxval = parse_header_int(file, "maxval");
  if (maxval > 255) throw Error("pgm: only 8-bit images are supported");

  Image img(rows, cols);
  if (magic == "P5") {
    // A single whitespace byte separates the header from the raster.
    std::string raster(static_cast<std::size_t>(rows) * cols, '\0');
    file.read(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (file.gcount() != static_cast<std::streamsize>(raster.size())) {
      throw Error("pgm: truncated raster in " + path.string());
    }
    for (std::size_t i = 0; i < raster.size(); ++i) {
      img.pixels()[i] = static_cast<double>(static_cast<unsigned char>(raster[i])) / maxval;
    }
  } else {
    for (double& pixel : img.pixels()) {
      const int value = parse_header_int(file, "pixel", 0);
      if (value > maxval) throw Error("pgm: pixel above maxval in " + path.string());
      pixel = static_cast<double>(value) / maxval;
    }
  }
  return img;
}

}  // namespace mkot::tools
