#include "besim/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "besim/errors.hpp"

namespace besim {

namespace {
constexpr const char* kHeader = "BESIM-CKPT v1";

void write_f32_le(std::ostream& out, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(bits & 0xff),
      static_cast<unsigned char>((bits >> 8) & 0xff),
      static_cast<unsigned char>((bits >> 16) & 0xff),
      static_cast<unsigned char>((bits >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

float read_f32_le(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  const uint32_t bits = static_cast<uint32_t>(bytes[0]) |
                        (static_cast<uint32_t>(bytes[1]) << 8) |
                        (static_cast<uint32_t>(bytes[2]) << 16) |
                        (static_cast<uint32_t>(bytes[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}
}  // namespace

void save_checkpoint(const std::string& path, std::span<Parameter* const> params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open checkpoint for writing: " + path);
  out << kHeader << "\n";
  for (const Parameter* p : params) {
    out << p->name << " " << p->value.rows << " " << p->value.cols << "\n";
    for (double v : p->value.data) write_f32_le(out, static_cast<float>(v));
  }
  if (!out) throw data_error("write failure on checkpoint: " + path);
}

void load_checkpoint(const std::string& path, std::span<Parameter*> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open checkpoint: " + path);
  std::string header;
  std::getline(in, header);
  if (header != kHeader)
    throw data_error("bad checkpoint header in " + path + ": '" + header + "'");

  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;

  size_t loaded = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    int rows = 0, cols = 0;
    if (!(ls >> name >> rows >> cols))
      throw data_error("malformed checkpoint entry in " + path + ": '" + line + "'");
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw data_error("checkpoint parameter '" + name + "' not present in model");
    Parameter* p = it->second;
    if (p->value.rows != rows || p->value.cols != cols)
      throw data_error("checkpoint parameter '" + name + "' has shape " +
                       std::to_string(rows) + "x" + std::to_string(cols) +
                       ", expected " + std::to_string(p->value.rows) + "x" +
                       std::to_string(p->value.cols));
    for (double& v : p->value.data) {
      v = static_cast<double>(read_f32_le(in));
      if (!in) throw data_error("truncated checkpoint: " + path);
    }
    ++loaded;
  }
  if (loaded != params.size())
    throw data_error("checkpoint " + path + " holds " + std::to_string(loaded) +
                     " parameters, model expects " + std::to_string(params.size()));
}

}  // namespace besim
