#include "logtex/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "logtex/error.hpp"

namespace logtex {

namespace {

constexpr char kMagic[8] = {'L', 'T', 'E', 'X', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((value >> (8 * i)) & 0xff);
}

void put_i32(std::string& out, std::int32_t value) { put_u32(out, static_cast<std::uint32_t>(value)); }

void put_f32(std::string& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  put_u32(out, bits);
}

void put_block(std::string& out, const std::string& block) {
  put_u32(out, static_cast<std::uint32_t>(block.size()));
  out += block;
}

class Reader {
 public:
  Reader(const std::string& data, size_t pos) : data_(data), pos_(pos) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i)
      value |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return value;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() {
    std::uint32_t bits = u32();
    float value;
    std::memcpy(&value, &bits, 4);
    return value;
  }
  std::string block() {
    std::uint32_t length = u32();
    need(length);
    std::string out = data_.substr(pos_, length);
    pos_ += length;
    return out;
  }
  size_t pos() const { return pos_; }

 private:
  void need(size_t bytes) {
    if (pos_ + bytes > data_.size()) raise(ErrorKind::CorruptContainer, "truncated checkpoint");
  }
  const std::string& data_;
  size_t pos_;
};

std::string format_config(const EncoderConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "vocab_size=" << config.vocab_size << "\n";
  out << "d_model=" << config.d_model << "\n";
  out << "n_layers=" << config.n_layers << "\n";
  out << "n_heads=" << config.n_heads << "\n";
  out << "d_ff=" << config.d_ff << "\n";
  out << "max_len=" << config.max_len << "\n";
  out << "dropout=" << config.dropout << "\n";
  out << "seed=" << config.seed << "\n";
  return out.str();
}

EncoderConfig parse_config(const std::string& block) {
  EncoderConfig config;
  std::istringstream in(block);
  std::string line;
  while (std::getline(in, line)) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      if (key == "vocab_size") config.vocab_size = std::stoi(value);
      else if (key == "d_model") config.d_model = std::stoi(value);
      else if (key == "n_layers") config.n_layers = std::stoi(value);
      else if (key == "n_heads") config.n_heads = std::stoi(value);
      else if (key == "d_ff") config.d_ff = std::stoi(value);
      else if (key == "max_len") config.max_len = std::stoi(value);
      else if (key == "dropout") config.dropout = std::stod(value);
      else if (key == "seed") config.seed = std::stoull(value);
    } catch (const std::exception&) {
      raise(ErrorKind::CorruptContainer, "bad config entry \"" + line + "\"");
    }
  }
  return config;
}

}  // namespace

std::uint32_t crc32(const void* data, size_t length, std::uint32_t seed) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = seed ^ 0xffffffffu;
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < length; ++i) crc = table[(crc ^ bytes[i]) & 0xff] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_block(out, format_config(checkpoint.model.config()));
  put_block(out, checkpoint.tokenizer.serialize());
  put_i32(out, checkpoint.param_token_id);

  put_u32(out, static_cast<std::uint32_t>(checkpoint.model.params().tensor_count()));
  visit_tensors(
      [&](const std::string& name, const auto& tensor) {
        put_block(out, name);
        put_u32(out, static_cast<std::uint32_t>(tensor.rows()));
        put_u32(out, static_cast<std::uint32_t>(tensor.cols()));
        for (Eigen::Index i = 0; i < tensor.rows(); ++i)
          for (Eigen::Index j = 0; j < tensor.cols(); ++j)
            put_f32(out, static_cast<float>(tensor(i, j)));
      },
      checkpoint.model.params());

  put_u32(out, crc32(out.data(), out.size()));

  std::ofstream file(path, std::ios::binary);
  if (!file) raise(ErrorKind::IoError, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) raise(ErrorKind::IoError, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) raise(ErrorKind::MissingArtifact, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  std::string data = buffer.str();

  if (data.size() < sizeof(kMagic) + 8) raise(ErrorKind::CorruptContainer, "file too short");
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    raise(ErrorKind::CorruptContainer, "bad magic");
  {
    Reader tail(data, data.size() - 4);
    std::uint32_t stored = tail.u32();
    if (crc32(data.data(), data.size() - 4) != stored)
      raise(ErrorKind::CorruptContainer, "checksum mismatch");
  }

  Reader reader(data, sizeof(kMagic));
  std::uint32_t version = reader.u32();
  if (version != kVersion)
    raise(ErrorKind::VersionMismatch, "container version " + std::to_string(version));

  EncoderConfig config = parse_config(reader.block());
  Tokenizer tokenizer = Tokenizer::deserialize(reader.block());
  std::int32_t param_id = reader.i32();

  Checkpoint checkpoint{std::move(tokenizer), Encoder(config), param_id};
  std::uint32_t tensor_count = reader.u32();
  std::uint32_t seen = 0;
  visit_tensors(
      [&](const std::string& name, auto& tensor) {
        std::string stored_name = reader.block();
        if (stored_name != name)
          raise(ErrorKind::CorruptContainer, "expected tensor " + name + ", found " + stored_name);
        auto rows = static_cast<Eigen::Index>(reader.u32());
        auto cols = static_cast<Eigen::Index>(reader.u32());
        if (rows != tensor.rows() || cols != tensor.cols())
          raise(ErrorKind::CorruptContainer, "tensor " + name + " has unexpected shape");
        for (Eigen::Index i = 0; i < rows; ++i)
          for (Eigen::Index j = 0; j < cols; ++j) tensor(i, j) = static_cast<double>(reader.f32());
        ++seen;
      },
      checkpoint.model.params());
  if (seen != tensor_count) raise(ErrorKind::CorruptContainer, "tensor count mismatch");

  if (param_id >= 0) checkpoint.model.restore_added_token("PARAM", param_id);
  return checkpoint;
}

}  // namespace logtex
