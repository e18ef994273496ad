#include "wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace fpcg {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF), static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF), static_cast<unsigned char>((v >> 8) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace

Record load_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open WAV file: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    fail(ErrorCode::format, "not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const char* tag = reinterpret_cast<const char*>(buf.data() + pos);
    const std::uint32_t len = rd_u32(buf.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > buf.size()) break;
    if (std::memcmp(tag, "fmt ", 4) == 0 && len >= 16) {
      format = rd_u16(buf.data() + body);
      channels = rd_u16(buf.data() + body + 2);
      sample_rate = rd_u32(buf.data() + body + 4);
      bits = rd_u16(buf.data() + body + 14);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = buf.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1); // chunks are word aligned
  }

  if (sample_rate == 0 || channels == 0) fail(ErrorCode::format, "missing fmt chunk: " + path);
  if (data == nullptr) fail(ErrorCode::format, "missing data chunk: " + path);

  const bool pcm8 = format == 1 && bits == 8;
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm8 && !pcm16 && !float32)
    fail(ErrorCode::format, "unsupported WAV encoding (format=" + std::to_string(format) +
                                ", bits=" + std::to_string(bits) + "): " + path);

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame = bytes_per_sample * channels;
  const std::size_t n = data_len / frame;
  if (n == 0) fail(ErrorCode::format, "zero-length audio: " + path);

  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = data + i * frame; // first channel
    if (pcm8) {
      samples[i] = (static_cast<int>(p[0]) - 128) / 128.0;
    } else if (pcm16) {
      const std::int16_t v = static_cast<std::int16_t>(rd_u16(p));
      samples[i] = v / 32768.0;
    } else {
      float f;
      std::uint32_t u = rd_u32(p);
      std::memcpy(&f, &u, 4);
      samples[i] = static_cast<double>(f);
    }
  }

  return make_record(std::filesystem::path(path).stem().string(), std::move(samples),
                     static_cast<double>(sample_rate), Source::file);
}

void save_wav(const Record& rec, const std::string& path, int bits_per_sample) {
  validate_record(rec);
  if (bits_per_sample != 8 && bits_per_sample != 16 && bits_per_sample != 32)
    fail(ErrorCode::invalid_argument, "unsupported bit depth: " + std::to_string(bits_per_sample));
  const std::uint32_t fs = static_cast<std::uint32_t>(std::llround(rec.fs));
  if (std::abs(rec.fs - static_cast<double>(fs)) > 1e-6)
    fail(ErrorCode::invalid_argument, "WAV requires an integer sample rate");

  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::io, "cannot write WAV file: " + path);

  const std::uint16_t fmt = bits_per_sample == 32 ? 3 : 1;
  const std::uint32_t n = static_cast<std::uint32_t>(rec.samples.size());
  const std::uint32_t bytes = n * bits_per_sample / 8;

  os.write("RIFF", 4);
  wr_u32(os, 36 + bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, fmt);
  wr_u16(os, 1); // mono
  wr_u32(os, fs);
  wr_u32(os, fs * bits_per_sample / 8);
  wr_u16(os, static_cast<std::uint16_t>(bits_per_sample / 8));
  wr_u16(os, static_cast<std::uint16_t>(bits_per_sample));
  os.write("data", 4);
  wr_u32(os, bytes);

  for (double v : rec.samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    if (bits_per_sample == 8) {
      const int q = std::clamp(static_cast<int>(std::lround(c * 128.0)) + 128, 0, 255);
      const unsigned char b = static_cast<unsigned char>(q);
      os.write(reinterpret_cast<const char*>(&b), 1);
    } else if (bits_per_sample == 16) {
      const int q = std::clamp(static_cast<int>(std::lround(c * 32768.0)), -32768, 32767);
      wr_u16(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      wr_u32(os, u);
    }
  }
  if (!os) fail(ErrorCode::io, "short write: " + path);
}

} // namespace fpcg
