#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include "deepsound/audio.hpp"

namespace deepsound::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  std::string_view tag() {
    need(4);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw Error(ErrorKind::format, "truncated WAV header");
  }

  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::int16_t read_i16(const unsigned char* p) {
  return static_cast<std::int16_t>(p[0] | (p[1] << 8));
}

float read_f32(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

}  // namespace

Waveform decode_wav(std::span<const unsigned char> bytes) {
  ByteReader r(bytes);
  if (r.tag() != "RIFF") throw Error(ErrorKind::format, "missing RIFF tag");
  r.u32();
  if (r.tag() != "WAVE") throw Error(ErrorKind::format, "missing WAVE tag");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const unsigned char> data;
  bool have_data = false;

  while (r.has(8) && !have_data) {
    const auto id = r.tag();
    const std::uint32_t size = r.u32();
    const std::size_t body = r.pos();
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorKind::format, "fmt chunk too small");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorKind::format, "extensible fmt chunk too small");
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorKind::format, "data chunk before fmt chunk");
      const std::size_t available = bytes.size() - body;
      data = bytes.subspan(body, std::min<std::size_t>(size, available));
      have_data = true;
    }
    r.seek(body + size + (size & 1));
  }
  if (!have_fmt) throw Error(ErrorKind::format, "missing fmt chunk");
  if (!have_data) throw Error(ErrorKind::format, "missing data chunk");
  if (rate == 0) throw Error(ErrorKind::format, "zero sample rate");
  if (channels != 1 && channels != 2) {
    throw Error(ErrorKind::unsupported, "only mono or stereo WAV is supported");
  }

  std::size_t bytes_per_sample = 0;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw Error(ErrorKind::unsupported,
                "unsupported WAV encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits)");
  }

  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data.size() / frame_bytes;
  std::vector<float> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data.data() + i * frame_bytes + c * bytes_per_sample;
      if (bytes_per_sample == 2) {
        acc += read_i16(p) / 32768.0;
      } else {
        const float v = read_f32(p);
        if (!std::isfinite(v)) throw Error(ErrorKind::format, "non-finite float sample");
        acc += v;
      }
    }
    samples[i] = static_cast<float>(acc / channels);
  }
  return to_canonical(Waveform(std::move(samples), static_cast<int>(rate)));
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<unsigned char> encode_wav(const Waveform& w) {
  const Waveform canonical = to_canonical(w);
  const auto samples = canonical.samples();
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatFloat);
  put_u16(out, 1);
  put_u32(out, kCanonicalRate);
  put_u32(out, kCanonicalRate * 4);
  put_u16(out, 4);
  put_u16(out, 32);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float s : samples) put_u32(out, std::bit_cast<std::uint32_t>(s));
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace deepsound::audio
