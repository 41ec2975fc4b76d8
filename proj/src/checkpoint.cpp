#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqglab/cli_runner.hpp"
#include "sqglab/errors.hpp"

namespace sqg {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'G', 'F'};
constexpr std::uint32_t kByteOrderMark = 0x01020304;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8 * 7;

class Writer {
 public:
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw CheckpointError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

template <typename Fn>
void for_each_canonical(int n, Fn&& fn) {
  for (int ky = -n; ky <= n; ++ky) {
    for (int kx = 0; kx <= n; ++kx) {
      if (kx == 0 && ky <= 0) continue;
      fn(kx, ky);
    }
  }
}

std::uint64_t canonical_count(int n) {
  const auto m = static_cast<std::uint64_t>(n);
  return (2 * m + 1) * (m + 1) - (m + 1);
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  const SpectralField& f = ck.state.field;
  const int n = f.cutoff();
  if (n < 1) throw CheckpointError("cannot checkpoint an empty field");
  Writer w;
  w.raw(kMagic, 4);
  w.u32(Checkpoint::kVersion);
  w.u32(kByteOrderMark);
  w.u32(static_cast<std::uint32_t>(n));
  w.f64(ck.state.time);
  w.u64(ck.state.step);
  w.f64(ck.alpha);
  w.u64(ck.state.rng.seed());
  w.u64(ck.state.rng.stream());
  w.u64(ck.state.rng.counter());
  w.u64(canonical_count(n));
  for_each_canonical(n, [&](int kx, int ky) {
    const cplx c = f.at(kx, ky);
    w.f64(c.real());
    w.f64(c.imag());
  });
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  r.bytes(4);
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(Checkpoint::kVersion) + ")");
  }
  const std::uint32_t bom = r.u32();
  if (bom != kByteOrderMark) throw CheckpointError("checkpoint has foreign byte order");
  r.need(kHeaderBytes - 12);
  const auto n = r.u32();
  if (n < 1 || n > (1u << 15)) throw CheckpointError("checkpoint cutoff out of range");
  Checkpoint ck;
  ck.state.time = r.f64();
  ck.state.step = r.u64();
  ck.alpha = r.f64();
  const std::uint64_t seed = r.u64();
  const std::uint64_t stream = r.u64();
  const std::uint64_t counter = r.u64();
  ck.state.rng = RngStream(seed, stream, counter);
  const std::uint64_t count = r.u64();
  const int cutoff = static_cast<int>(n);
  if (count != canonical_count(cutoff)) throw CheckpointError("checkpoint coefficient count mismatch");
  if (r.remaining() != count * 16) {
    throw CheckpointError(r.remaining() < count * 16 ? "checkpoint truncated"
                                                     : "checkpoint has trailing bytes");
  }
  SpectralField f(cutoff);
  for_each_canonical(cutoff, [&](int kx, int ky) {
    const double re = r.f64();
    const double im = r.f64();
    if (kx == 0) {
      f.set_mode({0, ky}, cplx(re, im));
    } else {
      f.at(kx, ky) = cplx(re, im);
    }
  });
  ck.state.field = std::move(f);
  return ck;
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  const std::string bytes = encode_checkpoint(ck);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write '" + tmp + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot rename '" + tmp + "': " + ec.message());
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace sqg
