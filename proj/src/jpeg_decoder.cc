// Copyright 2026 The finedetail Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "finedetail/error.h"
#include "finedetail/jpeg.h"
#include "jpeg_internal.h"

namespace finedetail::jpeg {
namespace {

std::string Hex(std::uint8_t m) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0xFF%02X", m);
  return buf;
}

std::string MarkerName(std::uint8_t m) {
  switch (m) {
    case 0xD8: return "SOI";
    case 0xD9: return "EOI";
    case 0xDA: return "SOS";
    case 0xDB: return "DQT";
    case 0xC4: return "DHT";
    case 0xDD: return "DRI";
    case 0xC0: return "SOF0";
    case 0xC1: return "SOF1";
    case 0xE0: return "APP0";
    case 0xFE: return "COM";
    default: return Hex(m);
  }
}

std::size_t Read16(std::span<const std::uint8_t> b, std::size_t pos) {
  return (std::size_t{b[pos]} << 8) | b[pos + 1];
}

bool IsStandalone(std::uint8_t m) {
  return m == 0x01 || (m >= 0xD0 && m <= 0xD9);
}

// Huffman decoding tables per Annex F.2.2.3.
struct HuffmanDecoder {
  bool defined = false;
  std::array<int, 18> maxcode{};
  std::array<int, 17> valptr{};
  std::array<int, 17> mincode{};
  std::vector<std::uint8_t> values;

  void Build(const std::array<std::uint8_t, 16>& bits,
             std::vector<std::uint8_t> vals) {
    values = std::move(vals);
    int code = 0, k = 0;
    for (int len = 1; len <= 16; ++len) {
      const int n = bits[len - 1];
      if (n == 0) {
        maxcode[len] = -1;
      } else {
        valptr[len] = k;
        mincode[len] = code;
        code += n;
        k += n;
        maxcode[len] = code - 1;
      }
      code <<= 1;
    }
    maxcode[17] = 0x7FFFFFFF;
    defined = true;
  }
};

struct FrameComponent {
  int id = 0;
  int h = 1, v = 1;
  int quant = 0;
  int dc_table = 0, ac_table = 0;
  std::size_t blocks_w = 0, blocks_h = 0;  // padded to whole MCUs
  std::vector<std::uint8_t> plane;         // blocks_w*8 x blocks_h*8
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> data, std::size_t pos)
      : data_(data), pos_(pos) {}

  int Bit() {
    if (nbits_ == 0) Fill();
    --nbits_;
    return (acc_ >> nbits_) & 1;
  }

  int Bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | Bit();
    return v;
  }

  // Discards buffered bits and consumes the RSTn marker that must follow.
  void Restart(int expected) {
    nbits_ = 0;
    if (pos_ + 1 >= data_.size() || data_[pos_] != 0xFF) {
      throw DecodeError("JPEG: expected RST marker at offset " +
                        std::to_string(pos_));
    }
    std::size_t p = pos_;
    while (p < data_.size() && data_[p] == 0xFF) ++p;
    if (p >= data_.size() || data_[p] != internal::kRST0 + (expected & 7)) {
      throw DecodeError("JPEG: missing or out-of-order RST marker at offset " +
                        std::to_string(pos_));
    }
    pos_ = p + 1;
    hit_marker_ = false;
  }

  // Position of the first byte after the entropy-coded segment.
  std::size_t Position() const { return pos_; }

 private:
  void Fill() {
    if (hit_marker_ || pos_ >= data_.size()) {
      if (pos_ >= data_.size()) {
        throw DecodeError("JPEG: entropy-coded data truncated");
      }
      // Past a marker: decoding ran over the end of the scan.
      throw DecodeError("JPEG: entropy-coded data ended early at marker " +
                        Hex(data_[pos_ + 1 < data_.size() ? pos_ + 1 : pos_]));
    }
    std::uint8_t b = data_[pos_];
    if (b == 0xFF) {
      if (pos_ + 1 >= data_.size()) {
        throw DecodeError("JPEG: entropy-coded data truncated");
      }
      if (data_[pos_ + 1] == 0x00) {
        pos_ += 2;
      } else {
        hit_marker_ = true;
        throw DecodeError("JPEG: entropy-coded data ended early at marker " +
                          Hex(data_[pos_ + 1]));
      }
    } else {
      ++pos_;
    }
    acc_ = b;
    nbits_ = 8;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_;
  std::uint32_t acc_ = 0;
  int nbits_ = 0;
  bool hit_marker_ = false;
};

int DecodeSymbol(BitReader& r, const HuffmanDecoder& h) {
  int code = r.Bit();
  int len = 1;
  while (len <= 16 && code > h.maxcode[len]) {
    code = (code << 1) | r.Bit();
    ++len;
  }
  if (len > 16) throw DecodeError("JPEG: invalid Huffman code in scan data");
  return h.values[h.valptr[len] + code - h.mincode[len]];
}

int Extend(int v, int size) {
  return v < (1 << (size - 1)) ? v - (1 << size) + 1 : v;
}

class Decoder {
 public:
  explicit Decoder(std::span<const std::uint8_t> b) : b_(b) {}

  ImageU8 Run() {
    if (b_.size() < 4 || b_[0] != 0xFF || b_[1] != internal::kSOI) {
      throw DecodeError("JPEG: missing SOI marker");
    }
    std::size_t pos = 2;
    bool scanned = false;
    while (true) {
      std::optional<std::size_t> next = NextMarker(pos);
      if (!next) {
        throw DecodeError("JPEG: missing EOI marker");
      }
      pos = *next;
      const std::uint8_t m = b_[pos + 1];
      pos += 2;
      if (m == internal::kEOI) break;
      if (IsStandalone(m)) {
        throw DecodeError("JPEG: unexpected " + MarkerName(m) +
                          " outside entropy-coded data");
      }
      if (pos + 2 > b_.size()) {
        throw DecodeError("JPEG: truncated " + MarkerName(m) + " segment");
      }
      const std::size_t len = Read16(b_, pos);
      if (len < 2 || pos + len > b_.size()) {
        throw DecodeError("JPEG: truncated " + MarkerName(m) + " segment");
      }
      std::span<const std::uint8_t> seg = b_.subspan(pos + 2, len - 2);
      if (m == internal::kDQT) {
        ParseDqt(seg);
      } else if (m == internal::kDHT) {
        ParseDht(seg);
      } else if (m == 0xC0 || m == 0xC1) {
        ParseSof(seg);
      } else if (m == 0xC2 || m == 0xC6 || m == 0xCA || m == 0xCE) {
        throw UnsupportedFeature("JPEG: progressive coding (" +
                                 MarkerName(m) + ") is not supported");
      } else if (m == 0xC3 || m == 0xC7 || m == 0xCB || m == 0xCF) {
        throw UnsupportedFeature("JPEG: lossless coding (" + MarkerName(m) +
                                 ") is not supported");
      } else if (m == 0xC5) {
        throw UnsupportedFeature("JPEG: hierarchical coding is not supported");
      } else if (m == internal::kDAC || m == 0xC9) {
        throw UnsupportedFeature("JPEG: arithmetic coding (" + MarkerName(m) +
                                 ") is not supported");
      } else if (m == internal::kDRI) {
        if (seg.size() != 2) throw DecodeError("JPEG: bad DRI length");
        restart_interval_ = static_cast<int>(Read16(seg, 0));
      } else if (m == internal::kSOS) {
        if (scanned) {
          throw UnsupportedFeature("JPEG: multi-scan baseline images are not "
                                   "supported");
        }
        pos = DecodeScan(seg, pos + len);
        scanned = true;
        continue;
      }
      pos += len;
    }
    if (!scanned) throw DecodeError("JPEG: no SOS segment before EOI");
    return ToImage();
  }

 private:
  // Offset of the next marker's 0xFF at or after pos, skipping fill bytes.
  std::optional<std::size_t> NextMarker(std::size_t pos) const {
    if (pos + 1 >= b_.size()) return std::nullopt;
    if (b_[pos] != 0xFF) {
      throw DecodeError("JPEG: expected marker at offset " +
                        std::to_string(pos));
    }
    while (pos + 1 < b_.size() && b_[pos + 1] == 0xFF) ++pos;
    if (pos + 1 >= b_.size()) return std::nullopt;
    return pos;
  }

  void ParseDqt(std::span<const std::uint8_t> s) {
    std::size_t p = 0;
    while (p < s.size()) {
      const int pq = s[p] >> 4, tq = s[p] & 15;
      if (tq > 3) throw DecodeError("JPEG: DQT table id out of range");
      const std::size_t need = pq ? 128 : 64;
      if (p + 1 + need > s.size()) throw DecodeError("JPEG: DQT truncated");
      for (int k = 0; k < 64; ++k) {
        quant_[tq][kZigzagToNatural[k]] =
            pq ? Read16(s, p + 1 + 2 * k) : s[p + 1 + k];
      }
      quant_defined_[tq] = true;
      p += 1 + need;
    }
  }

  void ParseDht(std::span<const std::uint8_t> s) {
    std::size_t p = 0;
    while (p < s.size()) {
      if (p + 17 > s.size()) throw DecodeError("JPEG: DHT truncated");
      const int tc = s[p] >> 4, th = s[p] & 15;
      if (tc > 1 || th > 3) throw DecodeError("JPEG: DHT table id out of range");
      std::array<std::uint8_t, 16> bits;
      std::size_t total = 0;
      for (int i = 0; i < 16; ++i) {
        bits[i] = s[p + 1 + i];
        total += bits[i];
      }
      if (total > 256 || p + 17 + total > s.size()) {
        throw DecodeError("JPEG: DHT truncated");
      }
      std::vector<std::uint8_t> vals(s.begin() + p + 17,
                                     s.begin() + p + 17 + total);
      (tc == 0 ? dc_ : ac_)[th].Build(bits, std::move(vals));
      p += 17 + total;
    }
  }

  void ParseSof(std::span<const std::uint8_t> s) {
    if (s.size() < 6) throw DecodeError("JPEG: SOF truncated");
    if (s[0] != 8) {
      throw UnsupportedFeature("JPEG: sample precision " +
                               std::to_string(s[0]) + " is not supported");
    }
    height_ = Read16(s, 1);
    width_ = Read16(s, 3);
    const int n = s[5];
    if (height_ == 0 || width_ == 0) {
      throw UnsupportedFeature("JPEG: DNL-defined height is not supported");
    }
    if (n != 1 && n != 3) {
      throw UnsupportedFeature("JPEG: " + std::to_string(n) +
                               "-component images are not supported");
    }
    if (s.size() != 6 + 3 * static_cast<std::size_t>(n)) {
      throw DecodeError("JPEG: SOF length does not match component count");
    }
    comps_.resize(n);
    for (int i = 0; i < n; ++i) {
      FrameComponent& c = comps_[i];
      c.id = s[6 + 3 * i];
      c.h = s[7 + 3 * i] >> 4;
      c.v = s[7 + 3 * i] & 15;
      c.quant = s[8 + 3 * i];
      if (c.h < 1 || c.h > 2 || c.v < 1 || c.v > 2 || c.quant > 3) {
        throw UnsupportedFeature("JPEG: sampling factors other than 1 or 2");
      }
      hmax_ = std::max(hmax_, c.h);
      vmax_ = std::max(vmax_, c.v);
    }
    const std::size_t mcus_x = (width_ + 8 * hmax_ - 1) / (8 * hmax_);
    const std::size_t mcus_y = (height_ + 8 * vmax_ - 1) / (8 * vmax_);
    for (FrameComponent& c : comps_) {
      c.blocks_w = mcus_x * c.h;
      c.blocks_h = mcus_y * c.v;
      c.plane.assign(c.blocks_w * 8 * c.blocks_h * 8, 0);
    }
  }

  std::size_t DecodeScan(std::span<const std::uint8_t> s, std::size_t data) {
    if (comps_.empty()) throw DecodeError("JPEG: SOS before SOF");
    if (s.empty()) throw DecodeError("JPEG: SOS truncated");
    const std::size_t ns = s[0];
    if (s.size() != 4 + 2 * ns) {
      throw DecodeError("JPEG: SOS length does not match component count");
    }
    if (ns != comps_.size()) {
      throw UnsupportedFeature("JPEG: non-interleaved multi-scan images are "
                               "not supported");
    }
    for (std::size_t i = 0; i < ns; ++i) {
      const int id = s[1 + 2 * i];
      auto it = std::find_if(comps_.begin(), comps_.end(),
                             [id](const FrameComponent& c) { return c.id == id; });
      if (it == comps_.end()) throw DecodeError("JPEG: SOS names unknown component");
      it->dc_table = s[2 + 2 * i] >> 4;
      it->ac_table = s[2 + 2 * i] & 15;
      if (it->dc_table > 3 || it->ac_table > 3 || !dc_[it->dc_table].defined ||
          !ac_[it->ac_table].defined) {
        throw DecodeError("JPEG: SOS references an undefined Huffman table");
      }
      if (!quant_defined_[it->quant]) {
        throw DecodeError("JPEG: frame references an undefined DQT table");
      }
    }
    const std::size_t ss = s[1 + 2 * ns], se = s[2 + 2 * ns];
    if (ss != 0 || se != 63 || s[3 + 2 * ns] != 0) {
      throw UnsupportedFeature("JPEG: spectral selection / successive "
                               "approximation is not supported");
    }

    BitReader reader(b_, data);
    const std::size_t mcus_x = comps_[0].blocks_w / comps_[0].h;
    const std::size_t mcus_y = comps_[0].blocks_h / comps_[0].v;
    std::vector<int> pred(comps_.size(), 0);
    int restarts = 0;
    std::size_t mcu = 0;
    for (std::size_t my = 0; my < mcus_y; ++my) {
      for (std::size_t mx = 0; mx < mcus_x; ++mx, ++mcu) {
        if (restart_interval_ > 0 && mcu > 0 && mcu % restart_interval_ == 0) {
          reader.Restart(restarts++);
          std::fill(pred.begin(), pred.end(), 0);
        }
        for (std::size_t ci = 0; ci < comps_.size(); ++ci) {
          FrameComponent& c = comps_[ci];
          for (int by = 0; by < c.v; ++by) {
            for (int bx = 0; bx < c.h; ++bx) {
              DecodeBlock(reader, c, &pred[ci], mx * c.h + bx, my * c.v + by);
            }
          }
        }
      }
    }
    // Skip trailing fill bits up to the next marker.
    std::size_t pos = reader.Position();
    while (pos + 1 < b_.size() &&
           !(b_[pos] == 0xFF && b_[pos + 1] != 0x00 &&
             !(b_[pos + 1] >= 0xD0 && b_[pos + 1] <= 0xD7))) {
      ++pos;
    }
    return pos;
  }

  void DecodeBlock(BitReader& r, FrameComponent& c, int* pred, std::size_t bx,
                   std::size_t by) {
    double coef[64] = {};
    const int t = DecodeSymbol(r, dc_[c.dc_table]);
    if (t > 11) throw DecodeError("JPEG: DC magnitude category out of range");
    const int diff = t ? Extend(r.Bits(t), t) : 0;
    *pred += diff;
    const auto& q = quant_[c.quant];
    coef[0] = static_cast<double>(*pred) * q[0];
    for (int k = 1; k < 64;) {
      const int rs = DecodeSymbol(r, ac_[c.ac_table]);
      const int run = rs >> 4, size = rs & 15;
      if (size == 0) {
        if (run == 15) {
          k += 16;
          continue;
        }
        break;  // EOB
      }
      k += run;
      if (k > 63) throw DecodeError("JPEG: AC coefficient index out of range");
      const int n = kZigzagToNatural[k];
      coef[n] = static_cast<double>(Extend(r.Bits(size), size)) * q[n];
      ++k;
    }
    double px[64];
    internal::InverseDct(coef, px);
    const std::size_t stride = c.blocks_w * 8;
    std::uint8_t* dst = &c.plane[by * 8 * stride + bx * 8];
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const double v = std::round(px[y * 8 + x] + 128.0);
        dst[y * stride + x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  }

  ImageU8 ToImage() const {
    const std::size_t n = comps_.size();
    ImageU8 img(width_, height_, n);
    auto out = img.data();
    auto sample = [&](const FrameComponent& c, std::size_t x, std::size_t y) {
      const std::size_t sx = x * c.h / hmax_, sy = y * c.v / vmax_;
      return static_cast<double>(c.plane[sy * c.blocks_w * 8 + sx]);
    };
    for (std::size_t y = 0; y < height_; ++y) {
      for (std::size_t x = 0; x < width_; ++x) {
        if (n == 1) {
          out[y * width_ + x] = static_cast<std::uint8_t>(sample(comps_[0], x, y));
          continue;
        }
        const double yy = sample(comps_[0], x, y);
        const double cb = sample(comps_[1], x, y) - 128.0;
        const double cr = sample(comps_[2], x, y) - 128.0;
        const double rgb[3] = {yy + 1.402 * cr,
                               yy - 0.344136 * cb - 0.714136 * cr,
                               yy + 1.772 * cb};
        for (int k = 0; k < 3; ++k) {
          out[(y * width_ + x) * 3 + k] = static_cast<std::uint8_t>(
              std::clamp(std::round(rgb[k]), 0.0, 255.0));
        }
      }
    }
    return img;
  }

  std::span<const std::uint8_t> b_;
  std::array<std::array<double, 64>, 4> quant_{};
  std::array<bool, 4> quant_defined_{};
  std::array<HuffmanDecoder, 4> dc_, ac_;
  std::vector<FrameComponent> comps_;
  std::size_t width_ = 0, height_ = 0;
  int hmax_ = 1, vmax_ = 1;
  int restart_interval_ = 0;
};

void CheckLength(std::uint8_t m, std::size_t expected, std::size_t actual,
                 std::size_t offset) {
  if (expected != actual) {
    throw DecodeError("JPEG structure: " + MarkerName(m) + " at offset " +
                      std::to_string(offset) + " has length field " +
                      std::to_string(actual) + " but its content implies " +
                      std::to_string(expected));
  }
}

}  // namespace

ImageU8 DecodeBaseline(std::span<const std::uint8_t> bytes) {
  return Decoder(bytes).Run();
}

std::vector<Segment> ValidateStructure(std::span<const std::uint8_t> b) {
  if (b.size() < 4 || b[0] != 0xFF || b[1] != internal::kSOI) {
    throw DecodeError("JPEG structure: stream does not start with SOI");
  }
  std::vector<Segment> segs;
  segs.push_back({internal::kSOI, 0, 0, 0});
  std::size_t pos = 2;
  while (true) {
    if (pos + 1 >= b.size()) {
      throw DecodeError("JPEG structure: missing EOI marker");
    }
    if (b[pos] != 0xFF || b[pos + 1] == 0x00 || b[pos + 1] == 0xFF) {
      throw DecodeError("JPEG structure: expected a marker at offset " +
                        std::to_string(pos) +
                        " (previous segment length is wrong)");
    }
    const std::uint8_t m = b[pos + 1];
    if (m == internal::kEOI) {
      segs.push_back({m, pos, 0, 0});
      if (pos + 2 != b.size()) {
        throw DecodeError("JPEG structure: trailing bytes after EOI");
      }
      return segs;
    }
    if (IsStandalone(m)) {
      throw DecodeError("JPEG structure: stray " + MarkerName(m) +
                        " at offset " + std::to_string(pos));
    }
    if (pos + 4 > b.size()) {
      throw DecodeError("JPEG structure: truncated length field");
    }
    const std::size_t len = Read16(b, pos + 2);
    if (len < 2 || pos + 2 + len > b.size()) {
      throw DecodeError("JPEG structure: " + MarkerName(m) + " at offset " +
                        std::to_string(pos) + " runs past end of stream");
    }
    std::span<const std::uint8_t> body = b.subspan(pos + 4, len - 2);
    Segment seg{m, pos, len, 0};
    switch (m) {
      case internal::kDQT: {
        std::size_t p = 0, expect = 2;
        while (p < body.size()) {
          const std::size_t n = 1 + ((body[p] >> 4) ? 128 : 64);
          p += n;
          expect += n;
        }
        CheckLength(m, expect, len, pos);
        break;
      }
      case internal::kDHT: {
        std::size_t p = 0, expect = 2;
        while (p + 17 <= body.size()) {
          std::size_t total = 0;
          for (int i = 0; i < 16; ++i) total += body[p + 1 + i];
          p += 17 + total;
          expect += 17 + total;
        }
        if (p != body.size()) expect += body.size() - p + 1;  // force mismatch
        CheckLength(m, expect, len, pos);
        break;
      }
      case 0xC0:
      case 0xC1:
      case 0xC2:
        if (body.size() < 6) CheckLength(m, 8, len, pos);
        CheckLength(m, 8 + 3 * std::size_t{body[5]}, len, pos);
        break;
      case internal::kDRI:
        CheckLength(m, 4, len, pos);
        break;
      case internal::kAPP0:
        if (body.size() >= 5 && std::equal(body.begin(), body.begin() + 5,
                                           "JFIF")) {
          const std::size_t thumb =
              body.size() >= 14 ? 3 * std::size_t{body[12]} * body[13] : 0;
          CheckLength(m, 16 + thumb, len, pos);
        }
        break;
      case internal::kSOS: {
        if (body.empty()) CheckLength(m, 6, len, pos);
        CheckLength(m, 6 + 2 * std::size_t{body[0]}, len, pos);
        std::size_t p = pos + 2 + len;
        while (p + 1 < b.size()) {
          if (b[p] == 0xFF) {
            const std::uint8_t n = b[p + 1];
            if (n == 0x00 || (n >= 0xD0 && n <= 0xD7)) {
              p += 2;
              continue;
            }
            if (n == 0xFF) {  // fill byte before a marker
              ++p;
              continue;
            }
            break;
          }
          ++p;
        }
        seg.entropy_bytes = p - (pos + 2 + len);
        segs.push_back(seg);
        pos = p;
        continue;
      }
      default:
        break;
    }
    segs.push_back(seg);
    pos += 2 + len;
  }
}

}  // namespace finedetail::jpeg
