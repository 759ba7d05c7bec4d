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
#include <cmath>
#include <cstdlib>

#include "finedetail/error.h"
#include "finedetail/jpeg.h"
#include "jpeg_internal.h"

namespace finedetail::jpeg {
namespace {

using internal::HuffmanCodes;
using internal::HuffmanSpec;

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>* out) : out_(out) {}

  void Put(std::uint32_t bits, int count) {
    acc_ = (acc_ << count) | (bits & ((1u << count) - 1));
    nbits_ += count;
    while (nbits_ >= 8) {
      const auto byte = static_cast<std::uint8_t>(acc_ >> (nbits_ - 8));
      out_->push_back(byte);
      if (byte == 0xFF) out_->push_back(0x00);
      nbits_ -= 8;
    }
    acc_ &= (std::uint64_t{1} << nbits_) - 1;
  }

  // Pads the final partial byte with 1-bits.
  void Flush() {
    if (nbits_ > 0) Put(0x7F, 8 - nbits_);
  }

 private:
  std::vector<std::uint8_t>* out_;
  std::uint64_t acc_ = 0;
  int nbits_ = 0;
};

int BitLength(int v) {
  int a = std::abs(v), n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

// Magnitude category plus the appended bits; negative values are sent as
// v - 1 in ones-complement form.
void PutValue(BitWriter& w, int v, int size) {
  if (size == 0) return;
  w.Put(static_cast<std::uint32_t>(v < 0 ? v - 1 : v), size);
}

void PutSymbol(BitWriter& w, const HuffmanCodes& codes, int symbol) {
  w.Put(codes.code[symbol], codes.size[symbol]);
}

struct Component {
  int id;
  int h, v;  // sampling factors
  int quant_index;
  int dc_table, ac_table;
};

void Put16(std::vector<std::uint8_t>& out, std::size_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void PutMarker(std::vector<std::uint8_t>& out, std::uint8_t m) {
  out.push_back(0xFF);
  out.push_back(m);
}

void WriteDht(std::vector<std::uint8_t>& out) {
  const HuffmanSpec* specs[4] = {
      &internal::StandardDcLuma(), &internal::StandardAcLuma(),
      &internal::StandardDcChroma(), &internal::StandardAcChroma()};
  const std::uint8_t ids[4] = {0x00, 0x10, 0x01, 0x11};
  std::size_t len = 2;
  for (const HuffmanSpec* s : specs) len += 17 + s->values.size();
  PutMarker(out, internal::kDHT);
  Put16(out, len);
  for (int i = 0; i < 4; ++i) {
    out.push_back(ids[i]);
    out.insert(out.end(), specs[i]->bits.begin(), specs[i]->bits.end());
    out.insert(out.end(), specs[i]->values.begin(), specs[i]->values.end());
  }
}

class BlockCoder {
 public:
  BlockCoder(const QuantTable& table, const HuffmanCodes& dc,
             const HuffmanCodes& ac)
      : dc_(dc), ac_(ac) {
    for (int k = 0; k < 64; ++k) {
      quant_natural_[kZigzagToNatural[k]] = table.zigzag[k];
    }
  }

  // samples are level-shifted (value - 128).
  void Encode(const double* samples, int* dc_pred, BitWriter& w) const {
    double coef[64];
    internal::ForwardDct(samples, coef);
    int zz[64];
    for (int k = 0; k < 64; ++k) {
      const int n = kZigzagToNatural[k];
      zz[k] = static_cast<int>(std::round(coef[n] / quant_natural_[n]));
    }
    const int diff = zz[0] - *dc_pred;
    *dc_pred = zz[0];
    const int dc_size = BitLength(diff);
    PutSymbol(w, dc_, dc_size);
    PutValue(w, diff, dc_size);

    int run = 0;
    for (int k = 1; k < 64; ++k) {
      if (zz[k] == 0) {
        ++run;
        continue;
      }
      while (run > 15) {
        PutSymbol(w, ac_, 0xF0);
        run -= 16;
      }
      const int size = BitLength(zz[k]);
      PutSymbol(w, ac_, (run << 4) | size);
      PutValue(w, zz[k], size);
      run = 0;
    }
    if (run > 0) PutSymbol(w, ac_, 0x00);
  }

 private:
  const HuffmanCodes& dc_;
  const HuffmanCodes& ac_;
  double quant_natural_[64];
};

}  // namespace

std::vector<std::uint8_t> EncodeBaseline(const ImageU8& img,
                                         const EncoderConfig& cfg) {
  FD_REQUIRE(img.channels() == 1 || img.channels() == 3,
             "JPEG encoder needs 1 or 3 channels");
  FD_REQUIRE(img.width() >= 1 && img.height() >= 1, "empty image");
  FD_REQUIRE(img.width() <= 65535 && img.height() <= 65535,
             "image too large for a JPEG frame");
  FD_REQUIRE(cfg.restart_interval >= 0 && cfg.restart_interval <= 65535,
             "restart interval out of range");

  const QuantTable qluma = ScaleQuantTable(LuminanceBaseTable(), cfg.quality);
  const QuantTable qchroma =
      ScaleQuantTable(ChrominanceBaseTable(), cfg.quality);
  const bool color = img.channels() == 3;
  const bool sub = color && cfg.subsampling == Subsampling::k420;

  std::vector<Component> comps;
  if (color) {
    comps = {{1, sub ? 2 : 1, sub ? 2 : 1, 0, 0, 0},
             {2, 1, 1, 1, 1, 1},
             {3, 1, 1, 1, 1, 1}};
  } else {
    comps = {{1, 1, 1, 0, 0, 0}};
  }
  const int mcu_w = 8 * comps[0].h;
  const int mcu_h = 8 * comps[0].v;
  const std::size_t width = img.width(), height = img.height();
  const std::size_t mcus_x = (width + mcu_w - 1) / mcu_w;
  const std::size_t mcus_y = (height + mcu_h - 1) / mcu_h;

  std::vector<std::uint8_t> out;
  out.reserve(width * height / 2 + 1024);

  PutMarker(out, internal::kSOI);
  // APP0 / JFIF 1.01, no thumbnail, 1:1 aspect.
  PutMarker(out, internal::kAPP0);
  Put16(out, 16);
  for (char c : {'J', 'F', 'I', 'F', '\0'}) out.push_back(static_cast<std::uint8_t>(c));
  out.insert(out.end(), {0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00});

  PutMarker(out, internal::kDQT);
  Put16(out, 2 + 65 * (color ? 2 : 1));
  out.push_back(0x00);
  out.insert(out.end(), qluma.zigzag.begin(), qluma.zigzag.end());
  if (color) {
    out.push_back(0x01);
    out.insert(out.end(), qchroma.zigzag.begin(), qchroma.zigzag.end());
  }

  PutMarker(out, internal::kSOF0);
  Put16(out, 8 + 3 * comps.size());
  out.push_back(8);
  Put16(out, height);
  Put16(out, width);
  out.push_back(static_cast<std::uint8_t>(comps.size()));
  for (const Component& c : comps) {
    out.push_back(static_cast<std::uint8_t>(c.id));
    out.push_back(static_cast<std::uint8_t>((c.h << 4) | c.v));
    out.push_back(static_cast<std::uint8_t>(c.quant_index));
  }

  WriteDht(out);

  if (cfg.restart_interval > 0) {
    PutMarker(out, internal::kDRI);
    Put16(out, 4);
    Put16(out, static_cast<std::size_t>(cfg.restart_interval));
  }

  PutMarker(out, internal::kSOS);
  Put16(out, 6 + 2 * comps.size());
  out.push_back(static_cast<std::uint8_t>(comps.size()));
  for (const Component& c : comps) {
    out.push_back(static_cast<std::uint8_t>(c.id));
    out.push_back(static_cast<std::uint8_t>((c.dc_table << 4) | c.ac_table));
  }
  out.insert(out.end(), {0x00, 0x3F, 0x00});

  const HuffmanCodes dc_luma = internal::BuildCodes(internal::StandardDcLuma());
  const HuffmanCodes ac_luma = internal::BuildCodes(internal::StandardAcLuma());
  const HuffmanCodes dc_chroma =
      internal::BuildCodes(internal::StandardDcChroma());
  const HuffmanCodes ac_chroma =
      internal::BuildCodes(internal::StandardAcChroma());
  const BlockCoder luma_coder(qluma, dc_luma, ac_luma);
  const BlockCoder chroma_coder(qchroma, dc_chroma, ac_chroma);

  // One MCU row of level-shifted planes at a time. Samples beyond the image
  // edge replicate the last row/column.
  const std::size_t strip_w = mcus_x * mcu_w;
  std::vector<double> ystrip(strip_w * mcu_h);
  std::vector<double> cbstrip, crstrip;
  if (color) {
    cbstrip.resize(strip_w * mcu_h);
    crstrip.resize(strip_w * mcu_h);
  }
  const std::size_t cstrip_w = strip_w / comps[0].h;
  std::vector<double> cbsub, crsub;
  if (sub) {
    cbsub.resize(cstrip_w * 8);
    crsub.resize(cstrip_w * 8);
  }

  BitWriter writer(&out);
  int dc_pred[3] = {0, 0, 0};
  std::size_t mcu_index = 0;
  int restart_count = 0;
  const auto src = img.data();
  double block[64];

  for (std::size_t my = 0; my < mcus_y; ++my) {
    for (int sy = 0; sy < mcu_h; ++sy) {
      const std::size_t y = std::min(my * mcu_h + sy, height - 1);
      for (std::size_t sx = 0; sx < strip_w; ++sx) {
        const std::size_t x = std::min(sx, width - 1);
        const std::size_t i = sy * strip_w + sx;
        if (color) {
          const std::uint8_t* p = &src[(y * width + x) * 3];
          const double r = p[0], g = p[1], b = p[2];
          ystrip[i] = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
          cbstrip[i] = -0.168736 * r - 0.331264 * g + 0.5 * b;
          crstrip[i] = 0.5 * r - 0.418688 * g - 0.081312 * b;
        } else {
          ystrip[i] = static_cast<double>(src[y * width + x]) - 128.0;
        }
      }
    }
    if (sub) {
      for (int cy = 0; cy < 8; ++cy) {
        for (std::size_t cx = 0; cx < cstrip_w; ++cx) {
          const std::size_t a = (2 * cy) * strip_w + 2 * cx;
          const std::size_t b = a + strip_w;
          cbsub[cy * cstrip_w + cx] = 0.25 * (cbstrip[a] + cbstrip[a + 1] +
                                              cbstrip[b] + cbstrip[b + 1]);
          crsub[cy * cstrip_w + cx] = 0.25 * (crstrip[a] + crstrip[a + 1] +
                                              crstrip[b] + crstrip[b + 1]);
        }
      }
    }
    const std::vector<double>& cbplane = sub ? cbsub : cbstrip;
    const std::vector<double>& crplane = sub ? crsub : crstrip;

    for (std::size_t mx = 0; mx < mcus_x; ++mx) {
      if (cfg.restart_interval > 0 && mcu_index > 0 &&
          mcu_index % cfg.restart_interval == 0) {
        writer.Flush();
        PutMarker(out, static_cast<std::uint8_t>(internal::kRST0 +
                                                  (restart_count & 7)));
        ++restart_count;
        dc_pred[0] = dc_pred[1] = dc_pred[2] = 0;
      }
      for (int by = 0; by < comps[0].v; ++by) {
        for (int bx = 0; bx < comps[0].h; ++bx) {
          const std::size_t x0 = mx * mcu_w + bx * 8;
          for (int r = 0; r < 8; ++r) {
            std::copy_n(&ystrip[(by * 8 + r) * strip_w + x0], 8, &block[r * 8]);
          }
          luma_coder.Encode(block, &dc_pred[0], writer);
        }
      }
      if (color) {
        const std::size_t cw = sub ? cstrip_w : strip_w;
        const std::size_t x0 = mx * 8;
        // Chroma values are centered on zero already (the +128 offset of
        // the color transform cancels the level shift).
        for (int r = 0; r < 8; ++r) {
          std::copy_n(&cbplane[r * cw + x0], 8, &block[r * 8]);
        }
        chroma_coder.Encode(block, &dc_pred[1], writer);
        for (int r = 0; r < 8; ++r) {
          std::copy_n(&crplane[r * cw + x0], 8, &block[r * 8]);
        }
        chroma_coder.Encode(block, &dc_pred[2], writer);
      }
      ++mcu_index;
    }
  }
  writer.Flush();
  PutMarker(out, internal::kEOI);
  return out;
}

}  // namespace finedetail::jpeg
