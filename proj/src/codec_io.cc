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

// File decoding through libpng and libjpeg. Both libraries report errors via
// longjmp; nothing with a non-trivial destructor may be created between the
// setjmp and the library calls that can jump back to it.

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "finedetail/error.h"
#include "finedetail/image.h"

namespace finedetail {
namespace {

struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = "unknown libpng error";
};

void PngError(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jump, 1);
}

void PngWarning(png_structp, png_const_charp) {}

struct PngReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void PngRead(png_structp png, png_bytep out, png_size_t len) {
  auto* r = static_cast<PngReader*>(png_get_io_ptr(png));
  if (r->bytes.size() - r->pos < len) {
    png_error(png, "unexpected end of stream (truncated chunk)");
  }
  std::memcpy(out, r->bytes.data() + r->pos, len);
  r->pos += len;
}

ImageU8 DecodePng(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw DecodeError("PNG: bad signature");
  }
  PngErrorState err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           PngError, PngWarning);
  if (png == nullptr) throw DecodeError("PNG: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  PngReader reader{bytes, 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;

  if (setjmp(err.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError(std::string("PNG: ") + err.message);
  }
  if (info == nullptr) png_error(png, "cannot create info struct");
  png_set_read_fn(png, &reader, PngRead);
  png_read_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);  // keeps the high byte
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) png_error(png, "unexpected channel count");
  pixels.resize(std::size_t{width} * height * channels);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = pixels.data() + std::size_t{y} * width * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return ImageU8(width, height, channels, std::move(pixels));
}

struct JpegErrorState {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = "unknown libjpeg error";
};

void JpegErrorExit(j_common_ptr cinfo) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, state->message);
  std::longjmp(state->jump, 1);
}

void JpegOutputMessage(j_common_ptr) {}

ImageU8 DecodeJpegFile(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorState err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = JpegErrorExit;
  err.mgr.output_message = JpegOutputMessage;
  std::vector<std::uint8_t> pixels;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components == 1) {
    cinfo.out_color_space = JCS_GRAYSCALE;
  } else if (cinfo.jpeg_color_space == JCS_YCbCr ||
             cinfo.jpeg_color_space == JCS_RGB) {
    cinfo.out_color_space = JCS_RGB;
  } else {
    jpeg_destroy_decompress(&cinfo);
    throw UnsupportedFeature("JPEG: CMYK/YCCK color space is not supported");
  }
  jpeg_start_decompress(&cinfo);
  const std::size_t w = cinfo.output_width;
  const std::size_t h = cinfo.output_height;
  const std::size_t c = cinfo.output_components;
  pixels.resize(w * h * c);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + std::size_t{cinfo.output_scanline} * w * c;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  bool truncated = err.mgr.num_warnings > 0;
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (truncated) {
    throw DecodeError("JPEG: corrupt or truncated entropy-coded data");
  }
  return ImageU8(w, h, c, std::move(pixels));
}

void PngWriteToVector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void PngFlush(png_structp) {}

}  // namespace

ImageU8 DecodeImage(std::span<const std::uint8_t> bytes, ImageFormat format) {
  switch (format) {
    case ImageFormat::kPng:
      return DecodePng(bytes);
    case ImageFormat::kJpeg:
      return DecodeJpegFile(bytes);
  }
  throw ContractViolation("unknown image format");
}

std::vector<std::uint8_t> EncodePng(const ImageU8& img) {
  FD_REQUIRE(!img.empty(), "cannot encode an empty image");
  std::vector<std::uint8_t> out;
  PngErrorState err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            PngError, PngWarning);
  if (png == nullptr) throw IoError("PNG: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(img.height());

  if (setjmp(err.jump)) {
    png_destroy_write_struct(&png, &info);
    throw IoError(std::string("PNG encode: ") + err.message);
  }
  if (info == nullptr) png_error(png, "cannot create info struct");
  png_set_write_fn(png, &out, PngWriteToVector, PngFlush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (std::size_t y = 0; y < img.height(); ++y) {
    rows[y] = const_cast<png_bytep>(img.data().data() + y * img.stride());
  }
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace finedetail
