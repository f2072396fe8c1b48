#include "mixgen/dataio/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

namespace mixgen::dataio {

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept {
  static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= sizeof(kPng) && std::equal(std::begin(kPng), std::end(kPng), bytes.begin())) {
    return ImageFormat::Png;
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return ImageFormat::Jpeg;
  }
  return ImageFormat::Unknown;
}

namespace {

Rgb8Image decode_png(std::span<const std::uint8_t> bytes, const std::string& context) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::DecodeError, context + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Rgb8Image out;
  out.height = img.height;
  out.width = img.width;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  // Alpha, if any, is composited over black.
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string message = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::DecodeError, context + ": " + message);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
  bool warned = false;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_emit_message(j_common_ptr cinfo, int level) {
  // Level -1 is a corrupt-data warning (e.g. premature end of file). libjpeg
  // would pad the image and continue; treat it as a decode failure.
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  if (level < 0 && !err->warned) {
    err->warned = true;
    (*cinfo->err->format_message)(cinfo, err->message);
  }
}

Rgb8Image decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& context) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  err.message[0] = '\0';

  Rgb8Image out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::DecodeError, context + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::UnsupportedFormat, context + ": CMYK JPEG");
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.height = cinfo.output_height;
  out.width = cinfo.output_width;
  out.pixels.resize(out.height * out.width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (err.warned) throw Error(ErrorCode::DecodeError, context + ": " + err.message);
  return out;
}

}  // namespace

Rgb8Image decode_image(std::span<const std::uint8_t> bytes, const std::string& context) {
  switch (sniff_format(bytes)) {
    case ImageFormat::Png: return decode_png(bytes, context);
    case ImageFormat::Jpeg: return decode_jpeg(bytes, context);
    case ImageFormat::Unknown: break;
  }
  throw Error(ErrorCode::UnsupportedFormat, context + ": not a PNG or JPEG file");
}

ImageTensor to_tensor(const Rgb8Image& image) {
  std::vector<float> data(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), data.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return ImageTensor::create(image.height, image.width, std::move(data));
}

ImageTensor resize_bilinear(const ImageTensor& src, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw Error(ErrorCode::InvalidImage, "resize target must be positive");
  if (src.height() == height && src.width() == width) return src;

  struct Tap {
    std::size_t i0, i1;
    float frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
      double pos = (static_cast<double>(o) + 0.5) * scale - 0.5;
      pos = std::clamp(pos, 0.0, static_cast<double>(in - 1));
      const auto i0 = static_cast<std::size_t>(pos);
      t[o] = {i0, std::min(i0 + 1, in - 1), static_cast<float>(pos - static_cast<double>(i0))};
    }
    return t;
  };
  const auto ys = taps(src.height(), height);
  const auto xs = taps(src.width(), width);

  constexpr std::size_t C = ImageTensor::kChannels;
  const auto in = src.data();
  const std::size_t in_stride = src.width() * C;
  std::vector<float> out(height * width * C);
  std::vector<float> top(width * C), bottom(width * C);
  for (std::size_t y = 0; y < height; ++y) {
    const float* r0 = in.data() + ys[y].i0 * in_stride;
    const float* r1 = in.data() + ys[y].i1 * in_stride;
    for (std::size_t x = 0; x < width; ++x) {
      const Tap& tx = xs[x];
      for (std::size_t c = 0; c < C; ++c) {
        const float a0 = r0[tx.i0 * C + c], a1 = r0[tx.i1 * C + c];
        const float b0 = r1[tx.i0 * C + c], b1 = r1[tx.i1 * C + c];
        top[x * C + c] = a0 + tx.frac * (a1 - a0);
        bottom[x * C + c] = b0 + tx.frac * (b1 - b0);
      }
    }
    float* dst = out.data() + y * width * C;
    const float fy = ys[y].frac;
    for (std::size_t k = 0; k < width * C; ++k) {
      dst[k] = std::clamp(top[k] + fy * (bottom[k] - top[k]), 0.0f, 1.0f);
    }
  }
  return ImageTensor(ImageTensor::Unchecked{}, height, width, std::move(out));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

ImageTensor load_image(const std::filesystem::path& path, std::size_t target_height,
                       std::size_t target_width) {
  const auto bytes = read_file(path);
  return resize_bilinear(to_tensor(decode_image(bytes, path.string())), target_height, target_width);
}

Rgb8Image quantize(const ImageTensor& image) {
  Rgb8Image out;
  out.height = image.height();
  out.width = image.width();
  out.pixels.resize(image.size());
  const auto data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) out.pixels[i] = quantize(data[i]);
  return out;
}

std::vector<std::uint8_t> encode_png(const Rgb8Image& image) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  img.flags = PNG_IMAGE_FLAG_FAST;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("png encode: ") + img.message);
  }
  std::vector<std::uint8_t> buffer(size);
  if (!png_image_write_to_memory(&img, buffer.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("png encode: ") + img.message);
  }
  buffer.resize(size);
  return buffer;
}

std::vector<std::uint8_t> encode_jpeg(const Rgb8Image& image, int quality) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    throw Error(ErrorCode::Io, std::string("jpeg encode: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(image.pixels.data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) * image.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(mem, mem + mem_size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return out;
}

void write_png(const std::filesystem::path& path, const ImageTensor& image) {
  write_file(path, encode_png(quantize(image)));
}

}  // namespace mixgen::dataio
