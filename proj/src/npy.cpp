#include "sigsal/npy.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include "sigsal/errors.hpp"

namespace sigsal {
namespace {

static_assert(std::endian::native == std::endian::little, "NPY payload is written natively as little endian");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string header_dict(const Shape& shape) {
  std::ostringstream os;
  os << "{'descr': '<f8', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  if (shape.size() == 1) os << ',';
  os << "), }";
  return os.str();
}

std::string dict_value(const std::string& header, const std::string& key) {
  const std::regex re("['\"]" + key + "['\"]\\s*:\\s*");
  std::smatch m;
  if (!std::regex_search(header, m, re)) fail(ErrorCode::kFormat, "NPY header lacks key " + key);
  return header.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
}

Shape parse_shape(const std::string& header) {
  const std::string rest = dict_value(header, "shape");
  if (rest.empty() || rest[0] != '(') fail(ErrorCode::kFormat, "NPY shape is not a tuple");
  const auto close = rest.find(')');
  if (close == std::string::npos) fail(ErrorCode::kFormat, "unterminated NPY shape tuple");
  const std::string inner = rest.substr(1, close - 1);
  Shape shape;
  std::size_t pos = 0;
  while (pos < inner.size()) {
    while (pos < inner.size() && (inner[pos] == ' ' || inner[pos] == ',')) ++pos;
    if (pos >= inner.size()) break;
    std::size_t end = pos;
    while (end < inner.size() && std::isdigit(static_cast<unsigned char>(inner[end]))) ++end;
    if (end == pos) fail(ErrorCode::kFormat, "bad NPY shape entry: " + inner);
    shape.push_back(std::stoull(inner.substr(pos, end - pos)));
    pos = end;
  }
  if (shape.empty() || shape.size() > 4)
    fail(ErrorCode::kFormat, "NPY shape must have rank 1-4: (" + inner + ")");
  for (auto d : shape)
    if (d == 0) fail(ErrorCode::kFormat, "NPY shape has zero extent");
  return shape;
}

std::string quoted_value(const std::string& header, const std::string& key) {
  const std::string rest = dict_value(header, key);
  if (rest.empty() || (rest[0] != '\'' && rest[0] != '"')) fail(ErrorCode::kFormat, key + " is not a string");
  const auto end = rest.find(rest[0], 1);
  if (end == std::string::npos) fail(ErrorCode::kFormat, "unterminated string for " + key);
  return rest.substr(1, end - 1);
}

}  // namespace

std::string encode_npy(const Tensor& t) {
  validate_shape(t.shape());
  std::string dict = header_dict(t.shape());
  const std::size_t preamble = kMagicLen + 2 + 2;
  std::size_t total = preamble + dict.size() + 1;
  const std::size_t padded = (total + 63) / 64 * 64;
  dict.append(padded - total, ' ');
  dict.push_back('\n');
  if (dict.size() > 0xFFFF) fail(ErrorCode::kFormat, "NPY header too long for v1.0");

  std::string out(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto hlen = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<char>(hlen & 0xFF));
  out.push_back(static_cast<char>(hlen >> 8));
  out += dict;
  const auto payload = t.data();
  out.append(reinterpret_cast<const char*>(payload.data()), payload.size_bytes());
  return out;
}

Tensor decode_npy(const std::string& bytes) {
  if (bytes.size() < kMagicLen + 4 || bytes.compare(0, kMagicLen, kMagic, kMagicLen) != 0)
    fail(ErrorCode::kFormat, "missing NPY magic");
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) fail(ErrorCode::kFormat, "truncated NPY preamble");
    for (int i = 3; i >= 0; --i) header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    offset = 12;
  } else {
    fail(ErrorCode::kFormat, "unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) fail(ErrorCode::kFormat, "truncated NPY header");
  const std::string header = bytes.substr(offset, header_len);
  if (header.find('{') == std::string::npos || header.find('}') == std::string::npos)
    fail(ErrorCode::kFormat, "NPY header is not a dict");

  const std::string descr = quoted_value(header, "descr");
  if (descr != "<f8") fail(ErrorCode::kUnsupportedDtype, "element type '" + descr + "' (need '<f8')");
  const std::string fortran = dict_value(header, "fortran_order");
  if (fortran.rfind("False", 0) != 0) fail(ErrorCode::kFormat, "only C-order arrays are supported");
  Shape shape = parse_shape(header);

  const std::size_t count = shape_volume(shape);
  const std::size_t payload = bytes.size() - offset - header_len;
  if (payload < count * sizeof(double))
    fail(ErrorCode::kFormat, "payload holds " + std::to_string(payload / sizeof(double)) + " elements, header declares " +
                                 std::to_string(count));
  std::vector<double> data(count);
  std::memcpy(data.data(), bytes.data() + offset + header_len, count * sizeof(double));
  Tensor t(std::move(shape), std::move(data));
  if (!t.all_finite()) fail(ErrorCode::kFormat, "payload contains non-finite values");
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_npy(bytes);
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  const std::string bytes = encode_npy(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace sigsal
