#pragma once

#include <filesystem>
#include <string>

#include "sigsal/tensor.hpp"

namespace sigsal {

// NPY v1.0, '<f8', C order. Readers also accept the v2.0 header-length field.
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

// In-memory variants used by the file functions.
Tensor decode_npy(const std::string& bytes);
std::string encode_npy(const Tensor& t);

}  // namespace sigsal
