#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lowalt {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Doubles packed little-endian, eight bytes each.
std::string doubles_to_base64(const double* data, std::size_t count);
std::vector<double> doubles_from_base64(const std::string& text);

}  // namespace lowalt
