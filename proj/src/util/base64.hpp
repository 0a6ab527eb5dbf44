#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepsound::util {

std::string base64_encode(const std::vector<unsigned char>& bytes);

/// Strict decoder: length must be a multiple of 4 with padding only at the end.
std::optional<std::vector<unsigned char>> base64_decode(std::string_view text);

}  // namespace deepsound::util
