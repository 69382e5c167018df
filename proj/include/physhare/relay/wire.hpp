#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace physhare::relay {

inline constexpr std::size_t kMaxFrameBytes = 16u << 20;

/// 4-byte big-endian body length followed by the canonical JSON body.
std::string encode_frame(const nlohmann::json& body);

/// Incremental decoder for a byte stream of frames. Throws CorruptInput on an
/// oversized frame or a body that is not JSON.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  std::optional<nlohmann::json> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

}  // namespace physhare::relay
