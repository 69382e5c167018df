#include "physhare/relay/wire.hpp"

#include "physhare/core/canonical_json.hpp"
#include "physhare/core/error.hpp"

namespace physhare::relay {

std::string encode_frame(const nlohmann::json& body) {
  const std::string text = canonical_dump(body);
  if (text.size() > kMaxFrameBytes) {
    throw ContractViolation("frame body exceeds the maximum frame size");
  }
  const auto n = static_cast<std::uint32_t>(text.size());
  std::string out;
  out.reserve(4 + text.size());
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
  out += text;
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<nlohmann::json> FrameDecoder::next() {
  if (buffered() < 4) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
  const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
  if (n > kMaxFrameBytes) {
    throw CorruptInput("incoming frame of " + std::to_string(n) + " bytes exceeds the limit");
  }
  if (buffered() < 4 + n) return std::nullopt;
  std::string_view body(buffer_.data() + offset_ + 4, n);
  offset_ += 4 + n;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptInput(std::string("frame body is not JSON: ") + e.what());
  }
  if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  return j;
}

}  // namespace physhare::relay
