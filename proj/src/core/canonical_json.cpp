#include "physhare/core/canonical_json.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace physhare {

namespace {

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("canonical JSON cannot encode non-finite numbers");
  }
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", kCanonicalPrecision, v);
  std::string_view text(buf.data(), static_cast<std::size_t>(n));
  // Values that round to zero from below print as "-0.000000".
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string_view::npos) {
    text.remove_prefix(1);
  }
  out.append(text);
}

void write(std::string& out, const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        out += nlohmann::json(it.key()).dump();
        out.push_back(':');
        write(out, it.value());
      }
      out.push_back('}');
      break;
    }
    case nlohmann::json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out.push_back(',');
        first = false;
        write(out, v);
      }
      out.push_back(']');
      break;
    }
    case nlohmann::json::value_t::number_float:
      write_number(out, j.get<double>());
      break;
    default:
      out += j.dump();
      break;
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& doc) {
  std::string out;
  write(out, doc);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string chain_digest(std::string_view previous, std::string_view bytes) {
  std::string buf;
  buf.reserve(previous.size() + bytes.size());
  buf.append(previous);
  buf.append(bytes);
  return sha256_hex(buf);
}

}  // namespace physhare
