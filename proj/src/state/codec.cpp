/*
 * Copyright 2026 The latewin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "latewin/state/codec.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <stdexcept>

#include "latewin/error.hpp"

namespace latewin {
namespace {

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<std::int8_t, 256> make_reverse() {
  std::array<std::int8_t, 256> table{};
  for (auto& v : table) v = -1;
  for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<std::int8_t>(i);
  return table;
}

constexpr auto kReverse = make_reverse();

void append_base64(const std::uint8_t* data, std::size_t size, std::string& out) {
  const std::size_t full = size / 3 * 3;
  std::size_t pos = out.size();
  out.resize(pos + (size + 2) / 3 * 4);
  char* dst = out.data() + pos;
  std::size_t i = 0;
  for (; i < full; i += 3) {
    const std::uint32_t v = (std::uint32_t{data[i]} << 16) | (std::uint32_t{data[i + 1]} << 8) | data[i + 2];
    *dst++ = kAlphabet[(v >> 18) & 63];
    *dst++ = kAlphabet[(v >> 12) & 63];
    *dst++ = kAlphabet[(v >> 6) & 63];
    *dst++ = kAlphabet[v & 63];
  }
  if (const std::size_t rest = size - full; rest > 0) {
    std::uint32_t v = std::uint32_t{data[i]} << 16;
    if (rest == 2) v |= std::uint32_t{data[i + 1]} << 8;
    *dst++ = kAlphabet[(v >> 18) & 63];
    *dst++ = kAlphabet[(v >> 12) & 63];
    *dst++ = rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    *dst++ = '=';
  }
}

bool decode_base64_into(std::string_view text, Bytes& out) {
  if (text.size() % 4 != 0) return false;
  out.clear();
  if (text.empty()) return true;
  std::size_t pad = 0;
  if (text.back() == '=') ++pad;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
  out.resize(text.size() / 4 * 3 - pad);
  std::uint8_t* dst = out.data();
  const std::size_t groups = text.size() / 4;
  const auto* in = reinterpret_cast<const unsigned char*>(text.data());
  // Every group but the last has no padding.
  for (std::size_t g = 0; g + 1 < groups; ++g, in += 4) {
    const std::int32_t a = kReverse[in[0]], b = kReverse[in[1]], c = kReverse[in[2]], d = kReverse[in[3]];
    if ((a | b | c | d) < 0) return false;
    const auto v = static_cast<std::uint32_t>((a << 18) | (b << 12) | (c << 6) | d);
    dst[0] = static_cast<std::uint8_t>(v >> 16);
    dst[1] = static_cast<std::uint8_t>(v >> 8);
    dst[2] = static_cast<std::uint8_t>(v);
    dst += 3;
  }
  {
    std::uint32_t v = 0;
    int valid = 4;
    for (int j = 0; j < 4; ++j) {
      const auto c = in[j];
      if (c == '=' && j >= 2) {
        valid = std::min(valid, j);
        v <<= 6;
        continue;
      }
      if (valid < 4) return false;  // data after padding
      const std::int8_t d = kReverse[c];
      if (d < 0) return false;
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    *dst++ = static_cast<std::uint8_t>(v >> 16);
    if (valid > 2) *dst++ = static_cast<std::uint8_t>(v >> 8);
    if (valid > 3) *dst++ = static_cast<std::uint8_t>(v);
  }
  return true;
}

void append_json_string(std::string_view s, std::string& out) {
  static constexpr char kHex[] = "0123456789abcdef";
  out.push_back('"');
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 0xf]);
        } else {
          // Bytes >= 0x80 pass through unchanged so arbitrary keys survive.
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

/// Cursor over one record line.
class RecordParser {
 public:
  RecordParser(std::string_view line, std::size_t index) : s_(line), index_(index) {}

  Event parse() {
    Event event;
    bool have_k = false, have_ts = false, have_p = false;
    skip_ws();
    expect('{');
    skip_ws();
    if (peek() == '}') fail("missing fields");
    while (true) {
      skip_ws();
      std::string name = parse_string();
      skip_ws();
      expect(':');
      skip_ws();
      if (name == "k") {
        if (have_k) fail("duplicate field k");
        event.key = parse_string();
        have_k = true;
      } else if (name == "ts") {
        if (have_ts) fail("duplicate field ts");
        event.event_time = parse_int();
        have_ts = true;
      } else if (name == "p") {
        if (have_p) fail("duplicate field p");
        std::string_view raw = parse_plain_string();
        if (!decode_base64_into(raw, event.payload)) fail("invalid base64 payload");
        have_p = true;
      } else {
        fail("unknown field '" + name + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      break;
    }
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    if (!have_k || !have_ts || !have_p) fail("missing fields");
    return event;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw CorruptBlock(index_, what); }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  std::int64_t parse_int() {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("invalid integer");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  /// String without escapes (base64), returned as a view.
  std::string_view parse_plain_string() {
    expect('"');
    const std::size_t begin = pos_;
    const std::size_t close = s_.find('"', pos_);
    if (close == std::string_view::npos) fail("unterminated string");
    pos_ = close + 1;
    return s_.substr(begin, close - begin);
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) fail("unterminated escape");
      const char e = s_[pos_++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case '/': out.push_back('/'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'u': append_utf8(parse_hex4(), out); break;
        default: fail("invalid escape");
      }
    }
  }

  std::uint32_t parse_hex4() {
    if (pos_ + 4 > s_.size()) fail("short \\u escape");
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + pos_ + 4, v, 16);
    if (ec != std::errc() || ptr != s_.data() + pos_ + 4) fail("invalid \\u escape");
    pos_ += 4;
    return v;
  }

  static void append_utf8(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t index_;
};

}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t size) {
  std::string out;
  append_base64(data, size, out);
  return out;
}

Bytes base64_decode(std::string_view text) {
  Bytes out;
  if (!decode_base64_into(text, out)) throw std::invalid_argument("invalid base64 input");
  return out;
}

void encode_event(const Event& event, std::string& out) {
  out += "{\"k\":";
  append_json_string(event.key, out);
  out += ",\"ts\":";
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, event.event_time);
  out.append(buf, ptr);
  out += ",\"p\":\"";
  append_base64(event.payload.data(), event.payload.size(), out);
  out += "\"}\n";
}

std::string encode_block(const Block& block) {
  std::string out;
  std::size_t estimate = 0;
  for (const auto& e : block.events()) estimate += 32 + e.key.size() + (e.payload.size() + 2) / 3 * 4;
  out.reserve(estimate);
  for (const auto& e : block.events()) encode_event(e, out);
  return out;
}

Block decode_block(std::string_view bytes, std::size_t capacity) {
  const auto records = static_cast<std::size_t>(std::count(bytes.begin(), bytes.end(), '\n'));
  Block block(std::max(capacity, records + 1));
  std::size_t index = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) throw CorruptBlock(index, "record not newline-terminated");
    block.push(RecordParser(bytes.substr(pos, nl - pos), index).parse());
    pos = nl + 1;
    ++index;
  }
  return block;
}

}  // namespace latewin
