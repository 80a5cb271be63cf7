#include "postforge/code_blocks.hpp"

#include <charconv>
#include <cctype>

namespace postforge {

namespace {

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
  }
  return true;
}

// Position of an opening "<code" tag (not "<codex"), or npos.
std::size_t find_code_tag(std::string_view body, std::size_t from) {
  for (std::size_t pos = body.find('<', from); pos != std::string_view::npos;
       pos = body.find('<', pos + 1)) {
    if (starts_with_ci(body, pos, "<code") && pos + 5 < body.size() &&
        (body[pos + 5] == '>' || std::isspace(static_cast<unsigned char>(body[pos + 5])))) {
      return pos;
    }
  }
  return std::string_view::npos;
}

// Position of a ``` fence that starts a line, or npos.
std::size_t find_fence(std::string_view body, std::size_t from) {
  for (std::size_t pos = body.find("```", from); pos != std::string_view::npos;
       pos = body.find("```", pos + 1)) {
    std::size_t line_start = pos;
    while (line_start > 0 && (body[line_start - 1] == ' ' || body[line_start - 1] == '\t')) {
      --line_start;
    }
    if (line_start == 0 || body[line_start - 1] == '\n') return pos;
  }
  return std::string_view::npos;
}

}  // namespace

std::string decode_html_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    const std::size_t semi = text.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    std::string replacement;
    if (name == "lt") replacement = "<";
    else if (name == "gt") replacement = ">";
    else if (name == "amp") replacement = "&";
    else if (name == "quot") replacement = "\"";
    else if (name == "apos") replacement = "'";
    else if (name == "nbsp") replacement = " ";
    else if (name.size() > 1 && name[0] == '#') {
      unsigned code = 0;
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const std::string_view digits = name.substr(hex ? 2 : 1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), code, hex ? 16 : 10);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && code < 0x80) {
        replacement = std::string(1, static_cast<char>(code));
      }
    }
    if (replacement.empty()) {
      out.push_back('&');
      continue;
    }
    out += replacement;
    i = semi;
  }
  return out;
}

std::string strip_html(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  bool in_tag = false;
  for (char c : html) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return decode_html_entities(out);
}

CodeBlockScan extract_code_blocks(std::string_view body) {
  CodeBlockScan scan;
  std::size_t cursor = 0;
  while (cursor < body.size()) {
    const std::size_t fence = find_fence(body, cursor);
    const std::size_t tag = find_code_tag(body, cursor);
    if (fence == std::string_view::npos && tag == std::string_view::npos) break;

    if (fence != std::string_view::npos && (tag == std::string_view::npos || fence < tag)) {
      // Skip the info string ("```java") up to the end of the fence line.
      std::size_t content = body.find('\n', fence + 3);
      if (content == std::string_view::npos) {
        scan.warnings.push_back("unterminated fenced block at offset " + std::to_string(fence));
        scan.blocks.emplace_back();
        break;
      }
      ++content;
      std::size_t close = find_fence(body, content);
      if (close == std::string_view::npos) {
        scan.warnings.push_back("unterminated fenced block at offset " + std::to_string(fence));
        scan.blocks.emplace_back(body.substr(content));
        break;
      }
      std::size_t end = close;
      while (end > content && (body[end - 1] == ' ' || body[end - 1] == '\t')) --end;
      if (end > content && body[end - 1] == '\n') --end;
      scan.blocks.emplace_back(body.substr(content, end - content));
      const std::size_t after = body.find('\n', close + 3);
      cursor = after == std::string_view::npos ? body.size() : after + 1;
    } else {
      const std::size_t open_end = body.find('>', tag);
      if (open_end == std::string_view::npos) {
        scan.warnings.push_back("unterminated <code> tag at offset " + std::to_string(tag));
        scan.blocks.emplace_back();
        break;
      }
      std::size_t close = std::string_view::npos;
      for (std::size_t pos = body.find('<', open_end); pos != std::string_view::npos;
           pos = body.find('<', pos + 1)) {
        if (starts_with_ci(body, pos, "</code>")) {
          close = pos;
          break;
        }
      }
      if (close == std::string_view::npos) {
        scan.warnings.push_back("unterminated <code> block at offset " + std::to_string(tag));
        scan.blocks.push_back(decode_html_entities(body.substr(open_end + 1)));
        break;
      }
      scan.blocks.push_back(decode_html_entities(body.substr(open_end + 1, close - open_end - 1)));
      cursor = close + 7;
    }
  }
  return scan;
}

}  // namespace postforge
