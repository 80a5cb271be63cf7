#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace postforge {

struct CodeBlockScan {
  std::vector<std::string> blocks;
  std::vector<std::string> warnings;
};

/// Pulls fenced (```) blocks and <code>...</code> regions out of a post body,
/// in document order. Whitespace inside a block is preserved; HTML entities
/// inside <code> regions are decoded. An unterminated block runs to the end of
/// the body and produces a warning.
CodeBlockScan extract_code_blocks(std::string_view body);

/// Decodes the handful of entities the Stack Exchange API emits (&lt; &gt;
/// &amp; &quot; &#39; and numeric forms).
std::string decode_html_entities(std::string_view text);

/// Drops tags and decodes entities; used for term extraction from bodies.
std::string strip_html(std::string_view html);

}  // namespace postforge
