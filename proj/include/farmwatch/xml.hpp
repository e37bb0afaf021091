// Copyright 2026 The farmwatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <expat.h>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace farmwatch::xml {

class ParseError : public std::runtime_error {
 public:
  ParseError(long line, const std::string& what) : std::runtime_error(what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // document order
  std::vector<Element> children;
  std::string text;  // concatenated character data directly inside this element
  long line = 0;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

namespace detail {

struct Builder {
  std::vector<Element*> stack;
  std::optional<Element> root;
  XML_Parser parser = nullptr;

  static void on_start(void* ud, const XML_Char* name, const XML_Char** attrs) {
    auto* self = static_cast<Builder*>(ud);
    Element e;
    e.name = name;
    e.line = static_cast<long>(XML_GetCurrentLineNumber(self->parser));
    for (int i = 0; attrs[i] != nullptr; i += 2) e.attributes.emplace_back(attrs[i], attrs[i + 1]);
    if (self->stack.empty()) {
      self->root = std::move(e);
      self->stack.push_back(&*self->root);
    } else {
      auto& kids = self->stack.back()->children;
      kids.push_back(std::move(e));
      self->stack.push_back(&kids.back());
    }
  }

  static void on_end(void* ud, const XML_Char*) { static_cast<Builder*>(ud)->stack.pop_back(); }

  static void on_text(void* ud, const XML_Char* s, int len) {
    auto* self = static_cast<Builder*>(ud);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

}  // namespace detail

// Parses a complete document into an element tree. Comments, processing
// instructions and the DOCTYPE declaration are skipped.
inline Element parse(std::string_view text) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                                       &XML_ParserFree);
  if (!parser) throw std::bad_alloc();
  detail::Builder b;
  b.parser = parser.get();
  XML_SetUserData(parser.get(), &b);
  XML_SetElementHandler(parser.get(), &detail::Builder::on_start, &detail::Builder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &detail::Builder::on_text);
  if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) == XML_STATUS_ERROR) {
    long line = static_cast<long>(XML_GetCurrentLineNumber(parser.get()));
    throw ParseError(line, std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                               std::to_string(line));
  }
  if (!b.root) throw ParseError(1, "document has no root element");
  return std::move(*b.root);
}

inline std::string escape(std::string_view s, bool attribute) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
        } else {
          out += c;
        }
        break;
      case '\n':
      case '\t':
      case '\r':
        if (attribute) {
          out += "&#" + std::to_string(static_cast<int>(c)) + ";";
        } else {
          out += c;
        }
        break;
      default:
        // Control characters are not representable in XML 1.0.
        if (static_cast<unsigned char>(c) < 0x20) {
          out += "\xEF\xBF\xBD";
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string escape_text(std::string_view s) { return escape(s, false); }
inline std::string escape_attr(std::string_view s) { return escape(s, true); }

}  // namespace farmwatch::xml
