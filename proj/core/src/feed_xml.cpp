#include "feed_xml.hpp"

#include <expat.h>

#include "corpusforge/error.hpp"

namespace corpusforge::xml {
namespace {

struct Builder {
  std::unique_ptr<Node> root;
  std::vector<Node*> stack;
};

void on_start(void* user, const XML_Char* name, const XML_Char** atts) {
  auto& b = *static_cast<Builder*>(user);
  auto node = std::make_unique<Node>();
  node->name = name;
  for (int i = 0; atts[i] != nullptr; i += 2) node->attrs.emplace_back(atts[i], atts[i + 1]);
  Node* raw = node.get();
  if (b.stack.empty()) {
    b.root = std::move(node);
  } else {
    b.stack.back()->children.push_back(std::move(node));
  }
  b.stack.push_back(raw);
}

void on_end(void* user, const XML_Char*) { static_cast<Builder*>(user)->stack.pop_back(); }

void on_text(void* user, const XML_Char* s, int len) {
  auto& b = *static_cast<Builder*>(user);
  if (!b.stack.empty()) b.stack.back()->text.append(s, static_cast<std::size_t>(len));
}

std::string_view strip_prefix(std::string_view name) {
  const auto colon = name.find(':');
  return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

}  // namespace

std::string_view Node::local_name() const { return strip_prefix(name); }

const Node* Node::child(std::string_view qualified_name) const {
  for (const auto& c : children)
    if (c->name == qualified_name) return c.get();
  return nullptr;
}

const Node* Node::child_local(std::string_view local) const {
  for (const auto& c : children)
    if (c->local_name() == local) return c.get();
  return nullptr;
}

std::vector<const Node*> Node::children_local(std::string_view local) const {
  std::vector<const Node*> out;
  for (const auto& c : children)
    if (c->local_name() == local) out.push_back(c.get());
  return out;
}

std::string Node::attr(std::string_view attr_name) const {
  for (const auto& [k, v] : attrs)
    if (k == attr_name) return v;
  return {};
}

std::string Node::trimmed_text() const {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

std::unique_ptr<Node> parse(std::string_view document) {
  Builder builder;
  XML_Parser parser = XML_ParserCreate("UTF-8");
  if (parser == nullptr) raise(ErrorCode::Io, "XML_ParserCreate failed");
  XML_SetUserData(parser, &builder);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_text);
  const auto status = XML_Parse(parser, document.data(), static_cast<int>(document.size()), XML_TRUE);
  if (status != XML_STATUS_OK) {
    std::string msg = std::string(XML_ErrorString(XML_GetErrorCode(parser))) + " at line " +
                      std::to_string(XML_GetCurrentLineNumber(parser));
    XML_ParserFree(parser);
    raise(ErrorCode::MalformedFeed, msg);
  }
  XML_ParserFree(parser);
  if (!builder.root) raise(ErrorCode::MalformedFeed, "no root element");
  return std::move(builder.root);
}

}  // namespace corpusforge::xml
