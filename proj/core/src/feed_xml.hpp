#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corpusforge::xml {

// Minimal element tree; names keep their prefixes ("itunes:duration").
struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::string text;
  std::vector<std::unique_ptr<Node>> children;

  std::string_view local_name() const;
  const Node* child(std::string_view qualified_name) const;
  const Node* child_local(std::string_view local) const;
  std::vector<const Node*> children_local(std::string_view local) const;
  std::string attr(std::string_view attr_name) const;
  std::string trimmed_text() const;
};

/// Throws Error(MalformedFeed) if the document is not well-formed.
std::unique_ptr<Node> parse(std::string_view document);

}  // namespace corpusforge::xml
