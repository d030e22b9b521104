#pragma once

// Accessibility-tree model: textual parse/serialize, bid lookup, and the
// neighborhood-scoped comparison used to validate replayed snapshots.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace webtree {

/// Attribute keys an AX node may carry. Enumerator order is the canonical
/// serialization order (url first, then value, then state flags).
enum class AttrKey { url, value, expanded, disabled, readonly, checked, focused, hasPopup, pressed };

std::string_view attr_key_name(AttrKey key);
std::optional<AttrKey> attr_key_from_name(std::string_view name);

using AttrValue = std::variant<bool, std::string>;

struct AXNode {
  std::optional<std::string> bid;
  std::string role;
  std::string name;
  std::map<AttrKey, AttrValue> attrs;
  std::vector<AXNode> children;

  const AttrValue* attr(AttrKey key) const;
  /// Boolean view of an attribute: absent and False are false; any
  /// non-empty text other than "false" counts as true.
  bool flag(AttrKey key) const;
  std::string text_attr(AttrKey key) const;

  friend bool operator==(const AXNode&, const AXNode&) = default;
};

/// Child-index path from the root; the root itself is the empty path.
using NodePath = std::vector<std::size_t>;

enum class AxErrc { MalformedLine, DuplicateBid, BadIndent, NoRoot };

class AxParseError : public std::runtime_error {
 public:
  AxParseError(AxErrc code, std::size_t line, const std::string& what);
  AxErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  AxErrc code_;
  std::size_t line_;
};

class NoSuchBid : public std::runtime_error {
 public:
  explicit NoSuchBid(const std::string& bid) : std::runtime_error("no node with bid '" + bid + "'") {}
};

class AXTree {
 public:
  /// Empty page: a bare RootWebArea.
  AXTree();
  /// Validates the single-root and unique-bid invariants and builds the index.
  explicit AXTree(AXNode root);

  const AXNode& root() const noexcept { return root_; }
  const std::map<std::string, NodePath, std::less<>>& bid_index() const noexcept { return index_; }

  const AXNode* find(std::string_view bid) const;
  const NodePath* path_of(std::string_view bid) const;
  const AXNode& at(const NodePath& path) const;
  std::size_t node_count() const;

  friend bool operator==(const AXTree& a, const AXTree& b) { return a.root_ == b.root_; }

 private:
  AXNode root_;
  std::map<std::string, NodePath, std::less<>> index_;
};

AXTree parse_axtree(std::string_view text);
std::string serialize_axtree(const AXTree& tree);

/// Quotes text the way names and text attributes are written in the AX format.
std::string quote_ax_text(std::string_view text);

std::optional<AXNode> find_node(const AXTree& tree, std::string_view bid);

/// Semantic equivalence: role, trimmed name, and the state attributes
/// {value, disabled, checked, readonly, expanded, pressed}. Bid and url are
/// ignored; an absent boolean state equals False.
bool node_equivalent(const AXNode& a, const AXNode& b);

/// Paths of the pivotal node's ancestors, its descendants, and the children
/// of its ancestors, in preorder.
struct Neighborhood {
  NodePath pivotal;
  std::vector<NodePath> members;

  bool contains(const NodePath& path) const;
};

Neighborhood neighborhood(const AXTree& tree, std::string_view pivotal_bid);

/// Three-step snapshot check anchored at `pivotal_bid`: identity, node
/// equivalence, then positional equivalence over the expected tree's
/// neighborhood. Without a bid the root is the anchor, which makes the
/// neighborhood the whole tree. Throws NoSuchBid when the bid is absent
/// from `expected`.
bool compare_observation(const AXTree& expected, const AXTree& actual,
                         std::optional<std::string_view> pivotal_bid);

}  // namespace webtree
