#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace statewalk {

struct TreeHasher;

enum class NodeKind { plain, list_container, web_container };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view text);

/// 64-bit structural digest of a view tree. Equal canonical trees hash equal
/// on every platform.
struct StructureHash {
  std::uint64_t value = 0;

  /// Fixed-width lowercase hex, 16 characters.
  std::string hex() const;
  static StructureHash from_hex(std::string_view text);

  friend auto operator<=>(const StructureHash&, const StructureHash&) = default;
};

/// Sequence of child indices from the root. Paths handed out by environments
/// refer to the canonical (hash-sorted) child order.
using WidgetPath = std::vector<std::size_t>;

std::string path_to_string(const WidgetPath& path);

/// One node of a hierarchical UI tree.
///
/// The subtree node count is maintained by every mutator and the structure
/// hash is cached lazily; mutators drop the cache on the mutated node and on
/// every ancestor reached through modify_at(). Web containers keep their raw
/// markup and carry the parsed element tree as children.
class ViewNode {
 public:
  ViewNode() : ViewNode(std::string{}) {}
  explicit ViewNode(std::string tag, NodeKind kind = NodeKind::plain);

  static ViewNode leaf(std::string tag);
  static ViewNode node(std::string tag, std::vector<ViewNode> children);
  static ViewNode list(std::string tag, std::vector<ViewNode> rows);
  /// Throws MarkupParseError if the markup is unbalanced.
  static ViewNode web(std::string tag, std::string markup);

  ViewNode(const ViewNode& other);
  ViewNode(ViewNode&& other) noexcept;
  ViewNode& operator=(const ViewNode& other);
  ViewNode& operator=(ViewNode&& other) noexcept;
  ~ViewNode() = default;

  const std::string& tag() const { return tag_; }
  NodeKind kind() const { return kind_; }
  const std::vector<ViewNode>& children() const { return children_; }
  const std::optional<std::string>& markup() const { return markup_; }
  std::size_t subtree_count() const { return count_; }
  std::optional<StructureHash> cached_hash() const;

  void set_tag(std::string tag);
  void insert_child(std::size_t position, ViewNode child);
  void add_child(ViewNode child) { insert_child(children_.size(), std::move(child)); }
  void remove_child(std::size_t position);
  void set_children(std::vector<ViewNode> children);
  /// Only valid on web containers; re-parses the markup into children.
  void set_markup(std::string markup);

  /// nullptr if the path leaves the tree.
  const ViewNode* find(const WidgetPath& path) const;

  /// Applies `edit` to the node at `path`, then refreshes counts and drops
  /// cached hashes along the path. Throws ResolutionError on a bad path and
  /// std::logic_error when the path descends into a web container.
  void modify_at(const WidgetPath& path, const std::function<void(ViewNode&)>& edit);

 private:
  friend struct TreeHasher;
  void invalidate() { has_hash_.store(false, std::memory_order_release); }
  void recount();
  void require_not_web(const char* op) const;

  std::string tag_;
  NodeKind kind_ = NodeKind::plain;
  std::vector<ViewNode> children_;
  std::optional<std::string> markup_;
  std::size_t count_ = 1;
  mutable std::atomic<bool> has_hash_{false};
  mutable std::atomic<std::uint64_t> hash_{0};
};

/// Bottom-up structure hash. Web markup is expanded into children, children
/// are ordered by hash, and equal-hash rows of a list container count once.
/// Populates the cache of every visited node.
StructureHash tree_hash(const ViewNode& root);

/// The exact byte string hashed for `node`: "tag" for a childless node,
/// otherwise "tag(h1,h2,...)" with sorted (and, for lists, deduplicated)
/// 16-digit hex child hashes.
std::string canonical_string(const ViewNode& node);

/// FNV-1a 64 over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Parses the restricted tag grammar used inside web containers: open,
/// close and self-closing tags. Attributes, text and `<!...>` / `<?...>`
/// declarations are ignored. Returns the top-level elements.
std::vector<ViewNode> parse_web_markup(std::string_view markup);

struct PathMapping {
  WidgetPath canonical;
  WidgetPath source;
};

/// Copy of `root` with every child list stably sorted by structure hash.
/// When `mapping` is given, receives the canonical→source path of each node.
ViewNode canonicalize(const ViewNode& root, std::vector<PathMapping>* mapping = nullptr);

/// Default cutoff for accepting a child pair inside similarity().
inline constexpr double kDefaultMatchingCutoff = 0.5;

/// Structural similarity in [0, 1]. Equal hashes give 1 and differing root
/// tags give 0. Otherwise each child of `s`, in order, is greedily paired with
/// the first unconsumed child of `t` whose recursive similarity exceeds
/// `matching_cutoff`; the pair contributes similarity × t-child node count.
/// Result is 2·hits / (|s| + |t|), hits starting at 1 for the roots.
double similarity(const ViewNode& s, const ViewNode& t,
                  double matching_cutoff = kDefaultMatchingCutoff);

/// Maps a locator recorded against `expected` onto `observed`: per level, the
/// child with the same structure hash and the same rank among equal-hash
/// siblings, falling back to the same rank among same-tag siblings.
std::optional<WidgetPath> resolve_locator(const ViewNode& expected, const WidgetPath& path,
                                          const ViewNode& observed);

nlohmann::json to_json(const ViewNode& node);
/// Throws SpecError naming the offending JSON location.
ViewNode view_node_from_json(const nlohmann::json& doc, const std::string& where = "tree");

}  // namespace statewalk
