#include "statewalk/ui_tree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "statewalk/errors.hpp"

namespace statewalk {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::plain: return "plain";
    case NodeKind::list_container: return "list_container";
    case NodeKind::web_container: return "web_container";
  }
  return "plain";
}

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "plain") return NodeKind::plain;
  if (text == "list_container") return NodeKind::list_container;
  if (text == "web_container") return NodeKind::web_container;
  throw SpecError("unknown node kind '" + std::string(text) + "'");
}

std::string StructureHash::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf, 16);
}

StructureHash StructureHash::from_hex(std::string_view text) {
  StructureHash h;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), h.value, 16);
  if (ec != std::errc{} || end != text.data() + text.size() || text.size() != 16) {
    throw SpecError("bad structure hash '" + std::string(text) + "'");
  }
  return h;
}

std::string path_to_string(const WidgetPath& path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(path[i]);
  }
  out += ']';
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// ViewNode

ViewNode::ViewNode(std::string tag, NodeKind kind) : tag_(std::move(tag)), kind_(kind) {
  if (kind_ == NodeKind::web_container) markup_ = std::string{};
}

ViewNode ViewNode::leaf(std::string tag) { return ViewNode(std::move(tag)); }

ViewNode ViewNode::node(std::string tag, std::vector<ViewNode> children) {
  ViewNode n(std::move(tag));
  n.set_children(std::move(children));
  return n;
}

ViewNode ViewNode::list(std::string tag, std::vector<ViewNode> rows) {
  ViewNode n(std::move(tag), NodeKind::list_container);
  n.set_children(std::move(rows));
  return n;
}

ViewNode ViewNode::web(std::string tag, std::string markup) {
  ViewNode n(std::move(tag), NodeKind::web_container);
  n.set_markup(std::move(markup));
  return n;
}

ViewNode::ViewNode(const ViewNode& other)
    : tag_(other.tag_),
      kind_(other.kind_),
      children_(other.children_),
      markup_(other.markup_),
      count_(other.count_) {
  hash_.store(other.hash_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  has_hash_.store(other.has_hash_.load(std::memory_order_acquire), std::memory_order_release);
}

ViewNode::ViewNode(ViewNode&& other) noexcept
    : tag_(std::move(other.tag_)),
      kind_(other.kind_),
      children_(std::move(other.children_)),
      markup_(std::move(other.markup_)),
      count_(other.count_) {
  hash_.store(other.hash_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  has_hash_.store(other.has_hash_.load(std::memory_order_acquire), std::memory_order_release);
}

ViewNode& ViewNode::operator=(const ViewNode& other) {
  if (this != &other) *this = ViewNode(other);
  return *this;
}

ViewNode& ViewNode::operator=(ViewNode&& other) noexcept {
  tag_ = std::move(other.tag_);
  kind_ = other.kind_;
  children_ = std::move(other.children_);
  markup_ = std::move(other.markup_);
  count_ = other.count_;
  hash_.store(other.hash_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  has_hash_.store(other.has_hash_.load(std::memory_order_acquire), std::memory_order_release);
  return *this;
}

std::optional<StructureHash> ViewNode::cached_hash() const {
  if (!has_hash_.load(std::memory_order_acquire)) return std::nullopt;
  return StructureHash{hash_.load(std::memory_order_relaxed)};
}

void ViewNode::recount() {
  count_ = 1;
  for (const auto& c : children_) count_ += c.count_;
}

void ViewNode::require_not_web(const char* op) const {
  if (kind_ == NodeKind::web_container) {
    throw std::logic_error(std::string(op) + ": children of web container '" + tag_ +
                           "' are derived from its markup");
  }
}

void ViewNode::set_tag(std::string tag) {
  tag_ = std::move(tag);
  invalidate();
}

void ViewNode::insert_child(std::size_t position, ViewNode child) {
  require_not_web("insert_child");
  position = std::min(position, children_.size());
  count_ += child.count_;
  children_.insert(children_.begin() + static_cast<std::ptrdiff_t>(position), std::move(child));
  invalidate();
}

void ViewNode::remove_child(std::size_t position) {
  require_not_web("remove_child");
  if (position >= children_.size()) throw std::out_of_range("remove_child: bad index");
  count_ -= children_[position].count_;
  children_.erase(children_.begin() + static_cast<std::ptrdiff_t>(position));
  invalidate();
}

void ViewNode::set_children(std::vector<ViewNode> children) {
  require_not_web("set_children");
  children_ = std::move(children);
  recount();
  invalidate();
}

void ViewNode::set_markup(std::string markup) {
  if (kind_ != NodeKind::web_container) {
    throw std::logic_error("set_markup: '" + tag_ + "' is not a web container");
  }
  children_ = parse_web_markup(markup);
  markup_ = std::move(markup);
  recount();
  invalidate();
}

const ViewNode* ViewNode::find(const WidgetPath& path) const {
  const ViewNode* cur = this;
  for (std::size_t idx : path) {
    if (idx >= cur->children_.size()) return nullptr;
    cur = &cur->children_[idx];
  }
  return cur;
}

void ViewNode::modify_at(const WidgetPath& path, const std::function<void(ViewNode&)>& edit) {
  if (path.empty()) {
    edit(*this);
    recount();
    invalidate();
    return;
  }
  require_not_web("modify_at");
  if (path.front() >= children_.size()) {
    throw ResolutionError("modify_at: path " + path_to_string(path) + " leaves node '" + tag_ +
                          "'");
  }
  children_[path.front()].modify_at(WidgetPath(path.begin() + 1, path.end()), edit);
  recount();
  invalidate();
}

// ---------------------------------------------------------------------------
// Markup

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

// Returns the index of the '>' closing a tag starting at `pos`, honoring quoted
// attribute values.
std::size_t tag_end(std::string_view m, std::size_t pos) {
  char quote = 0;
  for (std::size_t i = pos; i < m.size(); ++i) {
    char c = m[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i;
    }
  }
  throw MarkupParseError("unterminated tag at position " + std::to_string(pos), pos);
}

}  // namespace

std::vector<ViewNode> parse_web_markup(std::string_view m) {
  struct Open {
    std::string tag;
    std::size_t position;
    std::vector<ViewNode> children;
  };
  std::vector<Open> stack;
  std::vector<ViewNode> top;
  auto emit = [&](ViewNode n) {
    if (stack.empty()) {
      top.push_back(std::move(n));
    } else {
      stack.back().children.push_back(std::move(n));
    }
  };

  std::size_t pos = 0;
  while ((pos = m.find('<', pos)) != std::string_view::npos) {
    const std::size_t start = pos;
    if (start + 1 >= m.size()) {
      throw MarkupParseError("dangling '<' at position " + std::to_string(start), start);
    }
    char next = m[start + 1];
    if (m.substr(start, 4) == "<!--") {
      auto close = m.find("-->", start + 4);
      if (close == std::string_view::npos) {
        throw MarkupParseError("unterminated comment at position " + std::to_string(start), start);
      }
      pos = close + 3;
      continue;
    }
    if (next == '!' || next == '?') {
      pos = tag_end(m, start) + 1;
      continue;
    }
    const bool closing = next == '/';
    std::size_t name_begin = start + (closing ? 2 : 1);
    std::size_t name_end = name_begin;
    while (name_end < m.size() && is_name_char(m[name_end])) ++name_end;
    if (name_end == name_begin) {
      throw MarkupParseError("missing tag name at position " + std::to_string(start), start);
    }
    std::string name(m.substr(name_begin, name_end - name_begin));
    std::size_t end = tag_end(m, name_end);
    pos = end + 1;

    if (closing) {
      if (stack.empty()) {
        throw MarkupParseError(
            "unbalanced tags: </" + name + "> at position " + std::to_string(start) +
                " closes nothing",
            start);
      }
      if (stack.back().tag != name) {
        throw MarkupParseError("unbalanced tags: </" + name + "> at position " +
                                   std::to_string(start) + " does not close <" +
                                   stack.back().tag + "> opened at position " +
                                   std::to_string(stack.back().position),
                               start);
      }
      Open done = std::move(stack.back());
      stack.pop_back();
      emit(ViewNode::node(std::move(done.tag), std::move(done.children)));
      continue;
    }
    std::size_t last = end;
    while (last > name_end && std::isspace(static_cast<unsigned char>(m[last - 1]))) --last;
    if (last > name_end && m[last - 1] == '/') {
      emit(ViewNode::leaf(std::move(name)));
    } else {
      stack.push_back(Open{std::move(name), start, {}});
    }
  }
  if (!stack.empty()) {
    throw MarkupParseError("unbalanced tags: <" + stack.back().tag + "> opened at position " +
                               std::to_string(stack.back().position) + " is never closed",
                           stack.back().position);
  }
  return top;
}

// ---------------------------------------------------------------------------
// Hashing

struct TreeHasher {
  static StructureHash hash(const ViewNode& n, const std::string& where) {
    if (n.has_hash_.load(std::memory_order_acquire)) {
      return StructureHash{n.hash_.load(std::memory_order_relaxed)};
    }
    StructureHash h{fnv1a64(serialize(n, where))};
    n.hash_.store(h.value, std::memory_order_relaxed);
    n.has_hash_.store(true, std::memory_order_release);
    return h;
  }

  static std::string serialize(const ViewNode& n, const std::string& where) {
    std::vector<StructureHash> hashes;
    if (n.kind_ == NodeKind::web_container && n.markup_) {
      std::vector<ViewNode> expanded;
      try {
        expanded = parse_web_markup(*n.markup_);
      } catch (const MarkupParseError& e) {
        throw MarkupParseError("markup of node " + where + ": " + e.what(), e.position);
      }
      for (std::size_t i = 0; i < expanded.size(); ++i) {
        hashes.push_back(hash(expanded[i], child_where(where, i, expanded[i])));
      }
    } else {
      for (std::size_t i = 0; i < n.children_.size(); ++i) {
        hashes.push_back(hash(n.children_[i], child_where(where, i, n.children_[i])));
      }
    }
    std::sort(hashes.begin(), hashes.end());
    if (n.kind_ == NodeKind::list_container) {
      hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
    }
    std::string out = n.tag_;
    if (hashes.empty()) return out;
    out.reserve(out.size() + hashes.size() * 17 + 1);
    out += '(';
    for (std::size_t i = 0; i < hashes.size(); ++i) {
      if (i) out += ',';
      out += hashes[i].hex();
    }
    out += ')';
    return out;
  }

  static std::string child_where(const std::string& where, std::size_t i, const ViewNode& c) {
    return where + "/" + std::to_string(i) + ":" + c.tag_;
  }
};

StructureHash tree_hash(const ViewNode& root) { return TreeHasher::hash(root, "/" + root.tag()); }

std::string canonical_string(const ViewNode& node) {
  return TreeHasher::serialize(node, "/" + node.tag());
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

ViewNode canonical_copy(const ViewNode& n, WidgetPath& canon, WidgetPath& source,
                        std::vector<PathMapping>* mapping) {
  if (mapping) mapping->push_back({canon, source});
  // Web children are owned by the markup and keep document order.
  if (n.kind() == NodeKind::web_container) return n;
  std::vector<std::size_t> order(n.children().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tree_hash(n.children()[a]) < tree_hash(n.children()[b]);
  });
  std::vector<ViewNode> kids;
  kids.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    canon.push_back(k);
    source.push_back(order[k]);
    kids.push_back(canonical_copy(n.children()[order[k]], canon, source, mapping));
    canon.pop_back();
    source.pop_back();
  }
  ViewNode out(n.tag(), n.kind());
  out.set_children(std::move(kids));
  return out;
}

}  // namespace

ViewNode canonicalize(const ViewNode& root, std::vector<PathMapping>* mapping) {
  WidgetPath canon, source;
  ViewNode out = canonical_copy(root, canon, source, mapping);
  tree_hash(out);
  return out;
}

// ---------------------------------------------------------------------------
// Similarity

double similarity(const ViewNode& s, const ViewNode& t, double matching_cutoff) {
  if (tree_hash(s) == tree_hash(t)) return 1.0;
  if (s.tag() != t.tag()) return 0.0;
  double hits = 1.0;
  const auto& tcs = t.children();
  std::vector<bool> consumed(tcs.size(), false);
  for (const ViewNode& sc : s.children()) {
    for (std::size_t j = 0; j < tcs.size(); ++j) {
      if (consumed[j]) continue;
      double tmp = similarity(sc, tcs[j], matching_cutoff);
      if (tmp > matching_cutoff) {
        hits += tmp * static_cast<double>(tcs[j].subtree_count());
        consumed[j] = true;
        break;
      }
    }
  }
  // A consumed t-child may be larger than its partner (list dedup makes
  // hash-equal subtrees of different sizes), which can push hits past the
  // Dice denominator.
  return std::min(1.0, 2.0 * hits / static_cast<double>(s.subtree_count() + t.subtree_count()));
}

// ---------------------------------------------------------------------------
// Locator re-resolution

std::optional<WidgetPath> resolve_locator(const ViewNode& expected, const WidgetPath& path,
                                          const ViewNode& observed) {
  WidgetPath out;
  const ViewNode* e = &expected;
  const ViewNode* o = &observed;
  for (std::size_t idx : path) {
    const auto& ekids = e->children();
    const auto& okids = o->children();
    if (idx >= ekids.size()) return std::nullopt;
    const ViewNode& want = ekids[idx];
    const StructureHash want_hash = tree_hash(want);

    std::size_t hash_rank = 0, tag_rank = 0;
    for (std::size_t j = 0; j < idx; ++j) {
      if (tree_hash(ekids[j]) == want_hash) ++hash_rank;
      if (ekids[j].tag() == want.tag()) ++tag_rank;
    }
    std::optional<std::size_t> pick;
    for (std::size_t j = 0, seen = 0; j < okids.size(); ++j) {
      if (tree_hash(okids[j]) == want_hash && seen++ == hash_rank) {
        pick = j;
        break;
      }
    }
    if (!pick) {
      for (std::size_t j = 0, seen = 0; j < okids.size(); ++j) {
        if (okids[j].tag() == want.tag() && seen++ == tag_rank) {
          pick = j;
          break;
        }
      }
    }
    if (!pick) return std::nullopt;
    out.push_back(*pick);
    e = &want;
    o = &okids[*pick];
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const ViewNode& node) {
  nlohmann::json j;
  j["tag"] = node.tag();
  j["kind"] = std::string(to_string(node.kind()));
  j["children"] = nlohmann::json::array();
  if (node.kind() == NodeKind::web_container) {
    j["markup"] = node.markup().value_or("");
  } else {
    for (const auto& c : node.children()) j["children"].push_back(to_json(c));
  }
  return j;
}

ViewNode view_node_from_json(const nlohmann::json& doc, const std::string& where) {
  if (!doc.is_object()) throw SpecError(where + ": expected an object");
  if (!doc.contains("tag") || !doc["tag"].is_string()) {
    throw SpecError(where + ".tag: missing or not a string");
  }
  NodeKind kind = NodeKind::plain;
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw SpecError(where + ".kind: not a string");
    try {
      kind = node_kind_from_string(doc["kind"].get<std::string>());
    } catch (const SpecError& e) {
      throw SpecError(where + ".kind: " + e.what());
    }
  }
  const std::string tag = doc["tag"].get<std::string>();
  const bool has_markup = doc.contains("markup");
  if (kind == NodeKind::web_container) {
    if (!has_markup || !doc["markup"].is_string()) {
      throw SpecError(where + ".markup: required string for web_container");
    }
    if (doc.contains("children") && !doc["children"].empty()) {
      throw SpecError(where + ".children: web_container children come from markup");
    }
    try {
      return ViewNode::web(tag, doc["markup"].get<std::string>());
    } catch (const MarkupParseError& e) {
      throw MarkupParseError(where + ".markup: " + e.what(), e.position);
    }
  }
  if (has_markup) throw SpecError(where + ".markup: only allowed on web_container");
  std::vector<ViewNode> kids;
  if (doc.contains("children")) {
    const auto& arr = doc["children"];
    if (!arr.is_array()) throw SpecError(where + ".children: not an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      kids.push_back(view_node_from_json(arr[i], where + ".children[" + std::to_string(i) + "]"));
    }
  }
  ViewNode n(tag, kind);
  n.set_children(std::move(kids));
  return n;
}

}  // namespace statewalk
