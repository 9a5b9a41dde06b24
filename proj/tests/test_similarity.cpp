#include <gtest/gtest.h>

#include "oracles.hpp"
#include "statewalk/ui_tree.hpp"

using namespace statewalk;

namespace {

ViewNode L(const char* tag) { return ViewNode::leaf(tag); }

// Root with `n` nodes total: a few nested groups of leaves.
ViewNode wide_tree(std::size_t n) {
  ViewNode root("Root");
  std::size_t made = 1;
  int g = 0;
  while (made < n) {
    ViewNode group("Group" + std::to_string(g++));
    ++made;
    for (int i = 0; i < 4 && made < n; ++i, ++made) group.add_child(L(i % 2 ? "TextView" : "ImageView"));
    root.add_child(std::move(group));
  }
  return root;
}

}  // namespace

TEST(Similarity, SelfIsOne) {
  oracle::TreeGen gen(1);
  for (int i = 0; i < 200; ++i) {
    ViewNode t = gen.tree(30);
    EXPECT_EQ(similarity(t, t), 1.0);
  }
}

TEST(Similarity, DifferentRootTags) {
  EXPECT_EQ(similarity(ViewNode::node("ListPage", {L("A")}), ViewNode::node("DetailPage", {L("A")})),
            0.0);
}

TEST(Similarity, ExtraChild) {
  ViewNode s = ViewNode::node("Root", {L("A"), L("B")});
  ViewNode t = ViewNode::node("Root", {L("A"), L("B"), L("C")});
  EXPECT_DOUBLE_EQ(oracle::similarity(s, t), 6.0 / 7.0);
  EXPECT_DOUBLE_EQ(similarity(s, t), 6.0 / 7.0);
}

TEST(Similarity, DecorationOnFiftyNodeTree) {
  ViewNode clean = wide_tree(50);
  ASSERT_EQ(clean.subtree_count(), 50u);
  ViewNode noisy = clean;
  noisy.insert_child(0, L("NotificationBanner"));
  const double want = oracle::similarity(noisy, clean);
  EXPECT_GE(want, 0.95);
  EXPECT_DOUBLE_EQ(similarity(noisy, clean), want);
  EXPECT_DOUBLE_EQ(similarity(clean, noisy), oracle::similarity(clean, noisy));
}

TEST(Similarity, CutoffIsRespected) {
  // child pair similarity is 2*1/(1+3) = 0.5, not above the default cutoff
  ViewNode s = ViewNode::node("Root", {ViewNode::node("P", {})});
  ViewNode t = ViewNode::node("Root", {ViewNode::node("P", {L("x"), L("y")})});
  EXPECT_DOUBLE_EQ(similarity(s, t), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(similarity(s, t, 0.4), 2.0 * (1 + 0.5 * 3) / 6.0);
}

TEST(Similarity, CollapsedListDoesNotExceedOne) {
  // the three-row list is hash-equal to the one-row list but twice the size
  ViewNode s = ViewNode::node("R", {ViewNode::list("L", {L("r")})});
  ViewNode t = ViewNode::node("R", {ViewNode::list("L", {L("r"), L("r"), L("r")}), L("x")});
  EXPECT_LE(similarity(s, t), 1.0);
  EXPECT_DOUBLE_EQ(similarity(s, t), oracle::similarity(s, t));
}

TEST(Similarity, MatchesOracleOnSmallTrees) {
  auto trees = oracle::all_trees(5, {"A", "L"});
  std::size_t pairs = 0;
  for (const auto& s : trees) {
    for (const auto& t : trees) {
      ASSERT_DOUBLE_EQ(similarity(s, t), oracle::similarity(s, t))
          << to_json(s).dump() << " vs " << to_json(t).dump();
      ++pairs;
    }
  }
  EXPECT_GE(pairs, 10'000u);
}

TEST(Similarity, BoundsUnderFuzz) {
  oracle::TreeGen gen(99);
  for (int i = 0; i < 20'000; ++i) {
    ViewNode s = gen.tree(25);
    ViewNode t = i % 3 ? gen.mutate(s) : gen.tree(25);
    const double v = similarity(s, t);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    if (tree_hash(s) == tree_hash(t)) ASSERT_EQ(v, 1.0);
  }
}

TEST(Similarity, RandomPairsMatchOracle) {
  oracle::TreeGen gen(1234);
  for (int i = 0; i < 3000; ++i) {
    ViewNode s = gen.tree(15);
    ViewNode t = i % 2 ? gen.mutate(gen.mutate(s)) : gen.tree(15);
    ASSERT_DOUBLE_EQ(similarity(s, t), oracle::similarity(s, t));
  }
}
