#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

namespace chordjam {

/// Variable-order Markov model over integer symbols (chord ids in the engine),
/// stored as a reversed-context tree whose nodes keep pointers into the
/// learned sequences.
///
/// Learning sequence s walks, for every end position i, the symbols
/// s[i], s[i-1], ... from the root, creating nodes as needed and appending
/// the pointer (sequence, i+1) to each node on the way. Positions are 1-based,
/// so the pointer names the symbol that followed the context. The pointer
/// produced by the final symbol addresses |s|+1, which has no continuation;
/// such pointers are kept in the tree but never counted in distributions.
class VomTree {
 public:
  using Symbol = int;

  struct Pointer {
    std::uint32_t sequence = 0;
    std::uint32_t position = 0;  // 1-based

    friend bool operator==(const Pointer&, const Pointer&) = default;
  };

  struct Distribution {
    std::map<Symbol, std::size_t> counts;
    std::size_t total_pointers = 0;
    std::size_t depth = 0;  // context length of the node that produced it

    boost::rational<std::int64_t> probability(Symbol s) const;
    /// Most-pointed symbol, ties to the lowest symbol.
    Symbol argmax() const;
  };

  struct Argmax {};
  struct Sample {
    std::uint64_t seed = 0;
  };
  using Policy = std::variant<Argmax, Sample>;

  /// `max_depth` of 0 means unbounded context length.
  explicit VomTree(std::size_t max_depth = 0);

  void learn_sequence(std::span<const Symbol> sequence);
  /// Drops everything learned so far.
  void clear();

  /// Walks `context` right to left as deep as the tree allows and returns the
  /// distribution of the deepest matched node with at least one continuation.
  std::optional<Distribution> query(std::span<const Symbol> context) const;
  /// Length of the longest context suffix that exists as a path in the tree.
  std::size_t matched_depth(std::span<const Symbol> context) const;

  std::optional<Symbol> predict(std::span<const Symbol> context, const Policy& policy = Argmax{}) const;
  /// Draws one continuation pointer uniformly from the node `query` would use.
  std::optional<Symbol> sample(std::span<const Symbol> context, std::mt19937_64& rng) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t pointer_count() const;
  std::size_t max_depth() const { return max_depth_; }
  std::span<const std::vector<Symbol>> sequences() const { return sequences_; }

  /// Depth-first text rendering, children in ascending symbol order:
  ///   <indent><label> (seq,pos) (seq,pos) ...
  std::string dump(const std::function<std::string(Symbol)>& label) const;
  std::string dump() const;

 private:
  using NodeId = std::uint32_t;
  struct Node {
    std::vector<std::pair<Symbol, NodeId>> children;  // sorted by symbol
    std::vector<Pointer> pointers;
  };

  std::optional<NodeId> child(NodeId node, Symbol s) const;
  NodeId child_or_insert(NodeId node, Symbol s);
  bool has_continuation(const Pointer& p) const;
  Symbol continuation(const Pointer& p) const;
  /// Deepest node on the context path with a continuation, plus its depth.
  std::optional<std::pair<NodeId, std::size_t>> deepest_informative(std::span<const Symbol> context) const;
  void dump_node(NodeId node, std::size_t depth, const std::function<std::string(Symbol)>& label,
                 std::string& out) const;

  std::size_t max_depth_;
  std::vector<Node> nodes_;  // nodes_[0] is the root
  std::vector<std::vector<Symbol>> sequences_;
};

}  // namespace chordjam
