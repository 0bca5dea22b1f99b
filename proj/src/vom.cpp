#include "chordjam/vom.hpp"

#include <algorithm>

namespace chordjam {

boost::rational<std::int64_t> VomTree::Distribution::probability(Symbol s) const {
  const auto it = counts.find(s);
  if (it == counts.end() || total_pointers == 0) return 0;
  return {static_cast<std::int64_t>(it->second), static_cast<std::int64_t>(total_pointers)};
}

VomTree::Symbol VomTree::Distribution::argmax() const {
  Symbol best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [symbol, count] : counts) {
    if (count > best_count) {
      best = symbol;
      best_count = count;
    }
  }
  return best;
}

VomTree::VomTree(std::size_t max_depth) : max_depth_(max_depth) { nodes_.emplace_back(); }

void VomTree::clear() {
  nodes_.clear();
  nodes_.emplace_back();
  sequences_.clear();
}

std::optional<VomTree::NodeId> VomTree::child(NodeId node, Symbol s) const {
  const auto& children = nodes_[node].children;
  const auto it = std::lower_bound(children.begin(), children.end(), s,
                                   [](const auto& entry, Symbol key) { return entry.first < key; });
  if (it == children.end() || it->first != s) return std::nullopt;
  return it->second;
}

VomTree::NodeId VomTree::child_or_insert(NodeId node, Symbol s) {
  auto& children = nodes_[node].children;
  const auto it = std::lower_bound(children.begin(), children.end(), s,
                                   [](const auto& entry, Symbol key) { return entry.first < key; });
  if (it != children.end() && it->first == s) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  children.insert(it, {s, id});
  nodes_.emplace_back();  // invalidates `children`
  return id;
}

void VomTree::learn_sequence(std::span<const Symbol> sequence) {
  if (sequence.empty()) return;
  const auto seq_id = static_cast<std::uint32_t>(sequences_.size());
  sequences_.emplace_back(sequence.begin(), sequence.end());
  const std::size_t n = sequence.size();
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lowest = (max_depth_ == 0 || i <= max_depth_) ? 1 : i - max_depth_ + 1;
    NodeId node = 0;
    for (std::size_t j = i; j >= lowest; --j) {
      node = child_or_insert(node, sequence[j - 1]);
      nodes_[node].pointers.push_back({seq_id, static_cast<std::uint32_t>(i + 1)});
    }
  }
}

bool VomTree::has_continuation(const Pointer& p) const { return p.position <= sequences_[p.sequence].size(); }

VomTree::Symbol VomTree::continuation(const Pointer& p) const { return sequences_[p.sequence][p.position - 1]; }

std::size_t VomTree::matched_depth(std::span<const Symbol> context) const {
  NodeId node = 0;
  std::size_t depth = 0;
  for (auto it = context.rbegin(); it != context.rend(); ++it) {
    const auto next = child(node, *it);
    if (!next) break;
    node = *next;
    ++depth;
  }
  return depth;
}

std::optional<std::pair<VomTree::NodeId, std::size_t>> VomTree::deepest_informative(
    std::span<const Symbol> context) const {
  std::optional<std::pair<NodeId, std::size_t>> found;
  NodeId node = 0;
  std::size_t depth = 0;
  for (auto it = context.rbegin(); it != context.rend(); ++it) {
    const auto next = child(node, *it);
    if (!next) break;
    node = *next;
    ++depth;
    const auto& ptrs = nodes_[node].pointers;
    if (std::any_of(ptrs.begin(), ptrs.end(), [&](const Pointer& p) { return has_continuation(p); })) {
      found = {node, depth};
    }
  }
  return found;
}

std::optional<VomTree::Distribution> VomTree::query(std::span<const Symbol> context) const {
  const auto hit = deepest_informative(context);
  if (!hit) return std::nullopt;
  Distribution dist;
  dist.depth = hit->second;
  for (const auto& p : nodes_[hit->first].pointers) {
    if (!has_continuation(p)) continue;
    ++dist.counts[continuation(p)];
    ++dist.total_pointers;
  }
  return dist;
}

std::optional<VomTree::Symbol> VomTree::predict(std::span<const Symbol> context, const Policy& policy) const {
  if (const auto* s = std::get_if<Sample>(&policy)) {
    std::mt19937_64 rng(s->seed);
    return sample(context, rng);
  }
  const auto dist = query(context);
  if (!dist) return std::nullopt;
  return dist->argmax();
}

std::optional<VomTree::Symbol> VomTree::sample(std::span<const Symbol> context, std::mt19937_64& rng) const {
  const auto hit = deepest_informative(context);
  if (!hit) return std::nullopt;
  std::vector<Pointer> usable;
  for (const auto& p : nodes_[hit->first].pointers) {
    if (has_continuation(p)) usable.push_back(p);
  }
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  return continuation(usable[pick(rng)]);
}

std::size_t VomTree::pointer_count() const {
  std::size_t total = 0;
  for (const auto& node : nodes_) total += node.pointers.size();
  return total;
}

void VomTree::dump_node(NodeId node, std::size_t depth, const std::function<std::string(Symbol)>& label,
                        std::string& out) const {
  for (const auto& [symbol, id] : nodes_[node].children) {
    out.append(2 * depth, ' ');
    out += label(symbol);
    for (const auto& p : nodes_[id].pointers) {
      out += " (" + std::to_string(p.sequence) + "," + std::to_string(p.position) + ")";
    }
    out += '\n';
    dump_node(id, depth + 1, label, out);
  }
}

std::string VomTree::dump(const std::function<std::string(Symbol)>& label) const {
  std::string out = "root\n";
  dump_node(0, 1, label, out);
  return out;
}

std::string VomTree::dump() const {
  return dump([](Symbol s) { return std::to_string(s); });
}

}  // namespace chordjam
