#include "spvs/gradients.h"

#include <utility>

#include "spvs/errors.h"

namespace spvs {

std::vector<double> Gradients::Of(const Tensor& leaf) const {
  auto it = grads_.find(leaf.node());
  if (it == grads_.end()) return std::vector<double>(leaf.numel(), 0.0);
  return it->second;
}

bool Gradients::Reached(const Tensor& leaf) const { return grads_.contains(leaf.node()); }

Gradients Backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        ShapeToString(loss.shape()));
  }
  Gradients result;
  if (!loss.requires_grad()) return result;

  // Iterative post-order DFS gives a topological order (inputs before users).
  using internal::Node;
  std::vector<const Node*> order;
  std::unordered_map<const Node*, std::size_t> index;
  std::vector<std::pair<const Node*, std::size_t>> stack;
  std::unordered_map<const Node*, bool> visited;
  stack.emplace_back(loss.node(), 0);
  visited[loss.node()] = true;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      const Node* child = node->inputs[next++].get();
      if (child->requires_grad && !visited[child]) {
        visited[child] = true;
        stack.emplace_back(child, 0);
      }
      continue;
    }
    index[node] = order.size();
    order.push_back(node);
    stack.pop_back();
  }

  std::vector<std::vector<double>> grads(order.size());
  grads.back().assign(1, 1.0);
  std::vector<std::span<double>> grad_in;
  for (std::size_t k = order.size(); k-- > 0;) {
    const Node* node = order[k];
    if (!node->backward) continue;
    if (grads[k].empty()) continue;
    grad_in.clear();
    for (const auto& input : node->inputs) {
      if (!input->requires_grad) {
        grad_in.emplace_back();
        continue;
      }
      auto& g = grads[index.at(input.get())];
      if (g.empty()) g.assign(input->value.size(), 0.0);
      grad_in.emplace_back(g);
    }
    node->backward(*node, grads[k], grad_in);
    if (node != loss.node()) std::vector<double>().swap(grads[k]);
  }

  for (std::size_t k = 0; k < order.size(); ++k) {
    const Node* node = order[k];
    if (node->inputs.empty() && node->requires_grad) {
      std::vector<double> g = std::move(grads[k]);
      if (g.empty()) g.assign(node->value.size(), 0.0);
      result.grads_.emplace(node, std::move(g));
    }
  }
  return result;
}

}  // namespace spvs
