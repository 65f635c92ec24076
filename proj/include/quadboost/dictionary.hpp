#pragma once

// Runtime variant selection behind one interface, for the harness, tools and
// tests that iterate over every variant.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "quadboost/cas_tree.hpp"
#include "quadboost/quadboost_tree.hpp"
#include "quadboost/variants.hpp"

namespace quadboost {

template <typename V>
class Dictionary {
 public:
  virtual ~Dictionary() = default;

  virtual bool insert(Point key, V value) = 0;
  virtual bool remove(Point key) = 0;
  virtual bool contains(Point key) const = 0;
  virtual std::optional<V> lookup(Point key) const = 0;
  /// Throws std::logic_error for qc, which has no atomic move.
  virtual bool move(Point old_key, Point new_key) = 0;

  virtual Variant variant() const = 0;
  virtual double range() const = 0;
  virtual const Internal* root() const = 0;
  virtual StatsSnapshot stats() const = 0;
};

template <typename Tree>
class DictionaryAdapter final : public Dictionary<typename Tree::value_type> {
 public:
  using V = typename Tree::value_type;

  explicit DictionaryAdapter(double range) : tree_(range) {}

  bool insert(Point key, V value) override { return tree_.insert(key, std::move(value)); }
  bool remove(Point key) override { return tree_.remove(key); }
  bool contains(Point key) const override { return tree_.contains(key); }
  std::optional<V> lookup(Point key) const override { return tree_.lookup(key); }

  bool move(Point old_key, Point new_key) override {
    if constexpr (Tree::kVariant == Variant::qc) {
      (void)old_key;
      (void)new_key;
      throw std::logic_error("qc does not support move");
    } else {
      return tree_.move(old_key, new_key);
    }
  }

  Variant variant() const override { return Tree::kVariant; }
  double range() const override { return tree_.range(); }
  const Internal* root() const override { return tree_.root(); }
  StatsSnapshot stats() const override { return tree_.stats(); }

  Tree& tree() { return tree_; }

 private:
  Tree tree_;
};

template <typename V, Variant Var>
using TreeFor = std::conditional_t<Var == Variant::qc, CasTree<V>, QuadboostTree<V, Var>>;

/// Calls f.template operator()<Var>() for the runtime variant v.
template <typename F>
decltype(auto) visit_variant(Variant v, F&& f) {
  switch (v) {
    case Variant::qc: return std::forward<F>(f).template operator()<Variant::qc>();
    case Variant::qb_s: return std::forward<F>(f).template operator()<Variant::qb_s>();
    case Variant::qb_o: return std::forward<F>(f).template operator()<Variant::qb_o>();
    case Variant::qb_d: return std::forward<F>(f).template operator()<Variant::qb_d>();
    case Variant::qb_f: return std::forward<F>(f).template operator()<Variant::qb_f>();
  }
  throw std::invalid_argument("unknown variant");
}

template <typename V>
std::unique_ptr<Dictionary<V>> make_tree(Variant v, double range) {
  return visit_variant(v, [range]<Variant Var>() -> std::unique_ptr<Dictionary<V>> {
    return std::make_unique<DictionaryAdapter<TreeFor<V, Var>>>(range);
  });
}

}  // namespace quadboost
