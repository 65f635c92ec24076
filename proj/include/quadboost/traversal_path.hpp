#pragma once

// Paths recorded by find. StackPath keeps every Internal from the start of the
// search (qb-s). ShallowPath keeps only the two most recent entries, which is
// all the one-parent variants need: the terminal's parent and grandparent.

#include <cstddef>

#include <boost/container/small_vector.hpp>

#include "quadboost/nodes.hpp"

namespace quadboost {

class StackPath {
 public:
  void push(Internal* n) { items_.push_back(n); }

  Internal* pop() {
    Internal* n = items_.back();
    items_.pop_back();
    return n;
  }

  Internal* top() const { return items_.empty() ? nullptr : items_.back(); }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  void clear() { items_.clear(); }

  /// Keeps the bottom n entries.
  void truncate(std::size_t n) {
    if (n < items_.size()) items_.resize(n);
  }

  Internal* operator[](std::size_t i) const { return items_[i]; }

 private:
  boost::container::small_vector<Internal*, 48> items_;
};

class ShallowPath {
 public:
  void push(Internal* n) {
    grandparent_ = parent_;
    parent_ = n;
    ++size_;
  }

  /// Returns the top entry; afterwards top() is the former grandparent, and
  /// anything older is unknown (nullptr).
  Internal* pop() {
    Internal* n = parent_;
    parent_ = grandparent_;
    grandparent_ = nullptr;
    if (size_ > 0) --size_;
    return n;
  }

  Internal* top() const { return parent_; }
  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }

  void clear() {
    parent_ = grandparent_ = nullptr;
    size_ = 0;
  }

 private:
  Internal* parent_ = nullptr;
  Internal* grandparent_ = nullptr;
  std::size_t size_ = 0;
};

}  // namespace quadboost
