#pragma once

#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "adrx/block.hpp"
#include "adrx/errors.hpp"
#include "adrx/rng.hpp"

namespace adrx::train {

// FIFO store of gate-validated blocks keyed by strictly increasing block index.
class PairBuffer {
 public:
  explicit PairBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Block b) {
    if (!entries_.empty() && b.index <= entries_.back().index)
      throw NonMonotonicIndex("buffer push: block index not increasing");
    entries_.push_back(std::move(b));
    if (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Block& entry(std::size_t i) const { return entries_.at(i); }

  // Support/query pair: uniform over stored blocks whose predecessor index is
  // also stored; the query block is the sampled one, the support its
  // predecessor.  nullopt when no consecutive indices exist.
  std::optional<std::pair<const Block*, const Block*>> sample_consecutive_pair(Rng& rng) const {
    std::vector<std::size_t> query_pos;
    for (std::size_t i = 1; i < entries_.size(); ++i)
      if (entries_[i].index == entries_[i - 1].index + 1) query_pos.push_back(i);
    if (query_pos.empty()) return std::nullopt;
    const std::size_t pick = query_pos[rng.uniform_int(query_pos.size())];
    return std::make_pair(&entries_[pick - 1], &entries_[pick]);
  }

 private:
  std::size_t capacity_;
  std::deque<Block> entries_;
};

}  // namespace adrx::train
