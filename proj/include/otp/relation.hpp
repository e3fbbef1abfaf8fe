#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "otp/errors.hpp"

namespace otp {

using IndexPair = std::pair<std::size_t, std::size_t>;

// The graph of a multivalued mapping between two finite spaces: a set of
// (x-index, y-index) pairs, kept sorted and deduplicated. The inverse mapping
// is the pair-swapped relation.
class Relation {
 public:
  Relation() = default;

  Relation(std::vector<IndexPair> pairs, std::size_t nx, std::size_t ny)
      : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    for (const auto& [i, j] : pairs_)
      if (i >= nx || j >= ny)
        throw Error(ErrorKind::ValidationError, "relation pair index out of range");
  }

  static Relation identity(std::size_t n) {
    std::vector<IndexPair> p;
    p.reserve(n);
    for (std::size_t i = 0; i < n; ++i) p.emplace_back(i, i);
    return Relation(std::move(p), n, n);
  }

  // Identity restricted to a subset of indices.
  static Relation identity_on(const std::vector<std::size_t>& subset, std::size_t n) {
    std::vector<IndexPair> p;
    p.reserve(subset.size());
    for (std::size_t i : subset) p.emplace_back(i, i);
    return Relation(std::move(p), n, n);
  }

  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<IndexPair>& pairs() const { return pairs_; }
  const IndexPair& pair(std::size_t k) const { return pairs_[k]; }

  bool contains(std::size_t i, std::size_t j) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), IndexPair{i, j});
  }

  // Projection onto the first coordinate, sorted and unique.
  std::vector<std::size_t> domain() const {
    std::vector<std::size_t> d;
    d.reserve(pairs_.size());
    for (const auto& [i, j] : pairs_) d.push_back(i);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
  }

  // Projection onto the second coordinate, sorted and unique.
  std::vector<std::size_t> image() const {
    std::vector<std::size_t> im;
    im.reserve(pairs_.size());
    for (const auto& [i, j] : pairs_) im.push_back(j);
    std::sort(im.begin(), im.end());
    im.erase(std::unique(im.begin(), im.end()), im.end());
    return im;
  }

  // Image of an index subset of the domain.
  std::vector<std::size_t> image_of(const std::vector<std::size_t>& subset) const {
    std::vector<std::size_t> im;
    for (const auto& [i, j] : pairs_)
      if (std::binary_search(subset.begin(), subset.end(), i)) im.push_back(j);
    std::sort(im.begin(), im.end());
    im.erase(std::unique(im.begin(), im.end()), im.end());
    return im;
  }

  // The pair-swapped relation (graph of the inverse mapping).
  Relation inverted(std::size_t ny, std::size_t nx) const {
    std::vector<IndexPair> swapped;
    swapped.reserve(pairs_.size());
    for (const auto& [i, j] : pairs_) swapped.emplace_back(j, i);
    return Relation(std::move(swapped), ny, nx);
  }

  bool is_subset_of(const Relation& other) const {
    for (const auto& [i, j] : pairs_)
      if (!other.contains(i, j)) return false;
    return true;
  }

  bool operator==(const Relation& other) const { return pairs_ == other.pairs_; }

 private:
  std::vector<IndexPair> pairs_;
};

}  // namespace otp
