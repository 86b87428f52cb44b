#include "dyncore/node_set.hpp"

namespace dyncore {

NodeSet::Ptr NodeSet::empty() {
  static const Ptr kEmpty = Ptr(new NodeSet());
  return kEmpty;
}

NodeSet::Ptr NodeSet::materialized(DenomTag tag, std::vector<IntEntry> entries) {
  auto* s = new NodeSet();
  s->tag_ = std::move(tag);
  s->size_ = entries.size();
  for (const auto& e : entries) s->numerator_sum_ += e.weight;
  s->entries_ = std::move(entries);
  return Ptr(s);
}

NodeSet::Ptr NodeSet::join(Ptr left, Ptr right) {
  if (!left || left->size() == 0) return right ? right : empty();
  if (!right || right->size() == 0) return left;
  auto* s = new NodeSet();
  s->tag_ = left->tag().common_multiple(right->tag());
  s->size_ = left->size() + right->size();
  s->composite_ = true;
  s->lift_[0] = left->tag().quotient_into(s->tag_);
  s->lift_[1] = right->tag().quotient_into(s->tag_);
  s->numerator_sum_ = left->numerator_sum() * s->lift_[0] + right->numerator_sum() * s->lift_[1];
  s->parts_[0] = std::move(left);
  s->parts_[1] = std::move(right);
  return Ptr(s);
}

mpq_class NodeSet::total_weight() const {
  mpq_class q(numerator_sum_, tag_.value());
  q.canonicalize();
  return q;
}

std::vector<IntEntry> NodeSet::flatten() const {
  std::vector<IntEntry> out;
  out.reserve(size_);
  append_to(out, mpz_class(1));
  return out;
}

void NodeSet::append_to(std::vector<IntEntry>& out, const mpz_class& factor) const {
  if (composite_) {
    for (int i = 0; i < 2; ++i) {
      if (lift_[i] == 1) {
        parts_[i]->append_to(out, factor);
      } else {
        parts_[i]->append_to(out, factor * lift_[i]);
      }
    }
    return;
  }
  if (factor == 1) {
    out.insert(out.end(), entries_.begin(), entries_.end());
    return;
  }
  for (const auto& e : entries_) out.push_back(IntEntry{e.point, e.weight * factor});
}

std::vector<WeightedPoint> NodeSet::to_weighted_points() const {
  std::vector<WeightedPoint> out;
  out.reserve(size_);
  for (auto& e : flatten()) {
    out.push_back(WeightedPoint{*e.point, BoundedRational(std::move(e.weight), tag_)});
  }
  return out;
}

}  // namespace dyncore
