#include "cknn/bipartite_index.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <istream>
#include <ostream>
#include <tuple>
#include <type_traits>

#include "binary_io.hpp"
#include "cknn/error.hpp"

namespace cknn {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'K', 'N', 'N', 'I', 'D', 'X', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
std::span<const T> slice(const std::vector<std::uint64_t>& offsets, const std::vector<T>& data, std::uint32_t key) {
  if (key + 1ULL >= offsets.size()) return {};
  const auto begin = offsets[key];
  const auto end = offsets[key + 1];
  return {data.data() + begin, static_cast<std::size_t>(end - begin)};
}

std::size_t count_present(const std::vector<std::uint64_t>& offsets) {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < offsets.size(); ++k) n += offsets[k + 1] > offsets[k] ? 1 : 0;
  return n;
}

void validate_offsets(const std::vector<std::uint64_t>& offsets, std::size_t data_size) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != data_size ||
      !std::is_sorted(offsets.begin(), offsets.end())) {
    throw Error(ErrorKind::kMalformedInput, "snapshot offsets inconsistent");
  }
}

// Postings are written field by field so struct padding never reaches disk.
template <class Posting>
void put_postings(std::ostream& out, const std::vector<Posting>& postings) {
  detail::put<std::uint64_t>(out, postings.size());
  for (const auto& p : postings) {
    if constexpr (std::is_same_v<Posting, ItemPosting>) {
      detail::put<std::uint32_t>(out, p.item.value);
    } else {
      detail::put<std::uint32_t>(out, p.session.value);
    }
    detail::put<std::int64_t>(out, p.timestamp);
  }
}

template <class Posting>
std::vector<Posting> get_postings(std::istream& in) {
  const auto n = detail::get<std::uint64_t>(in);
  if (n > (1ULL << 36)) throw Error(ErrorKind::kMalformedInput, "snapshot vector length out of range");
  std::vector<Posting> postings;
  postings.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto id = detail::get<std::uint32_t>(in);
    const auto ts = detail::get<std::int64_t>(in);
    if constexpr (std::is_same_v<Posting, ItemPosting>) {
      postings.push_back({ItemId{id}, ts});
    } else {
      postings.push_back({SessionId{id}, ts});
    }
  }
  return postings;
}

}  // namespace

BipartiteIndex BipartiteIndex::build(std::span<const Interaction> interactions) {
  if (interactions.empty()) throw Error(ErrorKind::kEmptyDataset, "empty dataset");

  std::vector<Interaction> edges(interactions.begin(), interactions.end());
  std::uint32_t max_session = 0;
  std::uint32_t max_item = 0;
  for (const auto& e : edges) {
    if (e.timestamp < 0) throw Error(ErrorKind::kInvalidArgument, "negative timestamp");
    if (!e.session.valid() || !e.item.valid()) throw Error(ErrorKind::kInvalidArgument, "invalid id in interaction");
    max_session = std::max(max_session, e.session.value);
    max_item = std::max(max_item, e.item.value);
  }

  // Collapse repeated (session, item) pairs to the earliest click.
  std::sort(edges.begin(), edges.end(), [](const Interaction& a, const Interaction& b) {
    return std::tie(a.session, a.item, a.timestamp) < std::tie(b.session, b.item, b.timestamp);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Interaction& a, const Interaction& b) {
                            return a.session == b.session && a.item == b.item;
                          }),
              edges.end());

  BipartiteIndex index;
  const std::size_t n_sessions = max_session + 1ULL;
  const std::size_t n_items = max_item + 1ULL;

  index.session_offsets_.assign(n_sessions + 1, 0);
  index.item_offsets_.assign(n_items + 1, 0);
  for (const auto& e : edges) {
    ++index.session_offsets_[e.session.value + 1];
    ++index.item_offsets_[e.item.value + 1];
  }
  for (std::size_t k = 1; k < index.session_offsets_.size(); ++k) index.session_offsets_[k] += index.session_offsets_[k - 1];
  for (std::size_t k = 1; k < index.item_offsets_.size(); ++k) index.item_offsets_[k] += index.item_offsets_[k - 1];

  // edges are grouped by session with ascending item id: this is the item set.
  index.session_item_set_.reserve(edges.size());
  for (const auto& e : edges) index.session_item_set_.push_back(e.item);

  index.session_items_.resize(edges.size());
  index.item_sessions_.resize(edges.size());
  {
    auto cursor = index.session_offsets_;
    for (const auto& e : edges) index.session_items_[cursor[e.session.value]++] = {e.item, e.timestamp};
  }
  {
    auto cursor = index.item_offsets_;
    for (const auto& e : edges) index.item_sessions_[cursor[e.item.value]++] = {e.session, e.timestamp};
  }
  for (std::size_t s = 0; s < n_sessions; ++s) {
    auto first = index.session_items_.begin() + static_cast<std::ptrdiff_t>(index.session_offsets_[s]);
    auto last = index.session_items_.begin() + static_cast<std::ptrdiff_t>(index.session_offsets_[s + 1]);
    std::sort(first, last, [](const ItemPosting& a, const ItemPosting& b) {
      return std::tie(a.timestamp, a.item) < std::tie(b.timestamp, b.item);
    });
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    auto first = index.item_sessions_.begin() + static_cast<std::ptrdiff_t>(index.item_offsets_[i]);
    auto last = index.item_sessions_.begin() + static_cast<std::ptrdiff_t>(index.item_offsets_[i + 1]);
    std::sort(first, last, [](const SessionPosting& a, const SessionPosting& b) {
      return std::tie(a.timestamp, a.session) < std::tie(b.timestamp, b.session);
    });
  }

  index.num_sessions_ = count_present(index.session_offsets_);
  index.num_items_ = count_present(index.item_offsets_);
  return index;
}

std::span<const SessionPosting> BipartiteIndex::sessions_of_item(ItemId item) const {
  if (!item.valid()) return {};
  return slice(item_offsets_, item_sessions_, item.value);
}

std::span<const ItemPosting> BipartiteIndex::items_of_session(SessionId session) const {
  if (!session.valid()) return {};
  return slice(session_offsets_, session_items_, session.value);
}

std::span<const ItemId> BipartiteIndex::item_set_of_session(SessionId session) const {
  if (!session.valid()) return {};
  return slice(session_offsets_, session_item_set_, session.value);
}

std::uint32_t BipartiteIndex::session_degree(SessionId session) const {
  return static_cast<std::uint32_t>(items_of_session(session).size());
}

std::uint32_t BipartiteIndex::item_degree(ItemId item) const {
  return static_cast<std::uint32_t>(sessions_of_item(item).size());
}

std::vector<ItemId> BipartiteIndex::items() const {
  std::vector<ItemId> out;
  out.reserve(num_items_);
  for (std::uint32_t i = 0; i < item_capacity(); ++i) {
    if (item_offsets_[i + 1] > item_offsets_[i]) out.emplace_back(i);
  }
  return out;
}

std::vector<SessionId> BipartiteIndex::sessions() const {
  std::vector<SessionId> out;
  out.reserve(num_sessions_);
  for (std::uint32_t s = 0; s < session_capacity(); ++s) {
    if (session_offsets_[s + 1] > session_offsets_[s]) out.emplace_back(s);
  }
  return out;
}

void BipartiteIndex::write(std::ostream& out) const {
  detail::put_vector(out, session_offsets_);
  put_postings(out, session_items_);
  detail::put_vector(out, item_offsets_);
  put_postings(out, item_sessions_);
}

BipartiteIndex BipartiteIndex::read(std::istream& in) {
  BipartiteIndex index;
  index.session_offsets_ = detail::get_vector<std::uint64_t>(in);
  index.session_items_ = get_postings<ItemPosting>(in);
  index.item_offsets_ = detail::get_vector<std::uint64_t>(in);
  index.item_sessions_ = get_postings<SessionPosting>(in);
  validate_offsets(index.session_offsets_, index.session_items_.size());
  validate_offsets(index.item_offsets_, index.item_sessions_.size());
  if (index.session_items_.size() != index.item_sessions_.size()) {
    throw Error(ErrorKind::kMalformedInput, "snapshot maps are not transposes");
  }
  const auto n_items = index.item_offsets_.size() - 1;
  const auto n_sessions = index.session_offsets_.size() - 1;
  for (const auto& p : index.session_items_) {
    if (p.item.value >= n_items) throw Error(ErrorKind::kMalformedInput, "snapshot item id out of range");
  }
  for (const auto& p : index.item_sessions_) {
    if (p.session.value >= n_sessions) throw Error(ErrorKind::kMalformedInput, "snapshot session id out of range");
  }
  // The id-sorted item sets are derived, not stored.
  index.session_item_set_.reserve(index.session_items_.size());
  for (std::size_t s = 0; s < n_sessions; ++s) {
    const auto begin = index.session_item_set_.size();
    for (auto k = index.session_offsets_[s]; k < index.session_offsets_[s + 1]; ++k) {
      index.session_item_set_.push_back(index.session_items_[k].item);
    }
    std::sort(index.session_item_set_.begin() + static_cast<std::ptrdiff_t>(begin), index.session_item_set_.end());
  }
  index.num_sessions_ = count_present(index.session_offsets_);
  index.num_items_ = count_present(index.item_offsets_);
  return index;
}

void write_snapshot(std::ostream& out, const IndexSnapshot& snapshot) {
  out.write(kMagic.data(), kMagic.size());
  detail::put<std::uint32_t>(out, kFormatVersion);
  for (const auto* dict : {&snapshot.sessions, &snapshot.items}) {
    detail::put<std::uint64_t>(out, dict->size());
    for (const auto& name : dict->names()) detail::put_string(out, name);
  }
  snapshot.index.write(out);
  if (!out) throw Error(ErrorKind::kIo, "failed to write snapshot");
}

IndexSnapshot read_snapshot(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorKind::kMalformedInput, "not an index snapshot");
  }
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kMalformedInput, "unsupported snapshot version " + std::to_string(version));
  }
  IndexSnapshot snapshot;
  for (auto* dict : {&snapshot.sessions, &snapshot.items}) {
    const auto n = detail::get<std::uint64_t>(in);
    for (std::uint64_t k = 0; k < n; ++k) dict->intern(detail::get_string(in));
    if (dict->size() != n) throw Error(ErrorKind::kMalformedInput, "duplicate name in snapshot dictionary");
  }
  snapshot.index = BipartiteIndex::read(in);
  if (snapshot.index.session_capacity() > snapshot.sessions.size() ||
      snapshot.index.item_capacity() > snapshot.items.size()) {
    throw Error(ErrorKind::kMalformedInput, "snapshot dictionary smaller than index");
  }
  return snapshot;
}

}  // namespace cknn
