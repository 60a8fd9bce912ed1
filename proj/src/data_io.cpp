#include "cknn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "cknn/error.hpp"
#include "cknn/rng.hpp"
#include "cknn/logging.hpp"

namespace cknn {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> parse_int(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2 ? 1 : 0;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<Timestamp> parse_iso(std::string_view s) {
  // YYYY-MM-DD[T| ]HH:MM:SS[.fraction][Z|+hh:mm|-hh:mm]
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  const auto year = parse_int<int>(s.substr(0, 4));
  const auto month = parse_int<unsigned>(s.substr(5, 2));
  const auto day = parse_int<unsigned>(s.substr(8, 2));
  const auto hour = parse_int<unsigned>(s.substr(11, 2));
  const auto minute = parse_int<unsigned>(s.substr(14, 2));
  const auto second = parse_int<unsigned>(s.substr(17, 2));
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31 || *hour > 23 || *minute > 59 || *second > 60) {
    return std::nullopt;
  }
  auto rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    std::size_t digits = 0;
    while (digits < rest.size() && rest[digits] >= '0' && rest[digits] <= '9') ++digits;
    if (digits == 0) return std::nullopt;
    rest.remove_prefix(digits);
  }
  std::int64_t offset = 0;
  if (rest == "Z" || rest.empty()) {
  } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
    const auto oh = parse_int<unsigned>(rest.substr(1, 2));
    const auto om = parse_int<unsigned>(rest.substr(4, 2));
    if (!oh || !om) return std::nullopt;
    offset = (rest[0] == '+' ? 1 : -1) * static_cast<std::int64_t>(*oh * 3600 + *om * 60);
  } else {
    return std::nullopt;
  }
  const auto days = days_from_civil(*year, *month, *day);
  return days * 86'400 + *hour * 3600 + *minute * 60 + *second - offset;
}

std::int64_t day_of(Timestamp ts, Timestamp day_length) { return ts / day_length; }

/// Day of each session's last interaction.
std::unordered_map<SessionId, std::int64_t> session_days(std::span<const Interaction> interactions,
                                                         Timestamp day_length) {
  if (day_length <= 0) throw Error(ErrorKind::kInvalidArgument, "day length must be positive");
  std::unordered_map<SessionId, Timestamp> last;
  for (const auto& e : interactions) {
    auto [it, inserted] = last.try_emplace(e.session, e.timestamp);
    if (!inserted) it->second = std::max(it->second, e.timestamp);
  }
  std::unordered_map<SessionId, std::int64_t> days;
  days.reserve(last.size());
  for (const auto& [s, ts] : last) days.emplace(s, day_of(ts, day_length));
  return days;
}

Split split_range(std::span<const Interaction> interactions, const std::unordered_map<SessionId, std::int64_t>& days,
                  std::int64_t train_first, std::int64_t test_first, std::int64_t test_last) {
  Split split;
  split.train_first_day = train_first;
  split.test_first_day = test_first;
  split.test_last_day = test_last;
  for (const auto& e : interactions) {
    const auto d = days.at(e.session);
    if (d >= test_first && d <= test_last) {
      split.test.push_back(e);
    } else if (d >= train_first && d < test_first) {
      split.train.push_back(e);
    }
  }
  if (split.train.empty()) throw Error(ErrorKind::kSplit, "split leaves the training set empty");
  if (split.test.empty()) throw Error(ErrorKind::kSplit, "split leaves the test set empty");
  return split;
}

/// Poisson draw with a portable algorithm (std::poisson_distribution is
/// implementation-defined).
std::size_t poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 50.0) {
    // Normal approximation via Box-Muller.
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return static_cast<std::size_t>(std::max(0.0, std::round(mean + z * std::sqrt(mean))));
  }
  const double limit = std::exp(-mean);
  std::size_t k = 0;
  double p = rng.uniform();
  while (p > limit) {
    ++k;
    p *= rng.uniform();
  }
  return k;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (auto v = parse_int<Timestamp>(text)) return v;
  return parse_iso(text);
}

InteractionLog load_timestamped_log(std::istream& in, const LogFormat& format, LoadStats* stats) {
  if (!in) throw Error(ErrorKind::kIo, "unreadable input stream");
  InteractionLog log;
  LoadStats local;
  const auto needed = std::max({format.session_column, format.item_column, format.time_column}) + 1;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (first && format.header) {
      first = false;
      continue;
    }
    first = false;
    if (trim(line).empty()) continue;
    ++local.rows;
    const auto fields = split_fields(line, format.delimiter);
    bool ok = fields.size() >= needed;
    std::string_view session;
    std::string_view item;
    std::optional<Timestamp> ts;
    if (ok) {
      session = trim(fields[format.session_column]);
      item = trim(fields[format.item_column]);
      ts = parse_timestamp(fields[format.time_column]);
      ok = !session.empty() && !item.empty() && ts && *ts >= 0;
    }
    if (!ok) {
      ++local.malformed;
      if (local.warnings.size() < 10) local.warnings.push_back("malformed row at line " + std::to_string(line_no));
      continue;
    }
    log.rows.push_back({SessionId{log.sessions.intern(session)}, ItemId{log.items.intern(item)}, *ts});
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "read error");
  if (local.malformed > 0) {
    const double fraction = static_cast<double>(local.malformed) / static_cast<double>(local.rows);
    const auto message = std::to_string(local.malformed) + " of " + std::to_string(local.rows) + " rows malformed";
    if (fraction > format.max_malformed_fraction) throw Error(ErrorKind::kMalformedInput, message);
    local.warnings.push_back(message);
    logging::warn(message);
  }
  if (stats) *stats = std::move(local);
  return log;
}

void write_log(std::ostream& out, const InteractionLog& log) {
  out << "session_id\titem_id\ttimestamp\n";
  for (const auto& e : log.rows) {
    out << log.sessions.name(e.session.value) << '\t' << log.items.name(e.item.value) << '\t' << e.timestamp << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed to write log");
}

InteractionLog load_playlists(std::istream& in, const PlaylistFormat& format, LoadStats* stats) {
  if (!in) throw Error(ErrorKind::kIo, "unreadable input stream");
  if (format.total_days == 0) throw Error(ErrorKind::kInvalidArgument, "total_days must be positive");
  if (format.day_length <= 0) throw Error(ErrorKind::kInvalidArgument, "day length must be positive");
  InteractionLog log;
  LoadStats local;
  Rng rng(derive_seed(format.seed, 0x706c61796c697374ULL));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++local.rows;
    const auto fields = split_fields(line, format.delimiter);
    const auto id = trim(fields.front());
    std::vector<std::string_view> items;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (auto f = trim(fields[k]); !f.empty()) items.push_back(f);
    }
    if (id.empty() || items.empty() || static_cast<Timestamp>(items.size()) > format.day_length) {
      ++local.malformed;
      auto message = "skipped playlist at line " + std::to_string(line_no);
      logging::warn(message);
      local.warnings.push_back(std::move(message));
      continue;
    }
    const auto day = static_cast<Timestamp>(rng.below(format.total_days));
    const auto slack = static_cast<std::uint64_t>(format.day_length - static_cast<Timestamp>(items.size()));
    const auto start = day * format.day_length + static_cast<Timestamp>(rng.below(slack + 1));
    const SessionId session{log.sessions.intern(id)};
    for (std::size_t k = 0; k < items.size(); ++k) {
      log.rows.push_back({session, ItemId{log.items.intern(items[k])}, start + static_cast<Timestamp>(k)});
    }
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "read error");
  if (stats) *stats = std::move(local);
  return log;
}

Split split_by_days(std::span<const Interaction> interactions, const SplitSpec& spec) {
  if (spec.test_days == 0) throw Error(ErrorKind::kInvalidArgument, "test_days must be positive");
  if (interactions.empty()) throw Error(ErrorKind::kEmptyDataset, "empty dataset");
  const auto days = session_days(interactions, spec.day_length);
  std::int64_t min_day = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_day = std::numeric_limits<std::int64_t>::min();
  for (const auto& [s, d] : days) {
    min_day = std::min(min_day, d);
    max_day = std::max(max_day, d);
  }
  const auto span_days = max_day - min_day + 1;
  const auto required = static_cast<std::int64_t>(spec.test_days) + 1;
  if (span_days < required) {
    throw Error(ErrorKind::kSplit, "data spans " + std::to_string(span_days) + " day(s); the split needs at least " +
                                       std::to_string(required));
  }
  const auto boundary = max_day - static_cast<std::int64_t>(spec.test_days);
  const auto train_first =
      spec.train_days == 0 ? min_day : boundary - static_cast<std::int64_t>(spec.train_days) + 1;
  return split_range(interactions, days, train_first, boundary + 1, max_day);
}

std::vector<std::int64_t> window_starts(std::int64_t total_days, std::size_t window_days, std::size_t window_count) {
  if (window_days < 2) throw Error(ErrorKind::kInvalidArgument, "window must span at least two days");
  if (window_count == 0) throw Error(ErrorKind::kInvalidArgument, "window_count must be positive");
  const auto w = static_cast<std::int64_t>(window_days);
  if (total_days < w) {
    throw Error(ErrorKind::kSplit, "data spans " + std::to_string(total_days) + " day(s); a window needs " +
                                       std::to_string(window_days));
  }
  std::vector<std::int64_t> starts;
  const auto slack = total_days - w;
  const auto n = static_cast<std::int64_t>(window_count);
  for (std::int64_t k = 0; k < n; ++k) starts.push_back(n == 1 ? 0 : k * slack / (n - 1));
  return starts;
}

std::vector<Split> rolling_windows(std::span<const Interaction> interactions, std::size_t window_days,
                                   std::size_t window_count, Timestamp day_length) {
  if (interactions.empty()) throw Error(ErrorKind::kEmptyDataset, "empty dataset");
  const auto days = session_days(interactions, day_length);
  std::int64_t min_day = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_day = std::numeric_limits<std::int64_t>::min();
  for (const auto& [s, d] : days) {
    min_day = std::min(min_day, d);
    max_day = std::max(max_day, d);
  }
  std::vector<Split> windows;
  const auto w = static_cast<std::int64_t>(window_days);
  for (const auto offset : window_starts(max_day - min_day + 1, window_days, window_count)) {
    const auto first = min_day + offset;
    const auto test_day = first + w - 1;
    windows.push_back(split_range(interactions, days, first, test_day, test_day));
  }
  return windows;
}

InteractionLog gen_synthetic(const SyntheticSpec& spec) {
  if (spec.num_sessions == 0 || spec.catalog_size < 2 || spec.mean_length <= 0.0 || spec.popularity_skew < 0.0 ||
      spec.day_span == 0 || spec.day_length <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "synthetic parameters must be positive (catalog of at least 2 items)");
  }
  InteractionLog log;
  for (std::size_t i = 0; i < spec.catalog_size; ++i) log.items.intern(std::to_string(i));

  std::vector<double> cdf(spec.catalog_size);
  double total = 0.0;
  for (std::size_t i = 0; i < spec.catalog_size; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), spec.popularity_skew);
    cdf[i] = total;
  }
  for (auto& c : cdf) c /= total;

  Rng rng(derive_seed(spec.seed, 0x73796e7468ULL));
  const auto draw_item = [&] {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform());
    return static_cast<std::uint32_t>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                                                            spec.catalog_size - 1));
  };

  constexpr Timestamp kMaxGap = 120;
  const Timestamp horizon = static_cast<Timestamp>(spec.day_span) * spec.day_length;
  std::vector<std::uint32_t> session_items;
  for (std::size_t s = 0; s < spec.num_sessions; ++s) {
    std::size_t length = 2 + poisson(rng, spec.mean_length - 2.0);
    length = std::min(length, spec.catalog_size);
    session_items.clear();
    std::size_t attempts = 0;
    while (session_items.size() < length && attempts < 100 * length) {
      ++attempts;
      const auto item = draw_item();
      if (std::find(session_items.begin(), session_items.end(), item) == session_items.end()) {
        session_items.push_back(item);
      }
    }
    // Popularity can make distinct draws slow; fill with the least popular unused items.
    for (auto item = static_cast<std::uint32_t>(spec.catalog_size); session_items.size() < length && item-- > 0;) {
      if (std::find(session_items.begin(), session_items.end(), item) == session_items.end()) {
        session_items.push_back(item);
      }
    }
    const Timestamp duration = static_cast<Timestamp>(length) * kMaxGap;
    const Timestamp latest_start = std::max<Timestamp>(0, horizon - duration - 1);
    Timestamp ts = static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(latest_start) + 1));
    const SessionId session{log.sessions.intern(std::to_string(s))};
    for (const auto item : session_items) {
      log.rows.push_back({session, ItemId{item}, ts});
      ts += 1 + static_cast<Timestamp>(rng.below(kMaxGap));
    }
  }
  return log;
}

std::vector<Interaction> filter_interactions(std::span<const Interaction> interactions,
                                             std::size_t min_session_length, std::size_t min_item_support) {
  std::vector<Interaction> rows(interactions.begin(), interactions.end());
  if (min_item_support > 0) {
    std::unordered_map<ItemId, std::vector<SessionId>> sessions_per_item;
    for (const auto& e : rows) sessions_per_item[e.item].push_back(e.session);
    std::unordered_map<ItemId, std::size_t> support;
    for (auto& [item, sessions] : sessions_per_item) {
      std::sort(sessions.begin(), sessions.end());
      support[item] = static_cast<std::size_t>(std::unique(sessions.begin(), sessions.end()) - sessions.begin());
    }
    std::erase_if(rows, [&](const Interaction& e) { return support.at(e.item) < min_item_support; });
  }
  if (min_session_length > 0) {
    std::unordered_map<SessionId, std::vector<ItemId>> items_per_session;
    for (const auto& e : rows) items_per_session[e.session].push_back(e.item);
    std::unordered_map<SessionId, std::size_t> length;
    for (auto& [session, items] : items_per_session) {
      std::sort(items.begin(), items.end());
      length[session] = static_cast<std::size_t>(std::unique(items.begin(), items.end()) - items.begin());
    }
    std::erase_if(rows, [&](const Interaction& e) { return length.at(e.session) < min_session_length; });
  }
  return rows;
}

}  // namespace cknn
