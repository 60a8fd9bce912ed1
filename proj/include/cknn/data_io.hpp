#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cknn/id_dictionary.hpp"
#include "cknn/types.hpp"

namespace cknn {

/// Interactions with the dictionaries of their interned ids.
struct InteractionLog {
  std::vector<Interaction> rows;
  IdDictionary sessions;
  IdDictionary items;
};

/// Delimiter-separated click log layout. Column indices are 0-based.
struct LogFormat {
  char delimiter = '\t';
  bool header = true;
  std::size_t session_column = 0;
  std::size_t item_column = 1;
  std::size_t time_column = 2;
  /// Loading fails when malformed rows exceed this fraction of data rows.
  double max_malformed_fraction = 0.01;
};

struct LoadStats {
  std::size_t rows = 0;       ///< data rows seen (header excluded)
  std::size_t malformed = 0;  ///< rows skipped
  std::vector<std::string> warnings;
};

/// Integer ticks, or an ISO-8601 UTC datetime ("2014-04-07T10:51:09.277Z",
/// "2014-04-07 10:51:09", optional "+hh:mm" offset) converted to epoch
/// seconds (fractional seconds dropped).
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Throws Error{kIo} on an unreadable stream and Error{kMalformedInput} when
/// the malformed fraction exceeds the format's threshold.
InteractionLog load_timestamped_log(std::istream& in, const LogFormat& format = {}, LoadStats* stats = nullptr);

/// Canonical log: header "session_id<TAB>item_id<TAB>timestamp", then one row
/// per interaction in stored order. Loading with the default LogFormat and
/// writing again reproduces the bytes.
void write_log(std::ostream& out, const InteractionLog& log);

struct PlaylistFormat {
  char delimiter = '\t';
  std::size_t total_days = 31;
  Timestamp day_length = 86'400;
  std::uint64_t seed = 0;
};

/// One playlist per line: identifier, then items, all separated by the
/// delimiter. Each playlist gets a uniform-random day in [0, total_days) and
/// a random start inside it; its items get consecutive ticks in order.
/// Playlists without items are skipped with a warning.
InteractionLog load_playlists(std::istream& in, const PlaylistFormat& format = {}, LoadStats* stats = nullptr);

/// Day-based split. A session belongs to the day of its last interaction.
/// The last test_days days are the test set; the train_days days before them
/// (all earlier days when train_days is 0) are the training set.
struct SplitSpec {
  std::size_t train_days = 0;
  std::size_t test_days = 1;
  Timestamp day_length = 86'400;
};

struct Split {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  std::int64_t train_first_day = 0;
  std::int64_t test_first_day = 0;
  std::int64_t test_last_day = 0;
};

/// Throws Error{kSplit} when there are not enough days or either side is empty.
Split split_by_days(std::span<const Interaction> interactions, const SplitSpec& spec = {});

/// window_count windows of window_days consecutive days, strided evenly from
/// the first to the last day of the data. Each window trains on its first
/// window_days - 1 days and tests on its last day.
std::vector<Split> rolling_windows(std::span<const Interaction> interactions, std::size_t window_days = 91,
                                   std::size_t window_count = 5, Timestamp day_length = 86'400);

/// First day of each rolling window relative to the data's first day.
std::vector<std::int64_t> window_starts(std::int64_t total_days, std::size_t window_days, std::size_t window_count);

struct SyntheticSpec {
  std::size_t num_sessions = 1000;
  std::size_t catalog_size = 500;
  double mean_length = 4.0;
  double popularity_skew = 1.0;
  std::uint64_t seed = 7;
  std::size_t day_span = 31;
  Timestamp day_length = 86'400;
};

/// Sessions with 2 + Poisson(mean_length - 2) distinct items (at least 2,
/// at most the catalog), items drawn from a Zipf(popularity_skew)
/// popularity law with item id = popularity rank, and session start times
/// uniform over the day span. Session and item names are their decimal ids.
InteractionLog gen_synthetic(const SyntheticSpec& spec);

/// Optional preprocessing filters; zero disables a filter. Items with fewer
/// than min_item_support sessions are removed first, then sessions with
/// fewer than min_session_length distinct items.
std::vector<Interaction> filter_interactions(std::span<const Interaction> interactions,
                                             std::size_t min_session_length, std::size_t min_item_support);

}  // namespace cknn
