#pragma once

#include "collatz/search.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace collatz {

inline constexpr const char* kCheckpointFormatId = "collatz-search/1";

struct CheckpointData {
    Nat start;
    std::string rule;
    std::vector<SearchRow> rows;
    bool had_partial_tail = false;  // a half-written trailing line was discarded
};

// One JSON object per line; byte-stable so that resumed runs rewrite
// identical files.
std::string checkpoint_header_line(const Nat& start);
std::string checkpoint_row_line(const SearchRow& row);

// Append-only, one flush per row, so a killed run loses at most the line it
// was writing.
class CheckpointWriter {
  public:
    // Fresh file: truncate and write the header.
    static CheckpointWriter create(const std::string& path, const Nat& start);
    // Continue a read checkpoint: rewrite the surviving prefix (dropping any
    // partial tail), leaving the stream positioned to append.
    static CheckpointWriter append_to(const std::string& path, const CheckpointData& data);

    void write_row(const SearchRow& row);
    RowSink sink();  // convenience adapter for run_search/resume_search

  private:
    explicit CheckpointWriter(std::ofstream f) : file_(std::move(f)) {}
    std::ofstream file_;
};

// Parses the whole file. A final line without a newline is discarded (crash
// tolerance) and flagged; any malformed complete line is corruption and
// throws FormatError.
CheckpointData read_checkpoint(const std::string& path);

// One-shot dump of a finished report.
void write_checkpoint(const std::string& path, const SearchReport& report);

// Rebuild the search state at data's last row. Replays the addend history,
// cross-checks every row's n, and recomputes the final sigma; disagreement
// is corruption. Throws CapExceededError if the verification itself caps.
SearchState state_from_checkpoint(const CheckpointData& data, unsigned long cap = kDefaultCap);

}  // namespace collatz
