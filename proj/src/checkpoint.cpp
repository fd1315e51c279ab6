#include "collatz/checkpoint.hpp"

#include <json.hpp>

#include <stdexcept>

namespace collatz {

using nlohmann::json;

// Both helpers return the full line including its terminating LF: a JSONL
// line without the newline is, by the resume rules, a torn write.
std::string checkpoint_header_line(const Nat& start) {
    return std::string("{\"format\":\"") + kCheckpointFormatId + "\",\"start\":\"" +
           start.get_str(10) + "\",\"rule\":\"" + kSearchRuleId + "\"}\n";
}

std::string checkpoint_row_line(const SearchRow& row) {
    return "{\"iter\":" + std::to_string(row.iteration) + ",\"k\":" + std::to_string(row.k) +
           ",\"exp\":" + std::to_string(row.exponent) +
           ",\"sigma\":" + std::to_string(row.sigma) + ",\"n_hex\":\"" + to_hex(row.n) + "\"}\n";
}

CheckpointWriter CheckpointWriter::create(const std::string& path, const Nat& start) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open checkpoint for writing: " + path);
    f << checkpoint_header_line(start);
    f.flush();
    if (!f) throw IoError("checkpoint write failed: " + path);
    return CheckpointWriter(std::move(f));
}

CheckpointWriter CheckpointWriter::append_to(const std::string& path,
                                             const CheckpointData& data) {
    // Rewriting the prefix keeps the resumed file byte-identical to an
    // uninterrupted run even when a partial tail was dropped.
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot reopen checkpoint: " + path);
    f << checkpoint_header_line(data.start);
    for (const SearchRow& r : data.rows) f << checkpoint_row_line(r);
    f.flush();
    if (!f) throw IoError("checkpoint rewrite failed: " + path);
    return CheckpointWriter(std::move(f));
}

void CheckpointWriter::write_row(const SearchRow& row) {
    file_ << checkpoint_row_line(row);
    file_.flush();
    if (!file_) throw IoError("checkpoint append failed");
}

RowSink CheckpointWriter::sink() {
    return [this](const SearchRow& row) { write_row(row); };
}

namespace {

SearchRow parse_row_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception&) {
        throw FormatError("checkpoint row is not valid JSON: " + line);
    }
    try {
        SearchRow row;
        row.iteration = j.at("iter").get<unsigned long>();
        row.k = j.at("k").get<int>();
        row.exponent = j.at("exp").get<unsigned long>();
        row.sigma = j.at("sigma").get<unsigned long>();
        row.n = from_hex(j.at("n_hex").get<std::string>());
        if (row.k < 1 || row.k > 3) throw FormatError("checkpoint row k out of range");
        return row;
    } catch (const json::exception&) {
        throw FormatError("checkpoint row has missing or mistyped fields: " + line);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("checkpoint row: ") + e.what());
    }
}

}  // namespace

CheckpointData read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    CheckpointData data;
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < blob.size()) {
        std::size_t nl = blob.find('\n', pos);
        if (nl == std::string::npos) {
            data.had_partial_tail = true;  // crash artifact, not corruption
            break;
        }
        lines.push_back(blob.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty()) throw FormatError("checkpoint has no complete header line: " + path);

    json h;
    try {
        h = json::parse(lines[0]);
        if (h.at("format").get<std::string>() != kCheckpointFormatId)
            throw FormatError("checkpoint format id mismatch: " + path);
        data.start = parse_nat(h.at("start").get<std::string>());
        data.rule = h.at("rule").get<std::string>();
    } catch (const json::exception&) {
        throw FormatError("checkpoint header malformed: " + path);
    }
    if (data.rule != kSearchRuleId)
        throw FormatError("checkpoint was produced by rule '" + data.rule + "', this build runs '" +
                          kSearchRuleId + "'");

    for (std::size_t i = 1; i < lines.size(); ++i) {
        SearchRow row = parse_row_line(lines[i]);
        if (row.iteration != i)
            throw FormatError("checkpoint rows out of sequence at line " + std::to_string(i + 1));
        if (i > 1 && row.sigma <= data.rows.back().sigma)
            throw FormatError("checkpoint sigma not strictly increasing at line " +
                              std::to_string(i + 1));
        data.rows.push_back(std::move(row));
    }
    return data;
}

void write_checkpoint(const std::string& path, const SearchReport& report) {
    CheckpointWriter w = CheckpointWriter::create(path, report.start);
    for (const SearchRow& r : report.rows) w.write_row(r);
}

SearchState state_from_checkpoint(const CheckpointData& data, unsigned long cap) {
    SearchState state;
    state.start = data.start;
    if (data.rows.empty()) return initial_search_state(data.start, cap);

    Nat n = data.start;
    for (const SearchRow& row : data.rows) {
        unsigned long y = row.exponent - (row.k == 2 ? 1 : 0);
        n += row.k * pow2(y);
        if (n != row.n)
            throw FormatError("checkpoint addend chain does not reproduce row " +
                              std::to_string(row.iteration) + "'s n");
        state.history.emplace_back(row.k, y);
    }
    const SearchRow& last = data.rows.back();
    StopOutcome sigma = stopping_time(last.n, cap);
    if (sigma.capped())
        throw CapExceededError("checkpoint verification: sigma of last row exceeds cap " +
                               std::to_string(cap));
    if (!sigma.stopped() || sigma.steps != last.sigma)
        throw FormatError("checkpoint last row's sigma does not verify");
    state.iteration = last.iteration;
    state.n = last.n;
    state.sigma = last.sigma;
    return state;
}

}  // namespace collatz
