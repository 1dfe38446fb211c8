#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "parago/board.hpp"
#include "parago/mcts.hpp"

namespace parago {

/// Go Text Protocol (version 2) front end for the tree-parallel search.
class GtpEngine {
public:
    explicit GtpEngine(SearchConfig config, int board_size = 9);

    /// Handles one input line. Returns the complete response including the
    /// terminating blank line, or an empty string for blank/comment lines.
    std::string handle(std::string_view line);

    bool quit_requested() const { return quit_; }
    const Board& board() const { return board_; }
    const SearchConfig& config() const { return config_; }
    /// Stats of the most recent genmove.
    const SearchStats& last_stats() const { return last_stats_; }

    static const std::vector<std::string>& commands();

private:
    std::string dispatch(const std::string& command, const std::vector<std::string>& args, bool& ok);

    SearchConfig config_;
    Board board_;
    bool quit_ = false;
    int genmoves_ = 0;
    SearchStats last_stats_;
};

/// Reads commands until "quit" or end of input.
void gtp_serve(const SearchConfig& config, std::istream& in, std::ostream& out, int board_size = 9);

}  // namespace parago
