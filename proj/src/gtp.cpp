#include "parago/gtp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "parago/parallel.hpp"

#ifndef PARAGO_VERSION
#define PARAGO_VERSION "0.0.0"
#endif

namespace parago {

namespace {

// Drops control characters other than HT/LF, turns HT into space and strips
// comments.
std::string preprocess(std::string_view line) {
    std::string out;
    out.reserve(line.size());
    for (char ch : line) {
        if (ch == '#') break;
        if (ch == '\t') {
            out += ' ';
        } else if (static_cast<unsigned char>(ch) >= 32 && ch != 127) {
            out += ch;
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> parts;
    for (std::string tok; in >> tok;) parts.push_back(tok);
    return parts;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

bool parse_color(const std::string& text, Color& out) {
    const std::string s = lower(text);
    if (s == "b" || s == "black") {
        out = Color::Black;
        return true;
    }
    if (s == "w" || s == "white") {
        out = Color::White;
        return true;
    }
    return false;
}

}  // namespace

GtpEngine::GtpEngine(SearchConfig config, int board_size) : config_(std::move(config)), board_(board_size) {
    config_.validate();
}

const std::vector<std::string>& GtpEngine::commands() {
    static const std::vector<std::string> list{"protocol_version", "name",         "version",
                                               "known_command",    "list_commands", "boardsize",
                                               "clear_board",      "komi",          "play",
                                               "genmove",          "quit"};
    return list;
}

std::string GtpEngine::handle(std::string_view raw) {
    const auto tokens = split(preprocess(raw));
    if (tokens.empty()) return {};

    std::size_t pos = 0;
    std::string id;
    if (std::all_of(tokens[0].begin(), tokens[0].end(), [](unsigned char c) { return std::isdigit(c); })) {
        id = tokens[0];
        pos = 1;
    }
    if (pos >= tokens.size()) return "?" + id + " syntax error\n\n";
    const std::string command = tokens[pos];
    const std::vector<std::string> args(tokens.begin() + static_cast<std::ptrdiff_t>(pos) + 1, tokens.end());

    bool ok = true;
    const std::string body = dispatch(command, args, ok);
    return (ok ? "=" : "?") + id + " " + body + "\n\n";
}

std::string GtpEngine::dispatch(const std::string& command, const std::vector<std::string>& args, bool& ok) {
    auto fail = [&ok](std::string msg) {
        ok = false;
        return msg;
    };

    if (command == "protocol_version") return "2";
    if (command == "name") return "parago";
    if (command == "version") return PARAGO_VERSION;
    if (command == "known_command") {
        if (args.size() != 1) return fail("syntax error");
        const auto& cmds = commands();
        return std::find(cmds.begin(), cmds.end(), args[0]) != cmds.end() ? "true" : "false";
    }
    if (command == "list_commands") {
        std::string out;
        for (const auto& c : commands()) out += (out.empty() ? "" : "\n") + c;
        return out;
    }
    if (command == "quit") {
        quit_ = true;
        return "";
    }
    if (command == "boardsize") {
        if (args.size() != 1) return fail("syntax error");
        int n = 0;
        const auto* end = args[0].data() + args[0].size();
        auto [ptr, ec] = std::from_chars(args[0].data(), end, n);
        if (ec != std::errc() || ptr != end) return fail("syntax error");
        if (n < Board::kMinSize || n > Board::kMaxSize) return fail("unacceptable size");
        board_ = Board(n);
        return "";
    }
    if (command == "clear_board") {
        board_ = Board(board_.size());
        return "";
    }
    if (command == "komi") {
        if (args.size() != 1) return fail("syntax error");
        try {
            std::size_t used = 0;
            const double k = std::stod(args[0], &used);
            if (used != args[0].size()) return fail("syntax error");
            config_.komi = k;
        } catch (const std::exception&) {
            return fail("syntax error");
        }
        return "";
    }
    if (command == "play") {
        Color c = Color::Empty;
        if (args.size() != 2 || !parse_color(args[0], c)) return fail("syntax error");
        Move m;
        try {
            m = parse_vertex(args[1], board_.size());
        } catch (const std::invalid_argument&) {
            return fail("syntax error");
        }
        Board next = board_;
        next.set_to_move(c);
        try {
            next.play(m);
        } catch (const IllegalMove&) {
            return fail("illegal move");
        }
        board_ = std::move(next);
        return "";
    }
    if (command == "genmove") {
        Color c = Color::Empty;
        if (args.size() != 1 || !parse_color(args[0], c)) return fail("syntax error");
        if (board_.game_over()) return "pass";
        board_.set_to_move(c);
        SearchConfig cfg = config_;
        cfg.seed = config_.seed + static_cast<std::uint64_t>(genmoves_++) * 0x9e3779b97f4a7c15ULL;
        SearchResult r = parallel_search(board_, cfg);
        last_stats_ = r.stats;
        board_.play(r.move);
        return to_vertex(r.move, board_.size());
    }
    return fail("unknown command");
}

void gtp_serve(const SearchConfig& config, std::istream& in, std::ostream& out, int board_size) {
    GtpEngine engine(config, board_size);
    for (std::string line; std::getline(in, line);) {
        const std::string response = engine.handle(line);
        if (!response.empty()) out << response << std::flush;
        if (engine.quit_requested()) break;
    }
}

}  // namespace parago
