#include <gtest/gtest.h>

#include <sstream>

#include "parago/gtp.hpp"

using namespace parago;

namespace {

SearchConfig quick() {
    SearchConfig cfg;
    cfg.budget = Budget::playouts(50);
    return cfg;
}

}  // namespace

TEST(Gtp, ProtocolVersion) {
    GtpEngine e(quick());
    EXPECT_EQ(e.handle("protocol_version"), "= 2\n\n");
    EXPECT_EQ(e.handle("7 protocol_version"), "=7 2\n\n");
}

TEST(Gtp, ScriptedDialogue) {
    GtpEngine e(quick());
    const std::vector<std::pair<std::string, std::string>> script{
        {"1 name", "=1 parago\n\n"},
        {"2 boardsize 5", "=2 \n\n"},
        {"3 clear_board", "=3 \n\n"},
        {"4 komi 0.5", "=4 \n\n"},
        {"5 play b C3", "=5 \n\n"},
        {"6 play w C3", "?6 illegal move\n\n"},
        {"7 play w Z9", "?7 syntax error\n\n"},
        {"8 frobnicate", "?8 unknown command\n\n"},
        {"9 known_command genmove", "=9 true\n\n"},
        {"10 known_command frobnicate", "=10 false\n\n"},
        {"11 boardsize 42", "?11 unacceptable size\n\n"},
        {"", ""},
        {"# just a comment", ""},
        {"12 play\tw   B2", "=12 \n\n"},
        {"13 quit", "=13 \n\n"},
    };
    for (const auto& [in, out] : script) EXPECT_EQ(e.handle(in), out) << in;
    EXPECT_TRUE(e.quit_requested());
    EXPECT_EQ(e.board().at(2, 2), Color::Black);
    EXPECT_EQ(e.board().at(1, 1), Color::White);
}

TEST(Gtp, GenmoveIsLegal) {
    GtpEngine e(quick());
    e.handle("boardsize 9");
    const Board before = e.board();
    const std::string reply = e.handle("genmove b");
    ASSERT_EQ(reply.substr(0, 2), "= ");
    ASSERT_EQ(reply.substr(reply.size() - 2), "\n\n");
    const Move m = parse_vertex(reply.substr(2, reply.size() - 4), 9);
    EXPECT_TRUE(before.is_legal(m));
    EXPECT_EQ(e.board().to_move(), Color::White);
}

TEST(Gtp, TenMoveDialogueMatchesDirectDrive) {
    const std::vector<std::string> vertices{"E5", "C3", "G7", "C7", "G3", "E3", "E7", "pass", "D4", "F6"};
    GtpEngine e(quick());
    e.handle("boardsize 9");
    Board direct(9);
    Color c = Color::Black;
    for (const auto& v : vertices) {
        const std::string color = c == Color::Black ? "b" : "w";
        ASSERT_EQ(e.handle("play " + color + " " + v), "= \n\n");
        direct.play(parse_vertex(v, 9));
        c = opponent(c);
    }
    EXPECT_EQ(e.board().hash(), direct.hash());
    EXPECT_EQ(e.board().to_string(), direct.to_string());
}

TEST(Gtp, ServeStopsAtQuit) {
    std::istringstream in("protocol_version\nquit\nname\n");
    std::ostringstream out;
    gtp_serve(quick(), in, out);
    EXPECT_EQ(out.str(), "= 2\n\n= \n\n");
}

TEST(Gtp, GenmoveAfterGameEndPasses) {
    GtpEngine e(quick());
    e.handle("play b pass");
    e.handle("play w pass");
    EXPECT_EQ(e.handle("genmove b"), "= pass\n\n");
}
