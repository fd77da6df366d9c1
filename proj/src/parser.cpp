#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#include "lqcheck/error.hpp"
#include "lqcheck/program.hpp"

namespace lqcheck::lang {

namespace {

using qmath::Complex;
using qmath::Matrix;

enum class TokKind { Ident, Number, Imag, Ket, Symbol, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    double number = 0.0;
    bool integral = false;
    std::size_t line = 1;
    std::size_t col = 1;
};

const std::set<std::string_view> kKeywords = {"nil",     "if",     "then",  "else",  "tau",   "meas",       "not",
                                              "or",      "true",   "false", "proc",  "channel", "qubits",   "state",
                                              "superop", "measurement"};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size()) {
                t.kind = TokKind::End;
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) {
                    advance();
                }
                t.kind = TokKind::Ident;
                t.text = std::string(src_.substr(start, pos_ - start));
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_number(t);
            } else if (c == '|' && peek(1) != '|') {
                lex_ket(t);
            } else {
                lex_symbol(t);
            }
            out.push_back(std::move(t));
        }
    }

private:
    static bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

    char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '-' && peek(1) == '-') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
            } else {
                return;
            }
        }
    }

    void lex_number(Token& t) {
        std::size_t start = pos_;
        bool integral = true;
        while (std::isdigit(static_cast<unsigned char>(peek(0)))) {
            advance();
        }
        if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            integral = false;
            advance();
            while (std::isdigit(static_cast<unsigned char>(peek(0)))) {
                advance();
            }
        }
        if ((peek(0) == 'e' || peek(0) == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            integral = false;
            advance();
            if (peek(0) == '-' || peek(0) == '+') {
                advance();
            }
            while (std::isdigit(static_cast<unsigned char>(peek(0)))) {
                advance();
            }
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        t.number = std::stod(t.text);
        t.integral = integral;
        t.kind = TokKind::Number;
        if (peek(0) == 'i' && !is_ident_char(peek(1))) {
            advance();
            t.kind = TokKind::Imag;
            t.integral = false;
        }
    }

    void lex_ket(Token& t) {
        advance();
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '>') {
            char c = src_[pos_];
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-')) {
                throw ParseError("malformed ket label", t.line, t.col);
            }
            advance();
        }
        if (pos_ >= src_.size()) {
            throw ParseError("unterminated ket", t.line, t.col);
        }
        t.kind = TokKind::Ket;
        t.text = std::string(src_.substr(start, pos_ - start));
        advance();
    }

    void lex_symbol(Token& t) {
        static const char* kTwo[] = {"||", "..", "<="};
        for (const char* two : kTwo) {
            if (src_[pos_] == two[0] && peek(1) == two[1]) {
                t.kind = TokKind::Symbol;
                t.text = two;
                advance();
                advance();
                return;
            }
        }
        static const std::string kOne = ".+\\{}()[],:!?>=*/-^;";
        char c = src_[pos_];
        if (kOne.find(c) == std::string::npos) {
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        }
        t.kind = TokKind::Symbol;
        t.text = std::string(1, c);
        advance();
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

class Parser {
public:
    Parser(std::vector<Token> toks, Program prog) : toks_(std::move(toks)), prog_(std::move(prog)) {}

    Program parse_program() {
        bool saw_state = false;
        std::vector<WeightedState> states;
        while (!at_end()) {
            const Token& t = cur();
            if (is_word("channel")) {
                parse_channel();
            } else if (is_word("qubits")) {
                parse_qubits();
            } else if (is_word("state")) {
                saw_state = true;
                states.push_back(parse_state());
            } else if (is_word("proc")) {
                parse_definition();
            } else if (is_word("superop")) {
                parse_superop();
            } else if (is_word("measurement")) {
                parse_measurement();
            } else {
                throw ParseError("expected a declaration, found '" + describe(t) + "'", t.line, t.col);
            }
        }
        if (prog_.definitions.empty()) {
            const Token& t = cur();
            throw ParseError("program defines no process", t.line, t.col);
        }
        if (saw_state) {
            prog_.initial = std::move(states);
        } else if (prog_.initial.empty() || prog_.initial.front().rho.n_qubits() != prog_.qubits.size()) {
            prog_.initial = {WeightedState{1.0, qmath::outer(qmath::ket(std::string(prog_.qubits.size(), '0')))}};
            if (prog_.qubits.empty()) {
                prog_.initial = {WeightedState{1.0, qmath::DensityOperator::scalar(1.0)}};
            }
        }
        auto main_it = std::find_if(prog_.definitions.begin(), prog_.definitions.end(),
                                    [](const auto& d) { return d.first == "Main"; });
        if (main_it == prog_.definitions.end()) {
            main_it = std::prev(prog_.definitions.end());
        }
        prog_.main_name = main_it->first;
        prog_.main = main_it->second;
        return std::move(prog_);
    }

    ProcessPtr parse_lone_process() {
        auto p = parse_sum();
        if (!at_end()) {
            fail("unexpected '" + describe(cur()) + "' after process");
        }
        return p;
    }

private:
    struct Unary {
        ProcessPtr proc;
        std::optional<std::vector<Prefix>> bare;
    };

    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(std::size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at_end() const { return cur().kind == TokKind::End; }

    static std::string describe(const Token& t) {
        if (t.kind == TokKind::End) {
            return "end of input";
        }
        if (t.kind == TokKind::Ket) {
            return "|" + t.text + ">";
        }
        return t.text;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().line, cur().col); }
    [[noreturn]] void fail_at(const Token& t, const std::string& msg) const { throw ParseError(msg, t.line, t.col); }

    bool is_sym(std::string_view s) const { return cur().kind == TokKind::Symbol && cur().text == s; }
    bool is_word(std::string_view s) const { return cur().kind == TokKind::Ident && cur().text == s; }

    bool accept_sym(std::string_view s) {
        if (is_sym(s)) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool accept_word(std::string_view s) {
        if (is_word(s)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_sym(std::string_view s) {
        if (!accept_sym(s)) {
            fail("expected '" + std::string(s) + "', found '" + describe(cur()) + "'");
        }
    }

    void expect_word(std::string_view s) {
        if (!accept_word(s)) {
            fail("expected '" + std::string(s) + "', found '" + describe(cur()) + "'");
        }
    }

    std::string expect_ident(const std::string& what) {
        if (cur().kind != TokKind::Ident || is_keyword(cur().text)) {
            fail("expected " + what + ", found '" + describe(cur()) + "'");
        }
        return toks_[pos_++].text;
    }

    Nat expect_nat() {
        if (cur().kind != TokKind::Number || !cur().integral) {
            fail("expected a natural number, found '" + describe(cur()) + "'");
        }
        return static_cast<Nat>(std::stoull(toks_[pos_++].text));
    }

    bool is_qubit(const std::string& name) const {
        return std::find(prog_.qubits.begin(), prog_.qubits.end(), name) != prog_.qubits.end();
    }

    // Declarations.

    void parse_channel() {
        expect_word("channel");
        std::vector<std::pair<std::string, Token>> names;
        do {
            Token t = cur();
            names.emplace_back(expect_ident("channel name"), t);
        } while (accept_sym(","));
        expect_sym(":");
        ChannelType type = parse_channel_type();
        for (const auto& [name, tok] : names) {
            auto it = prog_.channels.find(name);
            if (it != prog_.channels.end() && !(it->second == type)) {
                fail_at(tok, "channel '" + name + "' redeclared with a different type");
            }
            prog_.channels[name] = type;
        }
    }

    ChannelType parse_channel_type() {
        if (accept_word("qubit")) {
            return ChannelType::qubit();
        }
        if (accept_word("bit")) {
            return ChannelType::bit();
        }
        if (accept_word("bool")) {
            return ChannelType::boolean();
        }
        if (accept_word("nat")) {
            expect_sym("(");
            Nat lo = expect_nat();
            expect_sym("..");
            Nat hi = expect_nat();
            expect_sym(")");
            if (hi < lo) {
                fail("empty nat range");
            }
            return ChannelType::nat(lo, hi);
        }
        fail("expected a channel type (qubit, bit, bool, nat(a..b)), found '" + describe(cur()) + "'");
    }

    void parse_qubits() {
        Token start = cur();
        expect_word("qubits");
        std::vector<std::string> names;
        while (cur().kind == TokKind::Ident && !is_keyword(cur().text)) {
            std::string n = toks_[pos_++].text;
            if (std::find(names.begin(), names.end(), n) != names.end()) {
                fail_at(toks_[pos_ - 1], "qubit '" + n + "' declared twice");
            }
            names.push_back(n);
        }
        if (!prog_.qubits.empty() && prog_.qubits != names) {
            fail_at(start, "qubit register redeclared differently");
        }
        prog_.qubits = std::move(names);
    }

    void parse_definition() {
        expect_word("proc");
        Token t = cur();
        std::string name = expect_ident("process name");
        if (prog_.definition(name) && !base_defs_.count(name)) {
            fail_at(t, "process '" + name + "' defined twice");
        }
        expect_sym("=");
        auto body = parse_sum();
        auto it = std::find_if(prog_.definitions.begin(), prog_.definitions.end(),
                               [&](const auto& d) { return d.first == name; });
        if (it != prog_.definitions.end()) {
            prog_.definitions.erase(it);
        }
        base_defs_.erase(name);
        prog_.definitions.emplace_back(name, body);
    }

    void parse_superop() {
        expect_word("superop");
        Token t = cur();
        std::string name = expect_ident("superoperator name");
        check_fresh_operator(t, name);
        expect_sym("=");
        auto mats = parse_matrix_list();
        try {
            qmath::Superoperator op(mats);
            if (op.n_qubits() == 0) {
                fail_at(t, "superoperator '" + name + "' must act on at least one qubit");
            }
            prog_.superops[name] = std::make_shared<OpDef>(OpDef{name, std::move(op)});
        } catch (const std::invalid_argument& e) {
            fail_at(t, "invalid superoperator '" + name + "': " + e.what());
        }
    }

    void parse_measurement() {
        expect_word("measurement");
        Token t = cur();
        std::string name = expect_ident("measurement name");
        check_fresh_operator(t, name);
        expect_sym("=");
        auto mats = parse_matrix_list();
        try {
            prog_.measurements[name] = std::make_shared<MeasDef>(MeasDef{name, qmath::Measurement(mats)});
        } catch (const std::invalid_argument& e) {
            fail_at(t, "invalid measurement '" + name + "': " + e.what());
        }
    }

    void check_fresh_operator(const Token& t, const std::string& name) {
        if (builtin_superop(name) || builtin_measurement(name) || name == "coin" || prog_.superops.count(name) ||
            prog_.measurements.count(name)) {
            fail_at(t, "operator '" + name + "' already defined");
        }
    }

    std::vector<Matrix> parse_matrix_list() {
        std::vector<Matrix> out;
        if (accept_sym("{")) {
            do {
                out.push_back(parse_matrix());
            } while (accept_sym(","));
            expect_sym("}");
        } else {
            out.push_back(parse_matrix());
        }
        return out;
    }

    Matrix parse_matrix() {
        Token start = cur();
        expect_sym("[");
        std::vector<std::vector<Complex>> rows;
        do {
            expect_sym("[");
            std::vector<Complex> row;
            do {
                row.push_back(parse_num());
            } while (accept_sym(","));
            expect_sym("]");
            rows.push_back(std::move(row));
        } while (accept_sym(","));
        expect_sym("]");
        for (const auto& r : rows) {
            if (r.size() != rows.front().size()) {
                fail_at(start, "ragged matrix literal");
            }
        }
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        return m;
    }

    // Complex number expressions.

    Complex parse_num() {
        Complex v = parse_num_term();
        while (true) {
            if (accept_sym("+")) {
                v += parse_num_term();
            } else if (accept_sym("-")) {
                v -= parse_num_term();
            } else {
                return v;
            }
        }
    }

    Complex parse_num_term() {
        Complex v = parse_num_unary();
        while (true) {
            if (accept_sym("*")) {
                v *= parse_num_unary();
            } else if (accept_sym("/")) {
                Complex d = parse_num_unary();
                if (std::abs(d) == 0.0) {
                    fail("division by zero");
                }
                v /= d;
            } else {
                return v;
            }
        }
    }

    Complex parse_num_unary() {
        if (accept_sym("-")) {
            return -parse_num_unary();
        }
        const Token& t = cur();
        if (t.kind == TokKind::Number) {
            ++pos_;
            return {t.number, 0.0};
        }
        if (t.kind == TokKind::Imag) {
            ++pos_;
            return {0.0, t.number};
        }
        if (accept_word("i")) {
            return {0.0, 1.0};
        }
        if (accept_word("sqrt")) {
            expect_sym("(");
            Complex v = parse_num();
            expect_sym(")");
            return std::sqrt(v);
        }
        if (accept_sym("(")) {
            Complex v = parse_num();
            expect_sym(")");
            return v;
        }
        fail("expected a number, found '" + describe(t) + "'");
    }

    double parse_real() {
        Token t = cur();
        Complex v = parse_num();
        if (std::abs(v.imag()) > 0.0) {
            fail_at(t, "expected a real number");
        }
        return v.real();
    }

    // States.

    bool starts_number() const {
        const Token& t = cur();
        return t.kind == TokKind::Number || t.kind == TokKind::Imag || is_sym("(") || is_sym("-") || is_word("sqrt");
    }

    WeightedState parse_state() {
        expect_word("state");
        double weight = 1.0;
        if (starts_number()) {
            Token t = cur();
            weight = parse_real();
            if (weight <= 0.0 || weight > 1.0) {
                fail_at(t, "state weight must lie in (0,1]");
            }
            expect_sym(":");
        }
        Token t = cur();
        Matrix rho = parse_state_factor();
        while (accept_sym("*")) {
            rho = qmath::tensor(rho, parse_state_factor());
        }
        if (static_cast<std::size_t>(rho.rows()) != qmath::dim_of(prog_.qubits.size())) {
            fail_at(t, "initial state has dimension " + std::to_string(rho.rows()) + " but the register has " +
                           std::to_string(prog_.qubits.size()) + " qubits");
        }
        return {weight, qmath::DensityOperator(rho)};
    }

    Matrix parse_state_factor() {
        const Token& t = cur();
        if (t.kind == TokKind::Ket) {
            ++pos_;
            try {
                return qmath::outer(qmath::ket(t.text)).mat();
            } catch (const std::invalid_argument& e) {
                fail_at(t, e.what());
            }
        }
        if (accept_word("ket")) {
            expect_sym("[");
            std::vector<Complex> amps;
            do {
                amps.push_back(parse_num());
            } while (accept_sym(","));
            expect_sym("]");
            qmath::Vector v(static_cast<Eigen::Index>(amps.size()));
            for (std::size_t i = 0; i < amps.size(); ++i) {
                v(static_cast<Eigen::Index>(i)) = amps[i];
            }
            if (v.norm() == 0.0) {
                fail_at(t, "zero ket");
            }
            try {
                qmath::qubits_of_dim(amps.size());
            } catch (const std::invalid_argument& e) {
                fail_at(t, e.what());
            }
            v /= v.norm();
            return v * v.adjoint();
        }
        if (accept_word("maxmixed")) {
            expect_sym("(");
            Nat n = expect_nat();
            expect_sym(")");
            std::size_t d = qmath::dim_of(n);
            return Matrix::Identity(d, d) / static_cast<double>(d);
        }
        if (accept_word("dm")) {
            Matrix m = parse_matrix();
            if (m.rows() != m.cols()) {
                fail_at(t, "density matrix must be square");
            }
            try {
                qmath::validate(qmath::DensityOperator(m), 1e-6);
            } catch (const std::invalid_argument& e) {
                fail_at(t, e.what());
            }
            return m;
        }
        fail("expected a state (|label>, ket[...], maxmixed(n), dm[[...]]), found '" + describe(t) + "'");
    }

    // Processes.

    ProcessPtr parse_sum() { return parse_sum_from(parse_unary().proc); }

    ProcessPtr parse_sum_from(ProcessPtr first) {
        ProcessPtr acc = parse_par_from(std::move(first));
        while (accept_sym("+")) {
            acc = Process::sum(acc, parse_par_from(parse_unary().proc));
        }
        return acc;
    }

    ProcessPtr parse_par_from(ProcessPtr first) {
        ProcessPtr acc = parse_restrict_from(std::move(first));
        while (accept_sym("||")) {
            acc = Process::par(acc, parse_restrict_from(parse_unary().proc));
        }
        return acc;
    }

    ProcessPtr parse_restrict_from(ProcessPtr p) {
        while (accept_sym("\\")) {
            expect_sym("{");
            std::vector<std::string> chans;
            if (!is_sym("}")) {
                do {
                    Token t = cur();
                    std::string c = expect_ident("channel name");
                    if (!prog_.channels.count(c)) {
                        fail_at(t, "undeclared channel '" + c + "'");
                    }
                    chans.push_back(c);
                } while (accept_sym(","));
            }
            expect_sym("}");
            p = Process::restrict(p, chans);
        }
        return p;
    }

    static ProcessPtr chain(const std::vector<Prefix>& prefixes, ProcessPtr cont) {
        for (auto it = prefixes.rbegin(); it != prefixes.rend(); ++it) {
            cont = Process::make_prefix(*it, cont);
        }
        return cont;
    }

    bool starts_action() const {
        if (cur().kind == TokKind::Ident && ahead(1).kind == TokKind::Symbol && ahead(1).text == ":") {
            return true;
        }
        return is_sym("(") && ahead(1).kind == TokKind::Ident && ahead(2).kind == TokKind::Symbol && ahead(2).text == ",";
    }

    Unary parse_unary() {
        if (starts_action()) {
            auto actions = parse_actions();
            if (accept_sym(".")) {
                auto rest = parse_unary();
                if (rest.bare) {
                    actions.insert(actions.end(), rest.bare->begin(), rest.bare->end());
                    return {chain(actions, Process::nil()), actions};
                }
                return {chain(actions, rest.proc), std::nullopt};
            }
            return {chain(actions, Process::nil()), actions};
        }
        const Token& t = cur();
        if (accept_word("nil")) {
            std::vector<ExprPtr> discard;
            if (accept_sym("[")) {
                if (!is_sym("]")) {
                    do {
                        discard.push_back(parse_expr());
                    } while (accept_sym(","));
                }
                expect_sym("]");
            }
            return {Process::nil(std::move(discard)), std::nullopt};
        }
        if (is_word("if")) {
            return {parse_ite(), std::nullopt};
        }
        if (accept_sym("(")) {
            if (is_word("if")) {
                return parse_paren_ite();
            }
            auto p = parse_sum();
            expect_sym(")");
            return {p, std::nullopt};
        }
        if (t.kind == TokKind::Ident && !is_keyword(t.text)) {
            ++pos_;
            auto def = prog_.definition(t.text);
            if (!def) {
                fail_at(t, "unknown process '" + t.text + "'");
            }
            return {def, std::nullopt};
        }
        fail("expected a process, found '" + describe(t) + "'");
    }

    ProcessPtr parse_ite() {
        expect_word("if");
        auto cond = parse_expr();
        expect_word("then");
        auto a = parse_unary().proc;
        expect_word("else");
        auto b = parse_unary().proc;
        return Process::ite(cond, a, b);
    }

    Unary parse_paren_ite() {
        expect_word("if");
        auto cond = parse_expr();
        expect_word("then");
        auto a = parse_unary();
        expect_word("else");
        auto b = parse_unary();
        if (is_sym(")") && a.bare && b.bare && ahead(1).kind == TokKind::Symbol && ahead(1).text == ".") {
            expect_sym(")");
            expect_sym(".");
            auto rest = parse_unary().proc;
            return {Process::ite(cond, chain(*a.bare, rest), chain(*b.bare, rest)), std::nullopt};
        }
        auto p = parse_sum_from(Process::ite(cond, a.proc, b.proc));
        expect_sym(")");
        return {p, std::nullopt};
    }

    Tag expect_tag() {
        if (cur().kind != TokKind::Ident || is_keyword(cur().text)) {
            fail("expected a tag, found '" + describe(cur()) + "'");
        }
        return Tag{toks_[pos_++].text};
    }

    std::size_t parse_repeat() {
        if (!accept_sym("^")) {
            return 1;
        }
        Nat n = expect_nat();
        if (n == 0) {
            fail("repetition count must be positive");
        }
        return static_cast<std::size_t>(n);
    }

    std::vector<Prefix> parse_actions() {
        if (accept_sym("(")) {
            Tag a = expect_tag();
            expect_sym(",");
            Tag b = expect_tag();
            expect_sym(")");
            expect_sym(":");
            expect_word("tau");
            std::size_t n = parse_repeat();
            return std::vector<Prefix>(n, Prefix::tau_pair(a, b));
        }
        Tag tag = expect_tag();
        expect_sym(":");
        if (accept_word("tau")) {
            std::size_t n = parse_repeat();
            return std::vector<Prefix>(n, Prefix::tau(tag));
        }
        if (accept_word("meas")) {
            return {parse_meas(tag)};
        }
        Token name_tok = cur();
        std::string name = expect_ident("action");
        if (accept_sym("!")) {
            const auto& type = channel_type(name_tok, name);
            return {Prefix::send(tag, name, type, parse_expr())};
        }
        if (accept_sym("?")) {
            const auto& type = channel_type(name_tok, name);
            Token var_tok = cur();
            std::string var = expect_ident("variable");
            check_binder(var_tok, var);
            return {Prefix::recv(tag, name, type, var)};
        }
        if (is_sym("(")) {
            auto op = lookup_superop(name_tok, name);
            expect_sym("(");
            auto args = parse_args();
            expect_sym(")");
            if (args.size() != op->op.n_qubits()) {
                fail_at(name_tok, "superoperator '" + name + "' expects " + std::to_string(op->op.n_qubits()) +
                                      " qubit(s), got " + std::to_string(args.size()));
            }
            return {Prefix::sop(tag, op, std::move(args))};
        }
        fail("expected '!', '?' or '(' after '" + name + "'");
    }

    Prefix parse_meas(const Tag& tag) {
        Token name_tok = cur();
        std::string name = expect_ident("measurement name");
        std::shared_ptr<const MeasDef> meas;
        if (name == "coin") {
            expect_sym("(");
            Token pt = cur();
            double p = parse_real();
            expect_sym(")");
            try {
                meas = coin_measurement(p);
            } catch (const std::invalid_argument& e) {
                fail_at(pt, e.what());
            }
        } else {
            auto it = prog_.measurements.find(name);
            meas = it != prog_.measurements.end() ? it->second : builtin_measurement(name);
            if (!meas) {
                fail_at(name_tok, "unknown measurement '" + name + "'");
            }
        }
        expect_sym("(");
        std::vector<ExprPtr> args;
        if (!is_sym(">")) {
            args = parse_args();
        }
        expect_sym(">");
        Token var_tok = cur();
        std::string var = expect_ident("variable");
        check_binder(var_tok, var);
        expect_sym(")");
        if (args.size() != meas->meas.n_qubits()) {
            fail_at(name_tok, "measurement '" + meas->name + "' expects " + std::to_string(meas->meas.n_qubits()) +
                                  " qubit(s), got " + std::to_string(args.size()));
        }
        return Prefix::measure(tag, meas, std::move(args), var);
    }

    std::vector<ExprPtr> parse_args() {
        std::vector<ExprPtr> args;
        do {
            args.push_back(parse_expr());
        } while (accept_sym(","));
        return args;
    }

    const ChannelType& channel_type(const Token& t, const std::string& name) {
        auto it = prog_.channels.find(name);
        if (it == prog_.channels.end()) {
            fail_at(t, "undeclared channel '" + name + "'");
        }
        return it->second;
    }

    std::shared_ptr<const OpDef> lookup_superop(const Token& t, const std::string& name) {
        auto it = prog_.superops.find(name);
        if (it != prog_.superops.end()) {
            return it->second;
        }
        auto op = builtin_superop(name);
        if (!op) {
            fail_at(t, "unknown superoperator '" + name + "'");
        }
        return op;
    }

    void check_binder(const Token& t, const std::string& var) {
        if (is_qubit(var)) {
            fail_at(t, "variable '" + var + "' clashes with a register qubit");
        }
    }

    // Expressions.

    ExprPtr parse_expr() {
        auto e = parse_not();
        while (accept_word("or")) {
            e = Expr::binary(ExprKind::Or, e, parse_not());
        }
        return e;
    }

    ExprPtr parse_not() {
        if (accept_word("not")) {
            return Expr::negate(parse_not());
        }
        auto e = parse_atom();
        if (accept_sym("=")) {
            return Expr::binary(ExprKind::Eq, e, parse_atom());
        }
        if (accept_sym("<=")) {
            return Expr::binary(ExprKind::Le, e, parse_atom());
        }
        return e;
    }

    ExprPtr parse_atom() {
        const Token& t = cur();
        if (t.kind == TokKind::Number && t.integral) {
            return Expr::literal(Value{expect_nat()});
        }
        if (accept_word("true")) {
            return Expr::literal(Value{true});
        }
        if (accept_word("false")) {
            return Expr::literal(Value{false});
        }
        if (accept_sym("(")) {
            auto e = parse_expr();
            expect_sym(")");
            return e;
        }
        if (t.kind == TokKind::Ident && !is_keyword(t.text)) {
            ++pos_;
            if (is_qubit(t.text)) {
                return Expr::literal(Value{QubitName{t.text}});
            }
            return Expr::var(t.text);
        }
        fail("expected an expression, found '" + describe(t) + "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Program prog_;

public:
    std::set<std::string> base_defs_;
};

std::string format_complex(Complex c) {
    if (c.imag() == 0.0) {
        return format_real(c.real());
    }
    std::string im = format_real(std::abs(c.imag()));
    return "(" + format_real(c.real()) + (c.imag() < 0 ? "-" : "+") + im + "i)";
}

std::string format_matrix(const Matrix& m) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << (i > 0 ? ", [" : "[");
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            os << (j > 0 ? ", " : "") << format_complex(m(i, j));
        }
        os << "]";
    }
    os << "]";
    return os.str();
}

}  // namespace

bool is_keyword(std::string_view word) { return kKeywords.count(word) > 0; }

ProcessPtr Program::definition(const std::string& name) const {
    for (const auto& [n, p] : definitions) {
        if (n == name) {
            return p;
        }
    }
    return nullptr;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::shared_ptr<const OpDef> builtin_superop(const std::string& name) {
    static const std::map<std::string, std::shared_ptr<const OpDef>> table = [] {
        std::map<std::string, std::shared_ptr<const OpDef>> t;
        auto add = [&](const std::string& n, qmath::Superoperator op) { t[n] = std::make_shared<OpDef>(OpDef{n, std::move(op)}); };
        add("H", qmath::gates::H());
        add("X", qmath::gates::X());
        add("Z", qmath::gates::Z());
        add("I", qmath::gates::I());
        add("CNOT", qmath::gates::CNOT());
        add("SWAP", qmath::gates::SWAP());
        add("ZX", qmath::gates::ZX());
        add("SH", qmath::gates::SH());
        add("SetHalfI", qmath::gates::SetHalfI());
        return t;
    }();
    auto it = table.find(name);
    return it == table.end() ? nullptr : it->second;
}

std::shared_ptr<const MeasDef> builtin_measurement(const std::string& name) {
    static const std::map<std::string, std::shared_ptr<const MeasDef>> table = [] {
        std::map<std::string, std::shared_ptr<const MeasDef>> t;
        auto add = [&](const std::string& n, qmath::Measurement m) { t[n] = std::make_shared<MeasDef>(MeasDef{n, std::move(m)}); };
        add("M01", qmath::measurements::M01());
        add("Mpm", qmath::measurements::Mpm());
        add("Mpmi", qmath::measurements::Mpmi());
        add("M01_2", qmath::measurements::M01_2());
        return t;
    }();
    auto it = table.find(name);
    return it == table.end() ? nullptr : it->second;
}

std::shared_ptr<const MeasDef> coin_measurement(double p) {
    return std::make_shared<MeasDef>(MeasDef{"coin(" + format_real(p) + ")", qmath::measurements::coin(p)});
}

Program parse(std::string_view text, const Program* base) {
    Program start;
    if (base) {
        start = *base;
        start.initial.clear();
        start.main = nullptr;
        start.main_name.clear();
    }
    auto defs = start.definitions;
    Parser parser(Lexer(text).run(), std::move(start));
    for (const auto& d : defs) {
        parser.base_defs_.insert(d.first);
    }
    Program out = parser.parse_program();
    if (base) {
        // Only the definitions of this text are candidates for the main process.
        std::vector<std::pair<std::string, ProcessPtr>> own;
        for (const auto& d : out.definitions) {
            if (!parser.base_defs_.count(d.first)) {
                own.push_back(d);
            }
        }
        if (own.empty()) {
            throw ParseError("program defines no process", 1, 1);
        }
        auto it = std::find_if(own.begin(), own.end(), [](const auto& d) { return d.first == "Main"; });
        if (it == own.end()) {
            it = std::prev(own.end());
        }
        out.main_name = it->first;
        out.main = it->second;
    }
    return out;
}

ProcessPtr parse_process(std::string_view text, const Program& decls) {
    Parser parser(Lexer(text).run(), decls);
    return parser.parse_lone_process();
}

std::string print_program(const Program& program) {
    std::ostringstream os;
    for (const auto& [name, type] : program.channels) {
        os << "channel " << name << " : " << to_string(type) << "\n";
    }
    os << "qubits";
    for (const auto& q : program.qubits) {
        os << " " << q;
    }
    os << "\n";
    for (const auto& [name, def] : program.superops) {
        os << "superop " << name << " = {";
        for (std::size_t i = 0; i < def->op.kraus().size(); ++i) {
            os << (i > 0 ? ", " : "") << format_matrix(def->op.kraus()[i]);
        }
        os << "}\n";
    }
    for (const auto& [name, def] : program.measurements) {
        os << "measurement " << name << " = {";
        for (std::size_t i = 0; i < def->meas.size(); ++i) {
            os << (i > 0 ? ", " : "") << format_matrix(def->meas.outcomes()[i]);
        }
        os << "}\n";
    }
    for (const auto& s : program.initial) {
        os << "state " << format_real(s.weight) << " : dm" << format_matrix(s.rho.mat()) << "\n";
    }
    for (const auto& [name, body] : program.definitions) {
        if (name != program.main_name) {
            os << "proc " << name << " = " << print_process(body) << "\n";
        }
    }
    os << "proc " << program.main_name << " = " << print_process(program.main) << "\n";
    return os.str();
}

}  // namespace lqcheck::lang
