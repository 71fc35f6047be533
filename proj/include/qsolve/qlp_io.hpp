#pragma once

// Text formats: the QLP input format (a CPLEX-LP-style format extended with
// ALL/EXISTS/ORDER and UNCERTAINTY SUBJECT TO) and the XML solution format.

#include <qsolve/binarize.hpp>
#include <qsolve/model.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsolve {

struct ParseError : std::runtime_error {
    std::string kind;
    int line, column;
    ParseError(std::string k, int l, int c, const std::string& msg)
        : std::runtime_error(k + " at line " + std::to_string(l) + ", column " +
                             std::to_string(c) + ": " + msg),
          kind(std::move(k)),
          line(l),
          column(c) {}
};

namespace detail {

struct Token {
    enum Kind { Word, Number, Sign, Relation, Colon } kind;
    std::string text;
    int line, col;
};

inline std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<Token> lex_qlp(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto peek = [&]() { return i < text.size() ? text[i] : '\0'; };
    auto advance = [&]() {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    while (i < text.size()) {
        char c = peek();
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
            continue;
        }
        int tl = line, tc = col;
        if (c == '+' || c == '-') {
            out.push_back({Token::Sign, std::string(1, c), tl, tc});
            advance();
            continue;
        }
        if (c == ':') {
            out.push_back({Token::Colon, ":", tl, tc});
            advance();
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::string rel(1, c);
            advance();
            if (peek() == '=') {
                rel += '=';
                advance();
            }
            if (rel == "<") rel = "<=";
            if (rel == ">") rel = ">=";
            out.push_back({Token::Relation, rel, tl, tc});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::string num;
            bool seen_exp = false;
            while (i < text.size()) {
                char d = peek();
                bool take = std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == '/';
                if ((d == 'e' || d == 'E') && !seen_exp) {
                    char nxt = i + 1 < text.size() ? text[i + 1] : '\0';
                    if (std::isdigit(static_cast<unsigned char>(nxt)) || nxt == '+' || nxt == '-') {
                        take = true;
                        seen_exp = true;
                        num += d;
                        advance();
                        if (peek() == '+' || peek() == '-') {
                            num += peek();
                            advance();
                        }
                        continue;
                    }
                }
                if (!take) break;
                num += d;
                advance();
            }
            out.push_back({Token::Number, num, tl, tc});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (i < text.size()) {
                char d = peek();
                if (!(std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '#' ||
                      d == '[' || d == ']' || d == '.'))
                    break;
                word += d;
                advance();
            }
            out.push_back({Token::Word, word, tl, tc});
            continue;
        }
        throw ParseError("SyntaxError", tl, tc, std::string("unexpected character '") + c + "'");
    }
    return out;
}

struct Section {
    std::string name;  // canonical keyword
    std::vector<Token> tokens;
    int line = 0, col = 0;
};

inline std::vector<Section> split_sections(const std::vector<Token>& toks) {
    // canonical keywords, longest match first
    static const std::vector<std::vector<std::string>> keywords = {
        {"UNCERTAINTY", "SUBJECT", "TO"},
        {"SUBJECT", "TO"},
        {"MINIMIZE"},
        {"MAXIMIZE"},
        {"BOUNDS"},
        {"BINARIES"},
        {"BINARY"},
        {"GENERALS"},
        {"GENERAL"},
        {"EXISTS"},
        {"ALL"},
        {"ORDER"},
        {"END"},
    };
    std::vector<Section> sections;
    std::size_t i = 0;
    while (i < toks.size()) {
        bool matched = false;
        if (toks[i].kind == Token::Word) {
            for (const auto& kw : keywords) {
                if (i + kw.size() > toks.size()) continue;
                bool all = true;
                for (std::size_t k = 0; k < kw.size(); ++k)
                    all &= toks[i + k].kind == Token::Word && upper(toks[i + k].text) == kw[k];
                if (!all) continue;
                std::string canon = kw[0];
                for (std::size_t k = 1; k < kw.size(); ++k) canon += " " + kw[k];
                if (canon == "BINARY") canon = "BINARIES";
                if (canon == "GENERALS") canon = "GENERAL";
                sections.push_back({canon, {}, toks[i].line, toks[i].col});
                i += kw.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (sections.empty())
            throw ParseError("SyntaxError", toks[i].line, toks[i].col,
                             "expected MINIMIZE or MAXIMIZE");
        sections.back().tokens.push_back(toks[i]);
        ++i;
    }
    return sections;
}

struct ParsedTerm {
    Rational coef;
    std::string var;
    int line, col;
};

// Parses a linear expression until a relation token or the end of input.
inline std::vector<ParsedTerm> parse_terms(const std::vector<Token>& toks, std::size_t& i) {
    std::vector<ParsedTerm> terms;
    while (i < toks.size() && toks[i].kind != Token::Relation) {
        Rational sign = 1;
        int line = toks[i].line, col = toks[i].col;
        while (i < toks.size() && toks[i].kind == Token::Sign) {
            if (toks[i].text == "-") sign = -sign;
            ++i;
        }
        if (i >= toks.size()) throw ParseError("SyntaxError", line, col, "dangling sign");
        Rational coef = sign;
        if (toks[i].kind == Token::Number) {
            coef = sign * rat_parse(toks[i].text);
            ++i;
        }
        if (i < toks.size() && toks[i].kind == Token::Word) {
            terms.push_back({coef, toks[i].text, toks[i].line, toks[i].col});
            ++i;
        } else {
            // bare constant term
            terms.push_back({coef, "", line, col});
        }
    }
    return terms;
}

}  // namespace detail

inline QuantifiedProgram parse_qlp(const std::string& text, const std::string& name = "problem") {
    using detail::Token;
    auto tokens = detail::lex_qlp(text);
    auto sections = detail::split_sections(tokens);

    QuantifiedProgram p;
    p.name = name;
    std::map<std::string, int> index;
    std::map<std::string, Quantifier> declared;
    std::vector<std::string> order;

    // pass 1: declarations and order
    for (const auto& sec : sections) {
        if (sec.name == "EXISTS" || sec.name == "ALL") {
            for (const auto& t : sec.tokens) {
                if (t.kind != Token::Word)
                    throw ParseError("SyntaxError", t.line, t.col, "expected variable name");
                Quantifier q = sec.name == "EXISTS" ? Quantifier::Exists : Quantifier::Forall;
                if (declared.count(t.text))
                    throw ParseError("DuplicateDeclaration", t.line, t.col, t.text);
                declared[t.text] = q;
            }
        } else if (sec.name == "ORDER") {
            for (const auto& t : sec.tokens) {
                if (t.kind != Token::Word)
                    throw ParseError("SyntaxError", t.line, t.col, "expected variable name");
                if (index.count(t.text)) throw ParseError("DuplicateInOrder", t.line, t.col, t.text);
                if (!declared.count(t.text))
                    throw ParseError("UnknownVariable", t.line, t.col,
                                     t.text + " appears in ORDER but in neither EXISTS nor ALL");
                index[t.text] = static_cast<int>(order.size());
                order.push_back(t.text);
            }
        }
    }
    bool has_order = false, has_sense = false;
    for (const auto& sec : sections) {
        has_order |= sec.name == "ORDER";
        has_sense |= sec.name == "MINIMIZE" || sec.name == "MAXIMIZE";
    }
    if (!has_order) throw ParseError("MissingSection", 1, 1, "ORDER section is required");
    if (!has_sense) throw ParseError("MissingSection", 1, 1, "MINIMIZE or MAXIMIZE is required");
    for (const auto& [nm, q] : declared)
        if (!index.count(nm))
            throw ParseError("UnknownVariable", 1, 1, nm + " is declared but missing from ORDER");

    p.n = static_cast<int>(order.size());
    p.names = order;
    p.objective.assign(p.n, Rational(0));
    p.quant.resize(p.n, Quantifier::Exists);
    p.kind.assign(p.n, VarKind::Continuous);
    p.lower.assign(p.n, Rational(0));
    p.upper.assign(p.n, Rational(0));
    std::vector<bool> has_bounds(p.n, false), is_binary(p.n, false);
    for (int j = 0; j < p.n; ++j) p.quant[j] = declared[p.names[j]];

    auto var_of = [&](const detail::ParsedTerm& t) {
        if (t.var.empty())
            throw ParseError("SyntaxError", t.line, t.col, "constant term not allowed here");
        auto it = index.find(t.var);
        if (it == index.end()) throw ParseError("UnknownVariable", t.line, t.col, t.var);
        return it->second;
    };

    // pass 2: kinds first (binaries get default bounds), then explicit bounds
    for (const auto& sec : sections) {
        if (sec.name != "BINARIES" && sec.name != "GENERAL") continue;
        for (const auto& t : sec.tokens) {
            if (t.kind != Token::Word)
                throw ParseError("SyntaxError", t.line, t.col, "expected variable name");
            auto it = index.find(t.text);
            if (it == index.end()) throw ParseError("UnknownVariable", t.line, t.col, t.text);
            p.kind[it->second] = VarKind::Integer;
            if (sec.name == "BINARIES") {
                is_binary[it->second] = true;
                p.lower[it->second] = 0;
                p.upper[it->second] = 1;
                has_bounds[it->second] = true;
            }
        }
    }
    for (const auto& sec : sections) {
        if (sec.name == "BOUNDS") {
            std::size_t i = 0;
            const auto& toks = sec.tokens;
            while (i < toks.size()) {
                // forms: lo <= x <= up | x <= up | x >= lo | x = v | lo <= x
                int line = toks[i].line, col = toks[i].col;
                auto read_number = [&]() {
                    Rational sign = 1;
                    while (i < toks.size() && toks[i].kind == Token::Sign) {
                        if (toks[i].text == "-") sign = -sign;
                        ++i;
                    }
                    if (i >= toks.size() || toks[i].kind != Token::Number)
                        throw ParseError("SyntaxError", line, col, "expected number in BOUNDS");
                    Rational v = sign * rat_parse(toks[i].text);
                    ++i;
                    return v;
                };
                std::optional<Rational> lo, up;
                int var = -1;
                if (toks[i].kind == Token::Number || toks[i].kind == Token::Sign) {
                    lo = read_number();
                    if (i >= toks.size() || toks[i].kind != Token::Relation ||
                        toks[i].text != "<=")
                        throw ParseError("SyntaxError", line, col, "expected <= in BOUNDS");
                    ++i;
                }
                if (i >= toks.size() || toks[i].kind != Token::Word)
                    throw ParseError("SyntaxError", line, col, "expected variable in BOUNDS");
                auto it = index.find(toks[i].text);
                if (it == index.end())
                    throw ParseError("UnknownVariable", toks[i].line, toks[i].col, toks[i].text);
                var = it->second;
                ++i;
                if (i < toks.size() && toks[i].kind == Token::Relation) {
                    std::string rel = toks[i].text;
                    ++i;
                    Rational v = read_number();
                    if (rel == "<=") up = v;
                    else if (rel == ">=") lo = v;
                    else {
                        lo = v;
                        up = v;
                    }
                }
                if (lo) p.lower[var] = *lo;
                if (up) p.upper[var] = *up;
                if (lo || up) has_bounds[var] = true;
                if (is_binary[var]) {
                    // clip binaries back into {0,1}
                    if (p.lower[var] < 0) p.lower[var] = 0;
                    if (p.upper[var] > 1) p.upper[var] = 1;
                }
            }
        }
    }
    for (int j = 0; j < p.n; ++j)
        if (!has_bounds[j])
            throw ParseError("MissingBounds", 1, 1,
                             p.names[j] + " needs explicit finite bounds (or BINARIES)");

    // pass 3: objective and rows
    auto parse_rows = [&](const detail::Section& sec, std::vector<Row>& rows) {
        std::size_t i = 0;
        const auto& toks = sec.tokens;
        while (i < toks.size()) {
            // optional row label
            if (toks[i].kind == Token::Word && i + 1 < toks.size() &&
                toks[i + 1].kind == Token::Colon)
                i += 2;
            auto terms = detail::parse_terms(toks, i);
            if (i >= toks.size())
                throw ParseError("SyntaxError", sec.line, sec.col, "constraint without relation");
            std::string rel = toks[i].text;
            int rl = toks[i].line, rc = toks[i].col;
            ++i;
            // rhs: signed number (possibly a bare expression of one constant)
            Rational sign = 1;
            while (i < toks.size() && toks[i].kind == Token::Sign) {
                if (toks[i].text == "-") sign = -sign;
                ++i;
            }
            if (i >= toks.size() || toks[i].kind != Token::Number)
                throw ParseError("SyntaxError", rl, rc, "expected numeric right-hand side");
            Rational rhs = sign * rat_parse(toks[i].text);
            ++i;
            Row row;
            Rational constant = 0;
            for (const auto& t : terms) {
                if (t.var.empty()) {
                    constant += t.coef;
                    continue;
                }
                row.terms.push_back({var_of(t), t.coef});
            }
            row.rhs = rhs - constant;
            if (rel == "<=") {
                rows.push_back(row);
            } else if (rel == ">=") {
                Row neg;
                neg.rhs = -row.rhs;
                for (auto& t : row.terms) neg.terms.push_back({t.var, -t.coef});
                rows.push_back(neg);
            } else {  // equality becomes two <= rows
                rows.push_back(row);
                Row neg;
                neg.rhs = -row.rhs;
                for (auto& t : row.terms) neg.terms.push_back({t.var, -t.coef});
                rows.push_back(neg);
            }
        }
    };
    for (const auto& sec : sections) {
        if (sec.name == "MINIMIZE" || sec.name == "MAXIMIZE") {
            p.sense = sec.name == "MINIMIZE" ? Sense::Minimize : Sense::Maximize;
            std::size_t i = 0;
            auto terms = detail::parse_terms(sec.tokens, i);
            if (i != sec.tokens.size())
                throw ParseError("SyntaxError", sec.tokens[i].line, sec.tokens[i].col,
                                 "unexpected relation in the objective");
            for (const auto& t : terms) {
                if (t.var.empty()) continue;  // constant offsets are ignored
                p.objective[var_of(t)] += t.coef;
            }
        } else if (sec.name == "SUBJECT TO") {
            parse_rows(sec, p.ex_rows);
        } else if (sec.name == "UNCERTAINTY SUBJECT TO") {
            parse_rows(sec, p.uni_rows);
        }
    }

    auto report = validate(p);
    if (!report.empty())
        throw ParseError("InvalidProgram", 1, 1, report[0].rule +
                             (report[0].index >= 0
                                  ? " (variable/row " + std::to_string(report[0].index) + ")"
                                  : ""));
    return p;
}

namespace detail {

inline std::string qlp_number(const Rational& r) {
    if (is_integral(r)) return boost::multiprecision::numerator(r).str();
    // decimal if the denominator is 2^a 5^b, else a fraction literal
    BigInt den = boost::multiprecision::denominator(r);
    int digits = 0;
    BigInt d = den;
    while (d % 2 == 0) {
        d /= 2;
        ++digits;
    }
    int fives = 0;
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d == 1) {
        digits = std::max(digits, fives);
        std::string s = rat_fixed(r, digits);
        return s;
    }
    return rat_str(r);
}

}  // namespace detail

inline std::string write_qlp(const QuantifiedProgram& input) {
    QuantifiedProgram p = input;
    if (p.objective_negated) {
        for (auto& c : p.objective) c = -c;
        p.sense = Sense::Minimize;
        p.objective_negated = false;
    }
    std::ostringstream os;
    auto emit_terms = [&](const std::vector<Term>& terms) {
        bool first = true;
        for (const auto& t : terms) {
            Rational c = t.coef;
            std::string sign = c < 0 ? "-" : "+";
            if (c < 0) c = -c;
            if (first && sign == "+") sign = "";
            else if (!first) sign = " " + sign;
            os << sign;
            if (c != 1) os << detail::qlp_number(c);
            os << p.names[t.var];
            first = false;
        }
        if (first) os << "0 " << p.names.at(0);  // empty expression guard
    };
    os << (p.sense == Sense::Minimize ? "MINIMIZE" : "MAXIMIZE") << "\n";
    std::vector<Term> obj_terms;
    for (int j = 0; j < p.n; ++j)
        if (p.objective[j] != 0) obj_terms.push_back({j, p.objective[j]});
    if (obj_terms.empty()) os << "0 " << p.names.at(0) << "\n";
    else {
        emit_terms(obj_terms);
        os << "\n";
    }
    auto negated_pair = [](const Row& a, const Row& b) {
        if (a.rhs != -b.rhs) return false;
        std::map<int, Rational> ma, mb;
        for (const auto& t : a.terms) ma[t.var] += t.coef;
        for (const auto& t : b.terms) mb[t.var] += -t.coef;
        return ma == mb;
    };
    auto emit_rows = [&](const std::vector<Row>& rows) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            os << " ";
            emit_terms(rows[i].terms);
            if (i + 1 < rows.size() && negated_pair(rows[i], rows[i + 1])) {
                os << " = " << detail::qlp_number(rows[i].rhs) << "\n";
                ++i;
            } else {
                os << " <= " << detail::qlp_number(rows[i].rhs) << "\n";
            }
        }
    };
    if (!p.ex_rows.empty()) {
        os << "SUBJECT TO\n";
        emit_rows(p.ex_rows);
    }
    if (!p.uni_rows.empty()) {
        os << "UNCERTAINTY SUBJECT TO\n";
        emit_rows(p.uni_rows);
    }
    os << "BOUNDS\n";
    for (int j = 0; j < p.n; ++j)
        os << " " << detail::qlp_number(p.lower[j]) << " <= " << p.names[j]
           << " <= " << detail::qlp_number(p.upper[j]) << "\n";
    std::vector<int> bins, gens;
    for (int j = 0; j < p.n; ++j) {
        if (p.kind[j] != VarKind::Integer) continue;
        if (p.lower[j] == 0 && p.upper[j] == 1) bins.push_back(j);
        else gens.push_back(j);
    }
    auto emit_list = [&](const char* kw, const std::vector<int>& vars) {
        if (vars.empty()) return;
        os << kw << "\n ";
        for (std::size_t i = 0; i < vars.size(); ++i)
            os << (i ? " " : "") << p.names[vars[i]];
        os << "\n";
    };
    emit_list("BINARIES", bins);
    emit_list("GENERAL", gens);
    std::vector<int> ex, all;
    for (int j = 0; j < p.n; ++j)
        (p.quant[j] == Quantifier::Exists ? ex : all).push_back(j);
    emit_list("EXISTS", ex);
    emit_list("ALL", all);
    os << "ORDER\n ";
    for (int j = 0; j < p.n; ++j) os << (j ? " " : "") << p.names[j];
    os << "\nEND\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Solution XML
// ---------------------------------------------------------------------------

struct SolutionVariable {
    std::string name;
    std::string index;
    std::string value;
    int block = 1;
};

struct SolutionDocument {
    std::string problem_name;
    std::string solution_name;
    std::string objective_value;  // preformatted, 6 decimals for finite values
    double runtime_seconds = 0.0;
    long decision_nodes = 0;
    long propagation_steps = 0;
    long learnt_constraints = 0;
    std::string status = "OPTIMAL";  // OPTIMAL INCUMBENT INFEASIBLE UNBOUNDED-WIN TIMEOUT
    std::string gap = "0.000000";
    std::vector<SolutionVariable> variables;
};

inline std::string write_solution_xml(const SolutionDocument& doc) {
    std::ostringstream os;
    char runtime[64];
    std::snprintf(runtime, sizeof(runtime), "%.3fseconds", doc.runtime_seconds);
    char runtime_raw[64];
    std::snprintf(runtime_raw, sizeof(runtime_raw), "%.6f", doc.runtime_seconds);
    os << "<?xml version = \"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
    os << "<YasolSolution version=\"1\">\n";
    os << " <header\n";
    os << "   ProblemName=\"" << doc.problem_name << "\"\n";
    os << "   SolutionName=\"" << doc.solution_name << "\"\n";
    os << "   ObjectiveValue=\"" << doc.objective_value << "\"\n";
    os << "   Runtime=\"" << runtime << "\"\n";
    os << "   RuntimeSeconds=\"" << runtime_raw << "\"\n";
    os << "   DecisionNodes=\"" << doc.decision_nodes << "\"\n";
    os << "   PropagationSteps=\"" << doc.propagation_steps << "\"\n";
    os << "   LearntConstraints=\"" << doc.learnt_constraints << "\"/>\n";
    os << " <quality\n";
    os << "   SolutionStatus=\"" << doc.status << "\"\n";
    os << "   Gap=\"" << doc.gap << "\"/>\n";
    os << " <variables>\n";
    for (const auto& v : doc.variables)
        os << "  <variable name=\"" << v.name << "\" index=\"" << v.index << "\" value=\""
           << v.value << "\" block=\"" << v.block << "\"/>\n";
    os << " </variables>\n";
    os << "</YasolSolution>\n";
    return os.str();
}

// Principal-variation rows for the solution file: one entry per original
// variable, multi-bit integers reported with a spanned index.
inline std::vector<SolutionVariable> solution_variables(const BinarizedProgram& b,
                                                        const std::vector<Rational>& decoded) {
    std::vector<SolutionVariable> out;
    for (const auto& g : b.groups) {
        SolutionVariable v;
        v.name = b.original.names[g.orig_var];
        int last = g.first_col + std::max(g.bit_count, 1) - 1;
        v.index = g.first_col == last
                      ? std::to_string(g.first_col)
                      : std::to_string(g.first_col) + "-" + std::to_string(last);
        if (b.original.kind[g.orig_var] == VarKind::Continuous)
            v.value = rat_fixed(decoded[g.orig_var], 6);
        else v.value = rat_floor(decoded[g.orig_var]).str();
        v.block = b.original.block_of(g.orig_var) + 1;
        out.push_back(v);
    }
    return out;
}

}  // namespace qsolve
