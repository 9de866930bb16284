#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "harlog/common.hpp"

namespace harlog::logic {

class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, std::size_t col, const std::string& msg)
        : ValidationError(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line), col(col) {}
    std::size_t line, col;
};

class UnsupportedRecursion : public DomainError {
public:
    explicit UnsupportedRecursion(const std::string& atom)
        : DomainError("recursion detected through " + atom + "; only non-recursive programs are supported") {}
};

class TooManyWorlds : public DomainError {
public:
    explicit TooManyWorlds(std::size_t n)
        : DomainError("circuit references " + std::to_string(n) + " probabilistic variables; limit is 20") {}
};

inline constexpr std::size_t kMaxVariables = 20;

// -- AST --------------------------------------------------------------------

struct Term {
    bool is_var = false;
    std::string name;

    bool operator==(const Term&) const = default;
};

struct Atom {
    std::string pred;
    std::vector<Term> args;
    std::size_t line = 0, col = 0;

    std::string key() const {
        std::string s = pred;
        s += '/';
        s += std::to_string(args.size());
        for (const auto& a : args) {
            s += a.is_var ? "|V:" : "|c:";
            s += a.name;
        }
        return s;
    }
};

struct Literal {
    bool negated = false;
    Atom atom;
};

// p1::h1 ; p2::h2.  A plain fact is an AD with a single head.
struct FactAD {
    std::vector<double> probs;
    std::vector<Atom> heads;
    std::size_t var_id = 0;  // probabilistic variable; true <=> heads[0]
};

// nn(netN, Var) :: h_yes ; h_no.
struct NeuralAD {
    int net_id = 0;
    std::string input_var;
    std::array<Atom, 2> outcomes;
    std::size_t var_id = 0;  // true <=> outcomes[0]
};

struct Rule {
    Atom head;
    std::vector<Literal> body;
};

struct Statement {
    enum class Kind { Fact, Nad, Rule, Query } kind;
    std::size_t index = 0;  // into the per-kind vector below
};

struct LogicProgram {
    std::vector<Statement> order;  // source order, for canonical printing
    std::vector<FactAD> facts;
    std::vector<NeuralAD> nads;
    std::vector<Rule> rules;
    std::vector<Atom> queries;

    // one Bernoulli variable per fact/NAD; probability = P(first head)
    std::vector<std::string> var_names;
    std::vector<double> var_default_probs;

    std::size_t num_vars() const { return var_names.size(); }

    // declared fact probabilities plus 0.5 for every neural variable
    std::vector<double> default_leaf_probs() const { return var_default_probs; }

    std::optional<std::size_t> var_by_name(const std::string& name) const {
        for (std::size_t i = 0; i < var_names.size(); ++i)
            if (var_names[i] == name) return i;
        return std::nullopt;
    }
};

// -- tokenizer ---------------------------------------------------------------

namespace detail {

struct Token {
    enum class Kind { Ident, Var, Number, Sym, End } kind = Kind::End;
    std::string text;
    double number = 0.0;
    std::size_t line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(t);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            t.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_') ? Token::Kind::Var
                                                                               : Token::Kind::Ident;
            return t;
        }
        t.kind = Token::Kind::Sym;
        if (c == ':' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == ':' || src_[pos_ + 1] == '-')) {
            t.text = std::string(src_.substr(pos_, 2));
            advance();
            advance();
            return t;
        }
        if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '+') {
            t.text = "\\+";
            advance();
            advance();
            return t;
        }
        if (std::string("(),.;").find(c) != std::string::npos) {
            t.text = std::string(1, c);
            advance();
            return t;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
    Token lex_number(Token t) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            // a '.' followed by a non-digit terminates the statement, not the number
            if (src_[pos_] == '.' &&
                (pos_ + 1 >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
                break;
            advance();
        }
        t.kind = Token::Kind::Number;
        t.text = std::string(src_.substr(start, pos_ - start));
        try {
            t.number = std::stod(t.text);
        } catch (const std::exception&) {
            throw ParseError(t.line, t.col, "malformed number '" + t.text + "'");
        }
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

}  // namespace detail

// -- parser ------------------------------------------------------------------

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { cur_ = lex_.next(); }

    LogicProgram parse() {
        LogicProgram prog;
        while (cur_.kind != Token::Kind::End) statement(prog);
        validate(prog);
        return prog;
    }

    // A single standalone atom (query text), optionally period-terminated.
    Atom parse_atom() {
        Atom a = atom();
        if (at_sym(".")) eat();
        if (cur_.kind != Token::Kind::End) fail("unexpected input after atom");
        return a;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(cur_.line, cur_.col, msg); }

    Token eat() {
        Token t = cur_;
        cur_ = lex_.next();
        return t;
    }
    bool at_sym(const std::string& s) const { return cur_.kind == Token::Kind::Sym && cur_.text == s; }
    void expect_sym(const std::string& s) {
        if (!at_sym(s)) fail("expected '" + s + "'");
        eat();
    }

    Term term() {
        if (cur_.kind == Token::Kind::Var) return Term{true, eat().text};
        if (cur_.kind == Token::Kind::Ident) return Term{false, eat().text};
        if (cur_.kind == Token::Kind::Number) return Term{false, eat().text};
        fail("expected term");
    }

    Atom atom() {
        if (cur_.kind != Token::Kind::Ident) fail("expected predicate name");
        Atom a;
        a.line = cur_.line;
        a.col = cur_.col;
        a.pred = eat().text;
        if (at_sym("(")) {
            eat();
            a.args.push_back(term());
            while (at_sym(",")) {
                eat();
                a.args.push_back(term());
            }
            expect_sym(")");
        }
        return a;
    }

    Literal literal() {
        Literal l;
        if (at_sym("\\+")) {
            eat();
            l.negated = true;
        }
        l.atom = atom();
        return l;
    }

    void statement(LogicProgram& prog) {
        if (cur_.kind == Token::Kind::Number) {
            fact_ad(prog);
            return;
        }
        std::size_t line = cur_.line, col = cur_.col;
        if (cur_.kind == Token::Kind::Ident && cur_.text == "query") {
            eat();
            expect_sym("(");
            Atom q = atom();
            expect_sym(")");
            expect_sym(".");
            prog.queries.push_back(std::move(q));
            prog.order.push_back({Statement::Kind::Query, prog.queries.size() - 1});
            return;
        }
        Atom head = atom();
        if (head.pred == "nn" && at_sym("::")) {
            neural_ad(prog, head, line, col);
            return;
        }
        if (at_sym(":-")) {
            eat();
            Rule r;
            r.head = head;
            r.body.push_back(literal());
            while (at_sym(",")) {
                eat();
                r.body.push_back(literal());
            }
            expect_sym(".");
            prog.rules.push_back(std::move(r));
            prog.order.push_back({Statement::Kind::Rule, prog.rules.size() - 1});
            return;
        }
        if (at_sym(".")) {  // deterministic fact
            eat();
            FactAD f;
            f.probs = {1.0};
            f.heads = {head};
            add_fact(prog, std::move(f));
            return;
        }
        fail("expected ':-', '::' or '.'");
    }

    void fact_ad(LogicProgram& prog) {
        FactAD f;
        std::size_t line = cur_.line, col = cur_.col;
        while (true) {
            if (cur_.kind != Token::Kind::Number) fail("expected probability");
            double p = eat().number;
            if (p < 0.0 || p > 1.0) throw ParseError(line, col, "probability out of [0,1]");
            expect_sym("::");
            f.probs.push_back(p);
            f.heads.push_back(atom());
            if (at_sym(";")) {
                eat();
                continue;
            }
            break;
        }
        expect_sym(".");
        if (f.heads.size() > 2) throw ParseError(line, col, "annotated disjunctions are limited to two heads");
        if (f.heads.size() == 2) {
            double s = f.probs[0] + f.probs[1];
            if (std::abs(s - 1.0) > 1e-9)
                throw ParseError(line, col, "AD probabilities sum to " + num_str(s) + ", expected 1");
        }
        add_fact(prog, std::move(f));
    }

    void add_fact(LogicProgram& prog, FactAD f) {
        f.var_id = prog.var_names.size();
        prog.var_names.push_back(atom_to_string(f.heads[0]));
        prog.var_default_probs.push_back(f.probs[0]);
        prog.facts.push_back(std::move(f));
        prog.order.push_back({Statement::Kind::Fact, prog.facts.size() - 1});
    }

    void neural_ad(LogicProgram& prog, const Atom& nn_atom, std::size_t line, std::size_t col) {
        if (nn_atom.args.size() != 2 || nn_atom.args[0].is_var || !nn_atom.args[1].is_var)
            throw ParseError(line, col, "neural AD head must be nn(<net id>, <Var>)");
        const std::string& id = nn_atom.args[0].name;
        if (id.rfind("net", 0) != 0)
            throw ParseError(line, col, "net id must look like net<k>");
        int net_id = 0;
        try {
            net_id = std::stoi(id.substr(3));
        } catch (const std::exception&) {
            throw ParseError(line, col, "net id must look like net<k>");
        }
        NeuralAD nad;
        nad.net_id = net_id;
        nad.input_var = nn_atom.args[1].name;
        expect_sym("::");
        nad.outcomes[0] = atom();
        expect_sym(";");
        nad.outcomes[1] = atom();
        expect_sym(".");
        for (const auto& existing : prog.nads)
            if (existing.net_id == net_id)
                throw ParseError(line, col, "duplicate net id net" + std::to_string(net_id));
        nad.var_id = prog.var_names.size();
        prog.var_names.push_back("net" + std::to_string(net_id));
        prog.var_default_probs.push_back(0.5);
        prog.nads.push_back(std::move(nad));
        prog.order.push_back({Statement::Kind::Nad, prog.nads.size() - 1});
    }

    void validate(const LogicProgram& prog) {
        std::set<std::string> defined;
        auto sig = [](const Atom& a) { return a.pred + "/" + std::to_string(a.args.size()); };
        for (const auto& f : prog.facts)
            for (const auto& h : f.heads) defined.insert(sig(h));
        for (const auto& n : prog.nads)
            for (const auto& o : n.outcomes) defined.insert(sig(o));
        for (const auto& r : prog.rules) defined.insert(sig(r.head));
        for (const auto& r : prog.rules)
            for (const auto& l : r.body)
                if (!defined.count(sig(l.atom)))
                    throw ParseError(l.atom.line, l.atom.col, "undefined predicate " + sig(l.atom));
        for (const auto& q : prog.queries)
            if (!defined.count(sig(q)))
                throw ParseError(q.line, q.col, "undefined predicate in query: " + sig(q));
    }

public:
    static std::string atom_to_string(const Atom& a) {
        std::string s = a.pred;
        if (!a.args.empty()) {
            s += '(';
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                if (i) s += ", ";
                s += a.args[i].name;
            }
            s += ')';
        }
        return s;
    }

private:
    Lexer lex_;
    Token cur_;
};

}  // namespace detail

inline std::string atom_to_string(const Atom& a) { return detail::Parser::atom_to_string(a); }

inline LogicProgram parse_program(std::string_view source) { return detail::Parser(source).parse(); }

// Canonical formatting: parse(program_to_string(p)) prints back identically.
inline std::string program_to_string(const LogicProgram& prog) {
    std::string out;
    for (const auto& st : prog.order) {
        switch (st.kind) {
            case Statement::Kind::Fact: {
                const auto& f = prog.facts[st.index];
                if (f.heads.size() == 1 && f.probs[0] == 1.0) {
                    out += atom_to_string(f.heads[0]);
                } else {
                    for (std::size_t i = 0; i < f.heads.size(); ++i) {
                        if (i) out += " ; ";
                        out += num_str(f.probs[i]) + "::" + atom_to_string(f.heads[i]);
                    }
                }
                break;
            }
            case Statement::Kind::Nad: {
                const auto& n = prog.nads[st.index];
                out += "nn(net" + std::to_string(n.net_id) + ", " + n.input_var + ") :: " +
                       atom_to_string(n.outcomes[0]) + " ; " + atom_to_string(n.outcomes[1]);
                break;
            }
            case Statement::Kind::Rule: {
                const auto& r = prog.rules[st.index];
                out += atom_to_string(r.head) + " :- ";
                for (std::size_t i = 0; i < r.body.size(); ++i) {
                    if (i) out += ", ";
                    if (r.body[i].negated) out += "\\+ ";
                    out += atom_to_string(r.body[i].atom);
                }
                break;
            }
            case Statement::Kind::Query:
                out += "query(" + atom_to_string(prog.queries[st.index]) + ")";
                break;
        }
        out += ".\n";
    }
    return out;
}

// -- circuit -----------------------------------------------------------------

struct Circuit {
    enum class Kind { True, False, Leaf, Not, And, Or };
    struct Node {
        Kind kind;
        std::size_t var = 0;     // Leaf: variable index into the program's table
        bool positive = true;    // Leaf: true <=> first outcome of the variable
        std::vector<std::size_t> children;
    };
    std::vector<Node> nodes;  // children always precede parents
    std::size_t root = 0;
    std::size_t num_program_vars = 0;
    std::vector<std::size_t> used_vars;  // distinct variables referenced by leaves
};

namespace detail {

// Substitution over variable names; terms resolve through chained bindings.
using Subst = std::map<std::string, Term>;

inline Term resolve(Term t, const Subst& s) {
    while (t.is_var) {
        auto it = s.find(t.name);
        if (it == s.end()) break;
        t = it->second;
    }
    return t;
}

inline bool unify_terms(const Term& a, const Term& b, Subst& s) {
    Term x = resolve(a, s), y = resolve(b, s);
    if (x.is_var) {
        if (y.is_var && x.name == y.name) return true;
        s[x.name] = y;
        return true;
    }
    if (y.is_var) {
        s[y.name] = x;
        return true;
    }
    return x.name == y.name;
}

inline bool unify_atoms(const Atom& a, const Atom& b, Subst& s) {
    if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!unify_terms(a.args[i], b.args[i], s)) return false;
    return true;
}

inline Atom substitute(const Atom& a, const Subst& s) {
    Atom out = a;
    for (auto& t : out.args) t = resolve(t, s);
    return out;
}

// Goal key with unbound variables canonicalized by order of appearance.
inline std::string goal_key(const Atom& a) {
    std::string s = a.pred;
    std::map<std::string, std::size_t> seen;
    for (const auto& t : a.args) {
        if (t.is_var) {
            auto [it, fresh] = seen.emplace(t.name, seen.size());
            s += "|V" + std::to_string(it->second);
        } else {
            s += "|c" + t.name;
        }
    }
    return s;
}

class Compiler {
public:
    Compiler(const LogicProgram& prog) : prog_(prog) { circuit_.num_program_vars = prog.num_vars(); }

    Circuit compile(const Atom& query) {
        Subst s;
        circuit_.root = build(query, s);
        std::set<std::size_t> vars;
        for (const auto& n : circuit_.nodes)
            if (n.kind == Circuit::Kind::Leaf) vars.insert(n.var);
        circuit_.used_vars.assign(vars.begin(), vars.end());
        if (circuit_.used_vars.size() > kMaxVariables) throw TooManyWorlds(circuit_.used_vars.size());
        return std::move(circuit_);
    }

private:
    std::size_t add(Circuit::Node n) {
        circuit_.nodes.push_back(std::move(n));
        return circuit_.nodes.size() - 1;
    }
    std::size_t leaf(std::size_t var, bool positive) {
        return add({Circuit::Kind::Leaf, var, positive, {}});
    }
    std::size_t constant(bool value) {
        return add({value ? Circuit::Kind::True : Circuit::Kind::False, 0, true, {}});
    }
    std::size_t combine(Circuit::Kind kind, std::vector<std::size_t> children) {
        if (children.size() == 1) return children[0];
        return add({kind, 0, true, std::move(children)});
    }

    // Returns the node computing the goal's truth; alternatives OR together.
    std::size_t build(const Atom& goal_in, Subst& s) {
        Atom goal = substitute(goal_in, s);
        std::string key = goal_key(goal);
        if (std::find(stack_.begin(), stack_.end(), key) != stack_.end())
            throw UnsupportedRecursion(atom_to_string(goal));
        stack_.push_back(key);
        std::vector<std::size_t> alts;

        for (const auto& nad : prog_.nads) {
            for (std::size_t i = 0; i < 2; ++i) {
                Subst local = s;
                if (unify_atoms(goal, nad.outcomes[i], local))
                    alts.push_back(leaf(nad.var_id, i == 0));
            }
        }
        for (const auto& f : prog_.facts) {
            for (std::size_t i = 0; i < f.heads.size(); ++i) {
                Subst local = s;
                if (!unify_atoms(goal, f.heads[i], local)) continue;
                if (f.heads.size() == 1 && f.probs[0] == 1.0)
                    alts.push_back(constant(true));
                else
                    alts.push_back(leaf(f.var_id, i == 0));
            }
        }
        for (std::size_t ri = 0; ri < prog_.rules.size(); ++ri) {
            Rule r = rename(prog_.rules[ri], ri);
            Subst local = s;
            if (!unify_atoms(goal, r.head, local)) continue;
            std::vector<std::size_t> conj;
            bool dead = false;
            for (const auto& lit : r.body) {
                std::size_t child = build(lit.atom, local);
                if (lit.negated) child = negate(child);
                if (circuit_.nodes[child].kind == Circuit::Kind::False) {
                    dead = true;
                    break;
                }
                conj.push_back(child);
            }
            if (dead) continue;
            alts.push_back(conj.empty() ? constant(true) : combine(Circuit::Kind::And, std::move(conj)));
        }

        stack_.pop_back();
        if (alts.empty()) return constant(false);
        return combine(Circuit::Kind::Or, std::move(alts));
    }

    // Negating a binary NAD/AD outcome yields the complementary outcome.
    std::size_t negate(std::size_t child) {
        const auto& n = circuit_.nodes[child];
        if (n.kind == Circuit::Kind::Leaf) return leaf(n.var, !n.positive);
        if (n.kind == Circuit::Kind::True) return constant(false);
        if (n.kind == Circuit::Kind::False) return constant(true);
        return add({Circuit::Kind::Not, 0, true, {child}});
    }

    Rule rename(const Rule& r, std::size_t ri) {
        ++invocation_;
        std::string suffix = "__r" + std::to_string(ri) + "_" + std::to_string(invocation_);
        Rule out = r;
        auto rn = [&](Atom& a) {
            for (auto& t : a.args)
                if (t.is_var) t.name += suffix;
        };
        rn(out.head);
        for (auto& l : out.body) rn(l.atom);
        return out;
    }

    const LogicProgram& prog_;
    Circuit circuit_;
    std::vector<std::string> stack_;
    std::size_t invocation_ = 0;
};

inline bool eval_circuit(const Circuit& c, const std::vector<bool>& assignment, std::vector<char>& scratch) {
    scratch.assign(c.nodes.size(), 0);
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const auto& n = c.nodes[i];
        bool v = false;
        switch (n.kind) {
            case Circuit::Kind::True: v = true; break;
            case Circuit::Kind::False: v = false; break;
            case Circuit::Kind::Leaf: v = assignment[n.var] == n.positive; break;
            case Circuit::Kind::Not: v = !scratch[n.children[0]]; break;
            case Circuit::Kind::And:
                v = true;
                for (auto ch : n.children) v = v && scratch[ch];
                break;
            case Circuit::Kind::Or:
                v = false;
                for (auto ch : n.children) v = v || scratch[ch];
                break;
        }
        scratch[i] = v ? 1 : 0;
    }
    return scratch[c.root] != 0;
}

}  // namespace detail

// Compile the circuit whose evaluation is the query's success probability.
inline Circuit ground_and_compile(const LogicProgram& prog, const Atom& query) {
    return detail::Compiler(prog).compile(query);
}

inline Circuit ground_and_compile(const LogicProgram& prog, const std::string& query_source) {
    Atom query = detail::Parser(query_source).parse_atom();
    return detail::Compiler(prog).compile(query);
}

// Exact success probability by enumeration over the circuit's distinct
// probabilistic variables. leaf_probs[v] is P(first outcome of variable v).
inline double wmc(const Circuit& circuit, std::span<const double> leaf_probs) {
    if (leaf_probs.size() < circuit.num_program_vars)
        throw DomainError("wmc: missing leaf probabilities");
    for (auto v : circuit.used_vars) {
        double p = leaf_probs[v];
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("wmc: leaf probability out of [0,1]");
    }
    const auto& vars = circuit.used_vars;
    if (vars.size() > kMaxVariables) throw TooManyWorlds(vars.size());
    std::vector<bool> assignment(circuit.num_program_vars, false);
    std::vector<char> scratch;
    double total = 0.0;
    const std::size_t worlds = std::size_t{1} << vars.size();
    for (std::size_t w = 0; w < worlds; ++w) {
        double weight = 1.0;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            bool on = (w >> i) & 1;
            assignment[vars[i]] = on;
            weight *= on ? leaf_probs[vars[i]] : 1.0 - leaf_probs[vars[i]];
        }
        if (weight == 0.0) continue;
        if (detail::eval_circuit(circuit, assignment, scratch)) total += weight;
    }
    return total;
}

// Exact gradient of the query probability w.r.t. each variable probability.
// P is multilinear, so dP/dp_v = P(v pinned true) - P(v pinned false).
inline std::vector<double> wmc_grad(const Circuit& circuit, std::span<const double> leaf_probs) {
    std::vector<double> grad(circuit.num_program_vars, 0.0);
    std::vector<double> probs(leaf_probs.begin(), leaf_probs.end());
    for (auto v : circuit.used_vars) {
        double saved = probs[v];
        probs[v] = 1.0;
        double hi = wmc(circuit, probs);
        probs[v] = 0.0;
        double lo = wmc(circuit, probs);
        probs[v] = saved;
        grad[v] = hi - lo;
    }
    return grad;
}

}  // namespace harlog::logic
