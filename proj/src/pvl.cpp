#include "marscoloc/pvl.hpp"

#include "marscoloc/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>

namespace marscoloc::pvl {

bool operator==(const Integer& a, const Integer& b) { return a.value == b.value && a.unit == b.unit; }
bool operator==(const Real& a, const Real& b) { return a.value == b.value && a.unit == b.unit; }
bool operator==(const QuotedString& a, const QuotedString& b) { return a.text == b.text; }
bool operator==(const Symbol& a, const Symbol& b) { return a.text == b.text; }
bool operator==(const Sequence& a, const Sequence& b) { return a.items == b.items; }
bool operator==(const Set& a, const Set& b) { return a.items == b.items; }
bool operator==(const Block& a, const Block& b) { return a.kind == b.kind && a.entries == b.entries; }
bool operator==(const Value& a, const Value& b) { return a.data == b.data; }
bool operator==(const Entry& a, const Entry& b) { return a.key == b.key && a.value == b.value; }
bool operator==(const LabelTree& a, const LabelTree& b) { return a.entries == b.entries; }

bool Value::is_numeric() const
{
    return std::holds_alternative<Integer>(data) || std::holds_alternative<Real>(data);
}

std::optional<double> Value::as_number() const
{
    if (const auto* i = std::get_if<Integer>(&data))
        return static_cast<double>(i->value);
    if (const auto* r = std::get_if<Real>(&data))
        return r->value;
    return std::nullopt;
}

const std::optional<std::string>* Value::unit() const
{
    if (const auto* i = std::get_if<Integer>(&data))
        return &i->unit;
    if (const auto* r = std::get_if<Real>(&data))
        return &r->unit;
    return nullptr;
}

std::optional<std::string> Value::as_text() const
{
    if (const auto* q = std::get_if<QuotedString>(&data))
        return q->text;
    if (const auto* s = std::get_if<Symbol>(&data))
        return s->text;
    return std::nullopt;
}

const std::vector<Value>* Value::items() const
{
    if (const auto* s = std::get_if<Sequence>(&data))
        return &s->items;
    if (const auto* s = std::get_if<Set>(&data))
        return &s->items;
    return nullptr;
}

const Value* LabelTree::find(std::string_view dotted_path) const
{
    const std::vector<Entry>* level = &entries;
    while (true) {
        const auto dot = dotted_path.find('.');
        const auto segment = dotted_path.substr(0, dot);
        const Entry* hit = nullptr;
        for (const auto& e : *level) {
            if (e.key == segment)
                hit = &e;
        }
        if (hit == nullptr)
            return nullptr;
        if (dot == std::string_view::npos)
            return &hit->value;
        const auto* block = std::get_if<Block>(&hit->value.data);
        if (block == nullptr)
            return nullptr;
        level = &block->entries;
        dotted_path.remove_prefix(dot + 1);
    }
}

namespace {

bool is_key_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '^';
}

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& options)
        : text_(text), options_(options) {}

    LabelTree run()
    {
        LabelTree tree;
        parse_statements(tree.entries, nullptr, {}, tree.warnings);
        return tree;
    }

private:
    struct Mark {
        int line;
        int column;
    };

    [[noreturn]] void fail(ErrorCode code, const std::string& msg, Mark at) const
    {
        throw ParseError(code, msg, at.line, at.column);
    }
    [[noreturn]] void fail(ErrorCode code, const std::string& msg) const
    {
        fail(code, msg, here());
    }

    Mark here() const { return {line_, column_}; }
    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void advance()
    {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_blank()
    {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                advance();
            } else if (c == '/' && peek(1) == '*') {
                const Mark start = here();
                advance();
                advance();
                while (!(peek() == '*' && peek(1) == '/')) {
                    if (eof())
                        fail(ErrorCode::UnterminatedComment, "unterminated comment", start);
                    advance();
                }
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    std::string read_key()
    {
        std::string key;
        while (!eof() && is_key_char(peek())) {
            key += peek();
            advance();
        }
        if (key.empty())
            fail(ErrorCode::Syntax, std::string("expected keyword, found '") + peek() + "'");
        return key;
    }

    void expect(char c)
    {
        skip_blank();
        if (peek() != c || eof())
            fail(ErrorCode::Syntax, std::string("expected '") + c + "'");
        advance();
    }

    // Parses statements until END (top level) or the matching END_<kind>.
    void parse_statements(std::vector<Entry>& out, const char* closer, const std::string& block_name,
                          std::vector<std::string>& warnings)
    {
        while (true) {
            skip_blank();
            if (eof()) {
                if (closer != nullptr)
                    fail(ErrorCode::Syntax, std::string("missing ") + closer);
                return;
            }
            const Mark at = here();
            const std::string key = read_key();

            if (key == "END") {
                if (closer != nullptr)
                    fail(ErrorCode::Syntax, std::string("END before ") + closer, at);
                pos_ = text_.size();
                return;
            }
            if (key == "END_OBJECT" || key == "END_GROUP") {
                if (closer == nullptr || key != closer)
                    fail(ErrorCode::Syntax, "unexpected " + key, at);
                skip_blank();
                if (peek() == '=') {
                    advance();
                    skip_blank();
                    const Mark name_at = here();
                    if (read_key() != block_name)
                        fail(ErrorCode::Syntax, key + " does not match " + block_name, name_at);
                }
                return;
            }

            expect('=');
            skip_blank();

            if (key == "OBJECT" || key == "GROUP") {
                const std::string name = read_key();
                Block block;
                block.kind = key == "OBJECT" ? BlockKind::Object : BlockKind::Group;
                parse_statements(block.entries, key == "OBJECT" ? "END_OBJECT" : "END_GROUP",
                                 name, warnings);
                insert(out, Entry{name, Value{std::move(block)}}, at, warnings);
                continue;
            }

            Value v = parse_value();
            insert(out, Entry{key, std::move(v)}, at, warnings);
        }
    }

    void insert(std::vector<Entry>& out, Entry entry, Mark at, std::vector<std::string>& warnings)
    {
        for (auto& existing : out) {
            if (existing.key != entry.key)
                continue;
            const std::string msg = "line " + std::to_string(at.line) + ": duplicate keyword " +
                                    entry.key;
            if (options_.duplicates == DuplicatePolicy::Error)
                fail(ErrorCode::DuplicateKeyword, "duplicate keyword " + entry.key, at);
            warnings.push_back(msg);
            existing.value = std::move(entry.value);
            return;
        }
        out.push_back(std::move(entry));
    }

    Value parse_value()
    {
        skip_blank();
        if (eof())
            fail(ErrorCode::Syntax, "expected value");
        const char c = peek();
        if (c == '(' || c == '{')
            return parse_collection(c);
        if (c == '"')
            return Value{QuotedString{read_quoted('"', ErrorCode::UnterminatedString)}};
        if (c == '\'')
            return Value{Symbol{read_quoted('\'', ErrorCode::UnterminatedString)}};
        return parse_bare();
    }

    std::string read_quoted(char quote, ErrorCode code)
    {
        const Mark start = here();
        advance();
        std::string out;
        while (peek() != quote) {
            if (eof())
                fail(code, "unterminated string", start);
            out += peek();
            advance();
        }
        advance();
        return out;
    }

    Value parse_collection(char open)
    {
        const Mark start = here();
        const char close = open == '(' ? ')' : '}';
        advance();
        std::vector<Value> items;
        skip_blank();
        if (eof())
            fail(ErrorCode::UnterminatedSequence, "unterminated sequence", start);
        if (peek() == close) {
            advance();
        } else {
            while (true) {
                items.push_back(parse_value());
                const int item_line = here().line;
                skip_blank();
                if (eof())
                    fail(ErrorCode::UnterminatedSequence, "unterminated sequence", start);
                if (peek() == ',') {
                    advance();
                    continue;
                }
                if (peek() == close) {
                    advance();
                    break;
                }
                if (here().line > item_line)
                    fail(ErrorCode::UnterminatedSequence, "unterminated sequence", start);
                fail(ErrorCode::Syntax, std::string("expected ',' or '") + close + "'");
            }
        }
        if (open == '(')
            return Value{Sequence{std::move(items)}};
        return Value{Set{std::move(items)}};
    }

    bool bare_stop(char c) const
    {
        switch (c) {
        case ' ': case '\t': case '\r': case '\n': case '\f': case '\v':
        case ',': case '(': case ')': case '{': case '}': case '<': case '=':
        case '"': case '\'':
            return true;
        case '/':
            return peek(1) == '*';
        default:
            return false;
        }
    }

    Value parse_bare()
    {
        const Mark start = here();
        std::string token;
        while (!eof() && !bare_stop(peek())) {
            token += peek();
            advance();
        }
        if (token.empty())
            fail(ErrorCode::Syntax, std::string("unexpected '") + peek() + "'", start);

        Value v = classify(token, start);
        // Unit annotation may be separated from the number by blanks.
        const std::size_t save_pos = pos_;
        const int save_line = line_, save_col = column_;
        skip_blank();
        if (peek() == '<') {
            const Mark unit_at = here();
            if (!v.is_numeric())
                fail(ErrorCode::Syntax, "unit annotation on non-numeric value", unit_at);
            advance();
            std::string unit;
            while (peek() != '>') {
                if (eof() || peek() == '\n')
                    fail(ErrorCode::Syntax, "unterminated unit", unit_at);
                unit += peek();
                advance();
            }
            advance();
            if (auto* i = std::get_if<Integer>(&v.data))
                i->unit = unit;
            else
                std::get<Real>(v.data).unit = unit;
        } else {
            pos_ = save_pos;
            line_ = save_line;
            column_ = save_col;
        }
        return v;
    }

    Value classify(const std::string& token, Mark at) const
    {
        static const std::regex integer_re(R"([+-]?\d+)");
        static const std::regex real_re(R"([+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)");
        static const std::regex radix_re(R"(([+-]?)(\d+)#([0-9A-Fa-f]+)#)");

        std::smatch m;
        if (std::regex_match(token, integer_re)) {
            std::int64_t value = 0;
            const char* first = token.data() + (token[0] == '+' ? 1 : 0);
            const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
            if (ec == std::errc())
                return Value{Integer{value, std::nullopt}};
            fail(ErrorCode::Syntax, "integer out of range: " + token, at);
        }
        if (std::regex_match(token, real_re)) {
            double value = 0.0;
            const char* first = token.data() + (token[0] == '+' ? 1 : 0);
            const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
            if (ec == std::errc())
                return Value{Real{value, std::nullopt}};
            fail(ErrorCode::Syntax, "real out of range: " + token, at);
        }
        if (std::regex_match(token, m, radix_re)) {
            const int base = std::stoi(m[2].str());
            if (base < 2 || base > 16)
                fail(ErrorCode::UnsupportedConstruct, "unsupported radix " + m[2].str(), at);
            std::int64_t value = 0;
            const std::string digits = m[3].str();
            const auto [ptr, ec] =
                std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
            if (ec != std::errc() || ptr != digits.data() + digits.size())
                fail(ErrorCode::Syntax, "bad based integer " + token, at);
            return Value{Integer{m[1].str() == "-" ? -value : value, std::nullopt}};
        }
        return Value{Symbol{token}};
    }

    std::string_view text_;
    ParseOptions options_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

std::string format_real(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

bool needs_quotes(const std::string& s)
{
    if (s.empty())
        return true;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')' ||
            c == '{' || c == '}' || c == '<' || c == '=' || c == '"' || c == '\'')
            return true;
    }
    return s.find("/*") != std::string::npos;
}

void write_value(std::string& out, const Value& v);

void write_items(std::string& out, const std::vector<Value>& items, char open, char close)
{
    out += open;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i != 0)
            out += ", ";
        write_value(out, items[i]);
    }
    out += close;
}

void write_value(std::string& out, const Value& v)
{
    std::visit(
        [&out](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Integer>) {
                out += std::to_string(x.value);
                if (x.unit)
                    out += " <" + *x.unit + ">";
            } else if constexpr (std::is_same_v<T, Real>) {
                out += format_real(x.value);
                if (x.unit)
                    out += " <" + *x.unit + ">";
            } else if constexpr (std::is_same_v<T, QuotedString>) {
                out += '"' + x.text + '"';
            } else if constexpr (std::is_same_v<T, Symbol>) {
                // A bare token that would re-read as a number must stay a symbol.
                out += needs_quotes(x.text) || std::isdigit(static_cast<unsigned char>(x.text[0])) ||
                               x.text[0] == '+' || x.text[0] == '-' || x.text[0] == '.'
                           ? "'" + x.text + "'"
                           : x.text;
            } else if constexpr (std::is_same_v<T, Sequence>) {
                write_items(out, x.items, '(', ')');
            } else if constexpr (std::is_same_v<T, Set>) {
                write_items(out, x.items, '{', '}');
            }
        },
        v.data);
}

void write_entries(std::string& out, const std::vector<Entry>& entries, int depth)
{
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    for (const auto& e : entries) {
        if (const auto* block = std::get_if<Block>(&e.value.data)) {
            const char* kind = block->kind == BlockKind::Object ? "OBJECT" : "GROUP";
            out += indent + kind + " = " + e.key + "\n";
            write_entries(out, block->entries, depth + 1);
            out += indent + "END_" + kind + " = " + e.key + "\n";
        } else {
            out += indent + e.key + " = ";
            write_value(out, e.value);
            out += "\n";
        }
    }
}

} // namespace

LabelTree parse(std::string_view text, const ParseOptions& options)
{
    return Parser(text, options).run();
}

std::string to_text(const LabelTree& tree)
{
    std::string out;
    write_entries(out, tree.entries, 0);
    out += "END\n";
    return out;
}

} // namespace marscoloc::pvl
