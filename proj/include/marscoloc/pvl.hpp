#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace marscoloc::pvl {

// Parameter Value Language, restricted to the subset that occurs in PDS3
// rover camera labels: KEY = value statements, OBJECT/GROUP blocks,
// parenthesized sequences, brace sets, <unit> annotations, /* comments */,
// ^POINTER keys and the terminal END.

struct Value;
struct Entry;

struct Integer {
    std::int64_t value = 0;
    std::optional<std::string> unit;
};

struct Real {
    double value = 0.0;
    std::optional<std::string> unit;
};

struct QuotedString {
    std::string text;
};

/// Bare (unquoted) or single-quoted literal, e.g. N/A, dates, 'MSL'.
struct Symbol {
    std::string text;
};

struct Sequence {
    std::vector<Value> items;
};

struct Set {
    std::vector<Value> items;
};

enum class BlockKind { Object, Group };

struct Block {
    BlockKind kind = BlockKind::Group;
    std::vector<Entry> entries;
};

struct Value {
    std::variant<Integer, Real, QuotedString, Symbol, Sequence, Set, Block> data;

    bool is_numeric() const;
    /// Numeric value of an Integer or Real; nullopt for anything else.
    std::optional<double> as_number() const;
    /// Unit annotation of a numeric value, if any.
    const std::optional<std::string>* unit() const;
    /// Text of a QuotedString or Symbol.
    std::optional<std::string> as_text() const;
    /// Items of a Sequence or Set; nullptr otherwise.
    const std::vector<Value>* items() const;
};

struct Entry {
    std::string key;
    Value value;
};

bool operator==(const Integer& a, const Integer& b);
bool operator==(const Real& a, const Real& b);
bool operator==(const QuotedString& a, const QuotedString& b);
bool operator==(const Symbol& a, const Symbol& b);
bool operator==(const Sequence& a, const Sequence& b);
bool operator==(const Set& a, const Set& b);
bool operator==(const Block& a, const Block& b);
bool operator==(const Value& a, const Value& b);
bool operator==(const Entry& a, const Entry& b);

/// Parsed label. Entries keep declaration order; OBJECT/GROUP blocks are
/// entries keyed by the block name.
struct LabelTree {
    std::vector<Entry> entries;
    /// Non-fatal diagnostics, e.g. duplicate keywords resolved last-wins.
    std::vector<std::string> warnings;

    /// Looks up a dotted path such as "INSTRUMENT_STATE_PARMS.AZIMUTH_FOV".
    const Value* find(std::string_view dotted_path) const;
};

/// Trees compare by content; warnings are ignored.
bool operator==(const LabelTree& a, const LabelTree& b);

enum class DuplicatePolicy { LastWins, Error };

struct ParseOptions {
    DuplicatePolicy duplicates = DuplicatePolicy::LastWins;
};

/// Throws ParseError carrying the line and column of the offending token.
LabelTree parse(std::string_view text, const ParseOptions& options = {});

/// Canonical text form. parse(to_text(t)) == t for any tree whose strings
/// contain no double quotes.
std::string to_text(const LabelTree& tree);

} // namespace marscoloc::pvl
