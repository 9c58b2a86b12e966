#pragma once

// Small arithmetic expression language for custom metric components.
// Grammar and the list of functions live in docs/expression_grammar.md.

#include <memory>
#include <string>
#include <string_view>

namespace geogasket {

class Expression {
public:
    /// Parses `source`; throws ParseError with the 1-based line/column of the
    /// offending character.
    static Expression parse(std::string_view source);

    double operator()(double u, double v) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace geogasket
