#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdenet/jet.hpp"
#include "pdenet/multi_index.hpp"
#include "pdenet/tape.hpp"

namespace pdenet {

class DictionaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A primitive raised to a positive power: either coordinate x_j or D^alpha u
/// (alpha = 0 is u itself).
struct Factor {
  enum class Kind { Coordinate, Derivative };
  Kind kind = Kind::Derivative;
  int coordinate = 0;
  MultiIndex alpha;
  int exponent = 1;

  bool operator==(const Factor&) const = default;
};

/// Product of factors in canonical order: coordinates by index, then
/// derivatives in graded-lex order, equal primitives merged.
struct Term {
  std::vector<Factor> factors;

  int order() const;
  bool operator==(const Term&) const = default;
};

struct DictionarySpec {
  std::vector<std::string> variables;
  std::vector<Term> terms;

  std::size_t size() const { return terms.size(); }
  int dims() const { return static_cast<int>(variables.size()); }
  /// Canonical text of term i, e.g. "u*u_x", "x*u_y", "u_x^2".
  std::string label(std::size_t i) const;
  std::vector<std::string> labels() const;
};

std::string render_term(const Term& term, const std::vector<std::string>& variables);

/// Parses one term such as "u_tt", "uu_x", "x u_y", "u_x^2", "u*u_{xx}".
Term parse_term(const std::vector<std::string>& variables, std::string_view text);

/// Throws DictionaryError on unknown variables, derivative order above 3,
/// empty terms, fewer than two terms, or duplicates after canonicalization.
DictionarySpec parse_terms(const std::vector<std::string>& variables, std::span<const std::string> texts);
/// Comma-separated convenience form: "u_tt, u_xx, u".
DictionarySpec parse_dictionary(const std::vector<std::string>& variables, std::string_view comma_separated);

int required_order(const DictionarySpec& spec);
/// Every multi-index referenced by a Derivative factor (and zero).
std::vector<MultiIndex> required_indices(const DictionarySpec& spec);

double evaluate_term(const Term& term, std::span<const double> x, const Jet& jet);

/// K x L matrix of dictionary terms. points is dims x K; jets[k] is the jet at
/// column k. Throws DictionaryError on K < L or on a non-finite entry (naming
/// the term and point).
Matrix feature_matrix(const DictionarySpec& spec, const Matrix& points, std::span<const Jet> jets);

/// Taped counterpart: `rows` maps each position of `set` to the 1 x K tape row
/// holding that derivative at every point. Returns L x K (the transpose of
/// feature_matrix) so D*phi is phi_row * result.
Var feature_rows(const DictionarySpec& spec, const Matrix& points, const MultiIndexSet& set, std::span<const Var> rows);

}  // namespace pdenet
