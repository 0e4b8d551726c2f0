#include "pdenet/dictionary.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace pdenet {

namespace {

bool factor_less(const Factor& a, const Factor& b) {
  if (a.kind != b.kind) return a.kind == Factor::Kind::Coordinate;
  if (a.kind == Factor::Kind::Coordinate) return a.coordinate < b.coordinate;
  return graded_lex_less(a.alpha, b.alpha);
}

bool same_primitive(const Factor& a, const Factor& b) {
  return a.kind == b.kind && (a.kind == Factor::Kind::Coordinate ? a.coordinate == b.coordinate : a.alpha == b.alpha);
}

class TermParser {
 public:
  TermParser(const std::vector<std::string>& variables, std::string_view text) : vars_(variables), text_(text) {}

  Term parse() {
    Term term;
    skip_separators();
    if (pos_ == text_.size()) fail("empty term");
    while (pos_ < text_.size()) {
      term.factors.push_back(parse_factor());
      skip_separators();
    }
    canonicalize(term);
    if (term.order() > kMaxJetOrder)
      fail("derivative order " + std::to_string(term.order()) + " exceeds the maximum of 3");
    return term;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw DictionaryError("term '" + std::string(text_) + "': " + why);
  }

  void skip_separators() {
    while (pos_ < text_.size() && (text_[pos_] == '*' || std::isspace(static_cast<unsigned char>(text_[pos_])))) ++pos_;
  }

  // Longest variable name matching at pos_, or -1.
  int match_variable() const {
    int best = -1;
    std::size_t best_len = 0;
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      const std::string& name = vars_[v];
      if (name.size() > best_len && text_.substr(pos_, name.size()) == name) {
        best = static_cast<int>(v);
        best_len = name.size();
      }
    }
    return best;
  }

  Factor parse_factor() {
    Factor f;
    if (text_[pos_] == 'u') {
      ++pos_;
      f.kind = Factor::Kind::Derivative;
      f.alpha.assign(vars_.size(), 0);
      if (pos_ < text_.size() && text_[pos_] == '_') {
        ++pos_;
        const bool braced = pos_ < text_.size() && text_[pos_] == '{';
        if (braced) ++pos_;
        int count = 0;
        while (pos_ < text_.size()) {
          if (braced && text_[pos_] == '}') break;
          const int v = match_variable();
          if (v < 0) {
            if (braced || count == 0) fail(std::string("unknown variable letter '") + text_[pos_] + "'");
            break;
          }
          f.alpha[static_cast<std::size_t>(v)] += 1;
          pos_ += vars_[static_cast<std::size_t>(v)].size();
          ++count;
        }
        if (braced) {
          if (pos_ >= text_.size()) fail("unterminated '{'");
          ++pos_;
        }
        if (count == 0) fail("empty derivative subscript");
      }
    } else {
      const int v = match_variable();
      if (v < 0) fail(std::string("unknown variable letter '") + text_[pos_] + "'");
      f.kind = Factor::Kind::Coordinate;
      f.coordinate = v;
      pos_ += vars_[static_cast<std::size_t>(v)].size();
    }
    if (pos_ < text_.size() && text_[pos_] == '^') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("'^' must be followed by a positive integer");
      f.exponent = std::stoi(std::string(text_.substr(start, pos_ - start)));
      if (f.exponent < 1) fail("exponent must be positive");
    }
    return f;
  }

  static void canonicalize(Term& term) {
    std::stable_sort(term.factors.begin(), term.factors.end(), factor_less);
    std::vector<Factor> merged;
    for (const Factor& f : term.factors) {
      if (!merged.empty() && same_primitive(merged.back(), f)) {
        merged.back().exponent += f.exponent;
      } else {
        merged.push_back(f);
      }
    }
    term.factors = std::move(merged);
  }

  const std::vector<std::string>& vars_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

int Term::order() const {
  int m = 0;
  for (const Factor& f : factors)
    if (f.kind == Factor::Kind::Derivative) m = std::max(m, total_order(f.alpha));
  return m;
}

std::string render_term(const Term& term, const std::vector<std::string>& variables) {
  std::string out;
  for (const Factor& f : term.factors) {
    if (!out.empty()) out += "*";
    if (f.kind == Factor::Kind::Coordinate) {
      out += variables[static_cast<std::size_t>(f.coordinate)];
    } else {
      out += "u";
      if (total_order(f.alpha) > 0) out += "_" + subscript(f.alpha, variables);
    }
    if (f.exponent > 1) out += "^" + std::to_string(f.exponent);
  }
  return out;
}

std::string DictionarySpec::label(std::size_t i) const { return render_term(terms.at(i), variables); }

std::vector<std::string> DictionarySpec::labels() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < terms.size(); ++i) out.push_back(label(i));
  return out;
}

Term parse_term(const std::vector<std::string>& variables, std::string_view text) {
  return TermParser(variables, text).parse();
}

DictionarySpec parse_terms(const std::vector<std::string>& variables, std::span<const std::string> texts) {
  if (variables.empty()) throw DictionaryError("dictionary needs at least one variable");
  for (const auto& v : variables) {
    if (v.empty() || v == "u" || v.front() == 'u') throw DictionaryError("invalid variable name '" + v + "'");
    if (std::count(variables.begin(), variables.end(), v) > 1) throw DictionaryError("duplicate variable '" + v + "'");
  }
  DictionarySpec spec{variables, {}};
  std::vector<std::string> seen;
  for (const auto& text : texts) {
    Term t = parse_term(variables, text);
    std::string label = render_term(t, variables);
    if (std::find(seen.begin(), seen.end(), label) != seen.end())
      throw DictionaryError("duplicate term '" + text + "' (canonical form " + label + ")");
    seen.push_back(std::move(label));
    spec.terms.push_back(std::move(t));
  }
  if (spec.terms.size() < 2) throw DictionaryError("dictionary needs at least two terms");
  return spec;
}

DictionarySpec parse_dictionary(const std::vector<std::string>& variables, std::string_view comma_separated) {
  std::vector<std::string> texts;
  std::string item;
  std::stringstream ss{std::string(comma_separated)};
  while (std::getline(ss, item, ',')) texts.push_back(item);
  return parse_terms(variables, texts);
}

int required_order(const DictionarySpec& spec) {
  int m = 0;
  for (const Term& t : spec.terms) m = std::max(m, t.order());
  return m;
}

std::vector<MultiIndex> required_indices(const DictionarySpec& spec) {
  std::vector<MultiIndex> out{MultiIndex(spec.variables.size(), 0)};
  for (const Term& t : spec.terms)
    for (const Factor& f : t.factors)
      if (f.kind == Factor::Kind::Derivative && std::find(out.begin(), out.end(), f.alpha) == out.end())
        out.push_back(f.alpha);
  std::sort(out.begin(), out.end(), graded_lex_less);
  return out;
}

double evaluate_term(const Term& term, std::span<const double> x, const Jet& jet) {
  double value = 1.0;
  for (const Factor& f : term.factors) {
    const double base = f.kind == Factor::Kind::Coordinate ? x[static_cast<std::size_t>(f.coordinate)] : jet.at(f.alpha);
    double p = base;
    for (int k = 1; k < f.exponent; ++k) p *= base;
    value *= p;
  }
  return value;
}

Matrix feature_matrix(const DictionarySpec& spec, const Matrix& points, std::span<const Jet> jets) {
  const Eigen::Index K = points.cols();
  const Eigen::Index L = static_cast<Eigen::Index>(spec.size());
  if (static_cast<std::size_t>(K) != jets.size()) throw DictionaryError("one jet per point is required");
  if (K < L) throw DictionaryError("feature matrix needs at least as many points (" + std::to_string(K) +
                                   ") as terms (" + std::to_string(L) + ")");
  if (points.rows() != spec.dims()) throw DictionaryError("point dimension does not match the dictionary variables");
  Matrix out(K, L);
  std::vector<double> x(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index d = 0; d < points.rows(); ++d) x[static_cast<std::size_t>(d)] = points(d, k);
    for (Eigen::Index l = 0; l < L; ++l) {
      const double v = evaluate_term(spec.terms[static_cast<std::size_t>(l)], x, jets[static_cast<std::size_t>(k)]);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite value of term " << spec.label(static_cast<std::size_t>(l)) << " at point (";
        for (std::size_t d = 0; d < x.size(); ++d) msg << (d ? ", " : "") << x[d];
        msg << ")";
        throw DictionaryError(msg.str());
      }
      out(k, l) = v;
    }
  }
  return out;
}

Var feature_rows(const DictionarySpec& spec, const Matrix& points, const MultiIndexSet& set, std::span<const Var> rows) {
  if (rows.size() != set.size()) throw DictionaryError("one tape row per multi-index is required");
  Tape& tape = *rows.front().tape();
  std::vector<Var> columns;
  for (const Term& term : spec.terms) {
    Var acc;
    for (const Factor& f : term.factors) {
      Var base = f.kind == Factor::Kind::Coordinate ? tape.constant(points.row(f.coordinate))
                                                    : rows[set.position(f.alpha)];
      Var powered = ipow(base, f.exponent);
      acc = acc.valid() ? hadamard(acc, powered) : powered;
    }
    columns.push_back(acc);
  }
  return vstack(columns);
}

}  // namespace pdenet
