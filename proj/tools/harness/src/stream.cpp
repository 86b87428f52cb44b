#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "dyncore_tools/harness.hpp"

namespace dyncore::tools {

namespace {

std::vector<std::string_view> split(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

PointId parse_id(std::string_view tok, std::size_t line) {
  PointId id = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "invalid point id '" + std::string(tok) + "'");
  }
  return id;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

mpq_class parse_weight(std::string_view tok, bool allow_sign, std::size_t line) {
  std::string_view body = tok;
  bool negative = false;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    if (!allow_sign) throw ParseError(line, "insert weight must be unsigned: '" + std::string(tok) + "'");
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto slash = body.find('/');
  const std::string_view num = body.substr(0, slash);
  const std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den)) throw ParseError(line, "invalid weight '" + std::string(tok) + "'");
  mpz_class n(std::string(num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw ParseError(line, "zero denominator in '" + std::string(tok) + "'");
  mpq_class q(negative ? mpz_class(-n) : n, d);
  q.canonicalize();
  return q;
}

double parse_coord(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(line, "invalid coordinate '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

StreamEvent parse_event(std::string_view text, std::size_t line) {
  const auto tok = split(text);
  if (tok.empty()) throw ParseError(line, "empty event");
  StreamEvent ev;
  ev.line = line;
  if (tok[0] == "Q") {
    if (tok.size() != 1) throw ParseError(line, "Q takes no arguments");
    ev.op = Op::Query;
  } else if (tok[0] == "D") {
    if (tok.size() != 2) throw ParseError(line, "expected 'D <id>'");
    ev.op = Op::Delete;
    ev.id = parse_id(tok[1], line);
  } else if (tok[0] == "U") {
    if (tok.size() != 3) throw ParseError(line, "expected 'U <id> <+-num>[/<den>]'");
    ev.op = Op::Update;
    ev.id = parse_id(tok[1], line);
    ev.weight = parse_weight(tok[2], true, line);
  } else if (tok[0] == "I") {
    if (tok.size() < 4) throw ParseError(line, "expected 'I <id> <num>[/<den>] <x1> ... <xd>'");
    ev.op = Op::Insert;
    ev.id = parse_id(tok[1], line);
    ev.weight = parse_weight(tok[2], false, line);
    for (std::size_t i = 3; i < tok.size(); ++i) ev.coords.push_back(parse_coord(tok[i], line));
  } else {
    throw ParseError(line, "unknown operation '" + std::string(tok[0]) + "'");
  }
  return ev;
}

std::vector<StreamEvent> parse_stream(std::istream& in) {
  std::vector<StreamEvent> events;
  std::string text;
  std::size_t line = 0;
  std::size_t dim = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    events.push_back(parse_event(text, line));
    const auto& ev = events.back();
    if (ev.op == Op::Insert) {
      if (dim == 0) dim = ev.coords.size();
      if (ev.coords.size() != dim) {
        throw ParseError(line, "point has " + std::to_string(ev.coords.size()) + " coordinates, expected " +
                                   std::to_string(dim));
      }
    }
  }
  return events;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_rational(const mpq_class& q) {
  mpq_class c = q;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

std::string format_event(const StreamEvent& ev) {
  std::string out(1, static_cast<char>(ev.op));
  switch (ev.op) {
    case Op::Query:
      break;
    case Op::Delete:
      out += " " + std::to_string(ev.id);
      break;
    case Op::Update: {
      const std::string w = format_rational(ev.weight);
      out += " " + std::to_string(ev.id) + " " + (ev.weight >= 0 ? "+" : "") + w;
      break;
    }
    case Op::Insert:
      out += " " + std::to_string(ev.id) + " " + format_rational(ev.weight);
      for (double c : ev.coords) out += " " + format_double(c);
      break;
  }
  return out;
}

void write_stream(std::ostream& out, const std::vector<StreamEvent>& events) {
  for (const auto& ev : events) out << format_event(ev) << '\n';
}

}  // namespace dyncore::tools
