#include "pqlab/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pqlab/errors.hpp"

namespace pqlab {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("config: malformed value for '" + key + "': '" + text + "'");
  }
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::istringstream is(text);
  std::string item;
  while (is >> item) out.push_back(parse_number<T>(key, item));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "[experiment]\ncommand = " << command << "\nseed = " << seed << "\nthreads = " << threads << '\n';
  os << "[integrand]\n";
  if (!integrand.name.empty()) os << integrand.serialize();
  os << "[mesh]\nresolutions =";
  for (int r : resolutions) os << ' ' << r;
  os << "\n[schedule]\nepsilons =";
  for (double e : epsilons) os << ' ' << format_double(e);
  os << "\n[tolerances]\ntol = " << format_double(tol) << "\nmax_iter = " << max_iter << '\n';
  os << "[outputs]\n";
  for (const auto& [k, v] : outputs) os << k << " = " << v << '\n';
  os << "[options]\n";
  for (const auto& [k, v] : options) os << k << " = " << v << '\n';
  return os.str();
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::string integrand_text;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(line_no) + ": empty key");

    if (section == "experiment") {
      if (key == "command") {
        c.command = value;
      } else if (key == "seed") {
        c.seed = parse_number<unsigned long long>(key, value);
      } else if (key == "threads") {
        c.threads = parse_number<int>(key, value);
      } else {
        throw InvalidArgument("config: unknown experiment key '" + key + "'");
      }
    } else if (section == "integrand") {
      integrand_text += key + " = " + value + "\n";
    } else if (section == "mesh") {
      if (key != "resolutions") throw InvalidArgument("config: unknown mesh key '" + key + "'");
      c.resolutions = parse_list<int>(key, value);
    } else if (section == "schedule") {
      if (key != "epsilons") throw InvalidArgument("config: unknown schedule key '" + key + "'");
      c.epsilons = parse_list<double>(key, value);
    } else if (section == "tolerances") {
      if (key == "tol") {
        c.tol = parse_number<double>(key, value);
      } else if (key == "max_iter") {
        c.max_iter = parse_number<int>(key, value);
      } else {
        throw InvalidArgument("config: unknown tolerance key '" + key + "'");
      }
    } else if (section == "outputs") {
      c.outputs[key] = value;
    } else if (section == "options") {
      c.options[key] = value;
    } else {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": key outside a known section");
    }
  }
  if (c.command.empty()) throw InvalidArgument("config: missing experiment command");
  if (!integrand_text.empty()) c.integrand = IntegrandSpec::parse(integrand_text);
  if (c.threads < 1) throw InvalidArgument("config: threads must be >= 1");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace pqlab
