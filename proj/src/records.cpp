#include "inclusive/records.hpp"

#include "inclusive/serialization.hpp"

#include "json.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace inclusive {

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "env",     "method", "beta_h",       "beta_r", "seed",         "n_demos",
      "belief_true", "entropy", "entropy_gold", "risk", "regret", "weight_error",
      "choice_set_size", "wall_time_ms"};
  return cols;
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_row(const std::string& line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (in_quotes) throw std::runtime_error("records.csv line " + std::to_string(lineno) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t lineno) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error("records.csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool with_timing) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << quoted(r.env) << ',' << quoted(r.method) << ',' << format_double(r.beta_h) << ','
        << format_double(r.beta_r) << ',' << r.seed << ',' << r.n_demos << ',' << format_double(r.belief_true)
        << ',' << format_double(r.entropy) << ',' << format_double(r.entropy_gold) << ','
        << format_double(r.risk) << ',' << format_double(r.regret) << ',' << format_double(r.weight_error) << ','
        << r.choice_set_size << ',' << format_double(with_timing ? r.wall_time_ms : 0.0) << '\n';
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw std::runtime_error("records.csv: missing header");
  if (split_row(line, lineno) != record_columns()) throw std::runtime_error("records.csv line 1: unexpected header");
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_row(line, lineno);
    if (f.size() != record_columns().size())
      throw std::runtime_error("records.csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(record_columns().size()) + " fields, got " + std::to_string(f.size()));
    ExperimentRecord r;
    r.env = f[0];
    r.method = f[1];
    r.beta_h = parse_number<double>(f[2], lineno);
    r.beta_r = parse_number<double>(f[3], lineno);
    r.seed = parse_number<std::uint64_t>(f[4], lineno);
    r.n_demos = parse_number<int>(f[5], lineno);
    r.belief_true = parse_number<double>(f[6], lineno);
    r.entropy = parse_number<double>(f[7], lineno);
    r.entropy_gold = parse_number<double>(f[8], lineno);
    r.risk = parse_number<double>(f[9], lineno);
    r.regret = parse_number<double>(f[10], lineno);
    r.weight_error = parse_number<double>(f[11], lineno);
    r.choice_set_size = parse_number<int>(f[12], lineno);
    r.wall_time_ms = parse_number<double>(f[13], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

std::string config_json(const ExperimentConfig& cfg, const std::vector<MethodId>& methods,
                        const std::vector<double>& beta_grid, int jobs) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = kRecordSchemaVersion;
  j["columns"] = record_columns();
  j["env"] = cfg.env;
  std::vector<std::string> names;
  for (MethodId m : methods) names.push_back(to_string(m));
  j["methods"] = names;
  j["inference"] = to_string(cfg.inference);
  j["beta_grid"] = beta_grid;
  j["teacher_beta"] = cfg.teacher_beta ? ordered_json(*cfg.teacher_beta) : ordered_json(nullptr);
  j["visibility"] = cfg.visibility ? ordered_json(*cfg.visibility) : ordered_json(nullptr);
  j["u_min"] = cfg.u_min ? ordered_json(*cfg.u_min) : ordered_json(nullptr);
  j["u_max"] = cfg.u_max ? ordered_json(*cfg.u_max) : ordered_json(nullptr);
  j["choice_set_size"] = cfg.choice_set_size;
  j["n_demos"] = cfg.n_demos;
  j["seeds"] = cfg.seeds;
  j["bank_size"] = cfg.bank_size;
  j["budget"] = {{"noisy", cfg.budget.noisy},
                 {"sigma_scale", cfg.budget.sigma_scale},
                 {"sparse_lambdas", cfg.budget.sparse_lambdas},
                 {"consistent_lambdas", cfg.budget.consistent_lambdas}};
  j["mh"] = {{"burn_in", cfg.mh.burn_in},
             {"samples", cfg.mh.samples},
             {"thin", cfg.mh.thin},
             {"step_scale", cfg.mh.step_scale},
             {"seed", cfg.mh.seed}};
  j["output"] = cfg.output;
  j["jobs"] = jobs;
  return j.dump(2) + "\n";
}

}  // namespace inclusive
