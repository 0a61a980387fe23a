#include "inclusive/serialization.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace inclusive {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "trajectory " << traj.horizon() << ' ' << traj.dim();
  for (Eigen::Index t = 0; t < traj.length(); ++t)
    for (Eigen::Index j = 0; j < traj.dim(); ++j) out << ' ' << format_double(traj.states()(t, j));
  out << '\n';
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs) {
  for (const auto& t : trajs) write_trajectory(out, t);
}

namespace {

template <typename T>
T parse_token(const std::string& tok, std::size_t line_no) {
  T value{};
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse '" + tok + "'");
  return value;
}

}  // namespace

std::vector<Trajectory> read_trajectories(std::istream& in) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.front() == '#') continue;
    if (tag != "trajectory")
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 'trajectory', got '" + tag + "'");
    std::string tok;
    if (!(ls >> tok)) throw std::runtime_error("line " + std::to_string(line_no) + ": missing horizon");
    const auto horizon = parse_token<long>(tok, line_no);
    if (!(ls >> tok)) throw std::runtime_error("line " + std::to_string(line_no) + ": missing dimension");
    const auto dim = parse_token<long>(tok, line_no);
    if (horizon < 1 || dim < 1) throw std::runtime_error("line " + std::to_string(line_no) + ": bad shape");
    Matd states(horizon + 1, dim);
    for (long t = 0; t <= horizon; ++t)
      for (long j = 0; j < dim; ++j) {
        if (!(ls >> tok))
          throw std::runtime_error("line " + std::to_string(line_no) + ": too few coordinates");
        states(t, j) = parse_token<double>(tok, line_no);
      }
    if (ls >> tok) throw std::runtime_error("line " + std::to_string(line_no) + ": trailing data");
    out.emplace_back(std::move(states));
  }
  return out;
}

void save_demonstrations(const std::string& path, const DemonstrationSet& demos) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# demonstrations: " << demos.size() << '\n';
  write_trajectories(out, demos.demos());
}

DemonstrationSet load_demonstrations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return DemonstrationSet(read_trajectories(in));
}

}  // namespace inclusive
