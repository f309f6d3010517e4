#include <fstream>
#include <sstream>

#include "mep/environment.hpp"

namespace mep {

// Line-oriented format:
//
//   MEP-ENV 1
//   DIM 3
//   NOISE per_step 0.05
//   GOAL 2
//   EPISODE_LEN 12
//   INITIAL 000            (optional, defaults to all zeros)
//   ACTION 0
//   EFFECT 0:1
//   CONDITION
//   ACTION 1
//   EFFECT 1:1 0:0
//   CONDITION 0:1
//   END

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

std::size_t parse_index(const std::string& tok, std::size_t line, const char* field) {
  try {
    std::size_t pos = 0;
    auto v = std::stoull(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("bad ") + field + " value '" + tok + "'");
  }
}

// "dim:bit"
std::pair<std::size_t, bool> parse_unit(const std::string& tok, std::size_t line, const char* field) {
  auto colon = tok.find(':');
  if (colon == std::string::npos || colon + 2 != tok.size() || (tok.back() != '0' && tok.back() != '1'))
    throw ParseError(line, std::string("bad ") + field + " unit '" + tok + "'");
  return {parse_index(tok.substr(0, colon), line, field), tok.back() == '1'};
}

}  // namespace

std::string format_env(const Environment& env) {
  std::ostringstream os;
  os << "MEP-ENV 1\n";
  os << "DIM " << env.dim() << "\n";
  os << "NOISE " << (env.noise().mode == NoiseMode::kPerStep ? "per_step" : "per_dimension") << " "
     << format_double(env.noise().flip_prob) << "\n";
  os << "GOAL " << env.goal_dim() << "\n";
  os << "EPISODE_LEN " << env.episode_length() << "\n";
  if (env.initial_state() != State(env.dim())) os << "INITIAL " << env.initial_state().to_string() << "\n";
  for (const auto& a : env.actions()) {
    os << "ACTION " << a.id << "\nEFFECT";
    for (const auto& u : a.effect.units) os << " " << u.dim << ":" << (u.transform == Transform::kSetOne ? 1 : 0);
    os << "\nCONDITION";
    for (const auto& u : a.condition.units) os << " " << u.dim << ":" << (u.predicate == Predicate::kMustBeOne ? 1 : 0);
    os << "\n";
  }
  os << "END\n";
  return os.str();
}

Environment parse_env(const std::string& text) {
  std::istringstream is(text);
  std::string raw;
  std::size_t line = 0;
  std::optional<std::size_t> dim, goal, episode_length;
  std::optional<NoiseModel> noise;
  std::optional<State> initial;
  std::vector<PrimitiveAction> actions;
  bool have_header = false, have_end = false;
  // 0: expect ACTION or header keys, 1: expect EFFECT, 2: expect CONDITION
  int action_phase = 0;

  while (std::getline(is, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    auto tok = split(raw);
    if (tok.empty()) continue;
    if (have_end) throw ParseError(line, "content after END");
    const auto& key = tok[0];
    if (!have_header) {
      if (key != "MEP-ENV" || tok.size() != 2 || tok[1] != "1") throw ParseError(line, "expected header 'MEP-ENV 1'");
      have_header = true;
      continue;
    }
    if (action_phase == 1) {
      if (key != "EFFECT") throw ParseError(line, "expected EFFECT after ACTION");
      for (std::size_t i = 1; i < tok.size(); ++i) {
        auto [d, bit] = parse_unit(tok[i], line, "EFFECT");
        actions.back().effect.units.push_back({d, bit ? Transform::kSetOne : Transform::kSetZero});
      }
      action_phase = 2;
      continue;
    }
    if (action_phase == 2) {
      if (key != "CONDITION") throw ParseError(line, "expected CONDITION after EFFECT");
      for (std::size_t i = 1; i < tok.size(); ++i) {
        auto [d, bit] = parse_unit(tok[i], line, "CONDITION");
        actions.back().condition.units.push_back({d, bit ? Predicate::kMustBeOne : Predicate::kMustBeZero});
      }
      action_phase = 0;
      continue;
    }
    if (key == "DIM" && tok.size() == 2) {
      dim = parse_index(tok[1], line, "DIM");
    } else if (key == "GOAL" && tok.size() == 2) {
      goal = parse_index(tok[1], line, "GOAL");
    } else if (key == "EPISODE_LEN" && tok.size() == 2) {
      episode_length = parse_index(tok[1], line, "EPISODE_LEN");
    } else if (key == "NOISE" && tok.size() == 3) {
      NoiseModel n;
      if (tok[1] == "per_step") {
        n.mode = NoiseMode::kPerStep;
      } else if (tok[1] == "per_dimension") {
        n.mode = NoiseMode::kPerDimension;
      } else {
        throw ParseError(line, "unknown NOISE mode '" + tok[1] + "'");
      }
      try {
        std::size_t pos = 0;
        n.flip_prob = std::stod(tok[2], &pos);
        if (pos != tok[2].size()) throw std::invalid_argument(tok[2]);
      } catch (const std::exception&) {
        throw ParseError(line, "bad NOISE probability '" + tok[2] + "'");
      }
      noise = n;
    } else if (key == "INITIAL" && tok.size() == 2) {
      try {
        initial = State::parse(tok[1]);
      } catch (const std::exception&) {
        throw ParseError(line, "bad INITIAL state '" + tok[1] + "'");
      }
    } else if (key == "ACTION" && tok.size() == 2) {
      PrimitiveAction a;
      a.id = parse_index(tok[1], line, "ACTION");
      if (a.id != actions.size()) throw ParseError(line, "ACTION ids must be consecutive from 0");
      actions.push_back(std::move(a));
      action_phase = 1;
    } else if (key == "END" && tok.size() == 1) {
      have_end = true;
    } else {
      throw ParseError(line, "unexpected line '" + raw + "'");
    }
  }
  if (!have_header) throw ParseError(line, "missing header");
  if (action_phase != 0) throw ParseError(line, "truncated ACTION block");
  if (!have_end) throw ParseError(line, "missing END (truncated file?)");
  if (!dim) throw ParseError(line, "missing DIM");
  if (!goal) throw ParseError(line, "missing GOAL");
  if (!episode_length) throw ParseError(line, "missing EPISODE_LEN");
  if (!noise) throw ParseError(line, "missing NOISE");
  try {
    return Environment(*dim, std::move(actions), *noise, *episode_length, *goal, initial);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

void save_env(const Environment& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_env(env);
}

Environment load_env(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_env(buf.str());
}

}  // namespace mep
