#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mep/arm.hpp"

namespace mep {

// Versioned text checkpoint. Reals are written as hexadecimal floats so a
// save/load cycle reproduces every bit.
//
//   MEP-LIBRARY 1
//   CONFIG <epsilon> <delta> <gamma> <max_window> <max_depth> <windows_per_episode> <probe_states>
//          <first_fit> <refit_every> <max_training_samples> <reg_c> <harvest_nested> <exploit_only>
//   NEXT_ARM_ID <id>
//   SKILL <dim:bit> <arm count>
//   ARM <id> <seeded> <n_success> <n_tries> <samples_at_fit> <step>...
//   SAMPLES <count> <bits:label>...
//   MODEL none | MODEL <support count> <bandwidth> <reg_c> <bias> <platt_a> <platt_b> <calibrated>
//   SV <bits> <coef>                 (one per support state)
//   END

namespace {

std::string hex(double v) {
  std::ostringstream os;
  os << std::hexfloat << v;
  return os.str();
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  // Next non-empty line split into tokens; empty vector at end of input.
  std::vector<std::string> next() {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      std::istringstream is(raw);
      std::vector<std::string> tok;
      for (std::string t; is >> t;) tok.push_back(t);
      if (!tok.empty()) return tok;
    }
    return {};
  }

  std::vector<std::string> expect(const std::string& key, std::size_t min_tokens) {
    auto tok = next();
    if (tok.empty()) fail("unexpected end of file, expected " + key);
    if (tok[0] != key) fail("expected " + key + ", found '" + tok[0] + "'");
    if (tok.size() < min_tokens) fail(key + " line is too short");
    return tok;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  std::uint64_t integer(const std::string& tok) const {
    char* end = nullptr;
    auto v = std::strtoull(tok.c_str(), &end, 10);
    if (tok.empty() || *end != '\0') fail("bad integer '" + tok + "'");
    return v;
  }

  double real(const std::string& tok) const {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') fail("bad real '" + tok + "'");
    return v;
  }

  bool flag(const std::string& tok) const {
    if (tok != "0" && tok != "1") fail("bad flag '" + tok + "'");
    return tok == "1";
  }

  State state(const std::string& tok) const {
    try {
      return State::parse(tok);
    } catch (const std::exception&) {
      fail("bad state '" + tok + "'");
    }
  }

  UnitEffect effect(const std::string& tok) const {
    Step s;
    try {
      s = Step::parse("s" + tok);
    } catch (const std::exception&) {
      fail("bad unit effect '" + tok + "'");
    }
    return s.effect;
  }

 private:
  std::istringstream in_;
  std::size_t line_ = 0;
};

}  // namespace

std::string format_library(const SkillLibrary& lib) {
  std::ostringstream os;
  const auto& c = lib.config();
  os << "MEP-LIBRARY 1\n";
  os << "CONFIG " << hex(c.epsilon) << " " << hex(c.delta) << " " << hex(c.gamma) << " " << c.max_window << " "
     << c.max_depth << " " << c.windows_per_episode << " " << c.probe_states << " " << c.first_fit << " "
     << c.refit_every << " " << c.max_training_samples << " " << hex(c.reg_c) << " " << (c.harvest_nested ? 1 : 0) << " "
     << (c.exploit_only ? 1 : 0)
     << "\n";
  os << "NEXT_ARM_ID " << lib.peek_next_arm_id() << "\n";
  for (const auto& [effect, skill] : lib.skills()) {
    os << "SKILL " << effect.to_string() << " " << skill.arms.size() << "\n";
    for (const auto& arm : skill.arms) {
      os << "ARM " << arm.id << " " << (arm.seeded ? 1 : 0) << " " << arm.n_success << " " << arm.n_tries << " "
         << arm.samples_at_fit;
      for (const auto& s : arm.steps) os << " " << s.to_string();
      os << "\nSAMPLES " << arm.samples.size();
      for (const auto& s : arm.samples) os << " " << s.state.to_string() << ":" << (s.success ? 1 : 0);
      os << "\n";
      if (!arm.model) {
        os << "MODEL none\n";
        continue;
      }
      const auto& m = *arm.model;
      os << "MODEL " << m.dual_coefs.size() << " " << hex(m.bandwidth) << " " << hex(m.reg_c) << " " << hex(m.bias)
         << " " << hex(m.platt_a) << " " << hex(m.platt_b) << " " << (m.calibrated ? 1 : 0) << "\n";
      for (Eigen::Index i = 0; i < m.support_states.rows(); ++i) {
        os << "SV ";
        for (Eigen::Index j = 0; j < m.support_states.cols(); ++j) os << (m.support_states(i, j) != 0.0 ? '1' : '0');
        os << " " << hex(m.dual_coefs(i)) << "\n";
      }
    }
  }
  os << "END\n";
  return os.str();
}

SkillLibrary parse_library(const std::string& text) {
  Reader r(text);
  auto header = r.next();
  if (header.size() != 2 || header[0] != "MEP-LIBRARY") r.fail("expected header 'MEP-LIBRARY 1'");
  if (header[1] != "1") r.fail("unsupported library version " + header[1]);

  auto c = r.expect("CONFIG", 14);
  LearnerConfig cfg;
  cfg.epsilon = r.real(c[1]);
  cfg.delta = r.real(c[2]);
  cfg.gamma = r.real(c[3]);
  cfg.max_window = r.integer(c[4]);
  cfg.max_depth = r.integer(c[5]);
  cfg.windows_per_episode = r.integer(c[6]);
  cfg.probe_states = r.integer(c[7]);
  cfg.first_fit = r.integer(c[8]);
  cfg.refit_every = r.integer(c[9]);
  cfg.max_training_samples = r.integer(c[10]);
  cfg.reg_c = r.real(c[11]);
  cfg.harvest_nested = r.flag(c[12]);
  cfg.exploit_only = r.flag(c[13]);
  SkillLibrary lib(cfg);
  lib.set_next_arm_id(r.integer(r.expect("NEXT_ARM_ID", 2)[1]));

  for (;;) {
    auto tok = r.next();
    if (tok.empty()) r.fail("missing END (truncated file?)");
    if (tok[0] == "END") break;
    if (tok[0] != "SKILL" || tok.size() != 3) r.fail("expected SKILL or END");
    Skill& skill = lib.add_skill(r.effect(tok[1]));
    const auto n_arms = r.integer(tok[2]);
    for (std::uint64_t k = 0; k < n_arms; ++k) {
      auto a = r.expect("ARM", 7);
      Arm arm;
      arm.id = r.integer(a[1]);
      arm.seeded = r.flag(a[2]);
      arm.n_success = r.integer(a[3]);
      arm.n_tries = r.integer(a[4]);
      arm.samples_at_fit = r.integer(a[5]);
      for (std::size_t i = 6; i < a.size(); ++i) {
        try {
          arm.steps.push_back(Step::parse(a[i]));
        } catch (const std::exception& e) {
          r.fail(e.what());
        }
      }
      if (arm.n_success > arm.n_tries) r.fail("arm has more successes than tries");
      auto s = r.expect("SAMPLES", 2);
      const auto n_samples = r.integer(s[1]);
      if (s.size() != n_samples + 2) r.fail("SAMPLES count does not match");
      for (std::size_t i = 2; i < s.size(); ++i) {
        auto colon = s[i].find(':');
        if (colon == std::string::npos) r.fail("bad sample '" + s[i] + "'");
        arm.samples.push_back({r.state(s[i].substr(0, colon)), r.flag(s[i].substr(colon + 1))});
      }
      auto m = r.expect("MODEL", 2);
      if (m[1] != "none") {
        if (m.size() != 8) r.fail("MODEL line has the wrong field count");
        SuccessModel<double> model;
        const auto n_sv = static_cast<Eigen::Index>(r.integer(m[1]));
        model.bandwidth = r.real(m[2]);
        model.reg_c = r.real(m[3]);
        model.bias = r.real(m[4]);
        model.platt_a = r.real(m[5]);
        model.platt_b = r.real(m[6]);
        model.calibrated = r.flag(m[7]);
        model.dual_coefs.resize(n_sv);
        for (Eigen::Index i = 0; i < n_sv; ++i) {
          auto sv = r.expect("SV", 3);
          const State st = r.state(sv[1]);
          if (i == 0) model.support_states.resize(n_sv, static_cast<Eigen::Index>(st.dim()));
          if (static_cast<Eigen::Index>(st.dim()) != model.support_states.cols()) r.fail("support state dimension");
          model.support_states.row(i) = st.as_vector<double>().transpose();
          model.dual_coefs(i) = r.real(sv[2]);
        }
        arm.model = std::move(model);
      }
      skill.arms.push_back(std::move(arm));
    }
  }
  if (!r.next().empty()) r.fail("content after END");
  return lib;
}

void save_library(const SkillLibrary& lib, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_library(lib);
}

SkillLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_library(buf.str());
}

}  // namespace mep
