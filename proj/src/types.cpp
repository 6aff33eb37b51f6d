#include "evidx/types.hpp"

namespace evidx {

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::NC: return "NC";
    case Diagnosis::MCI: return "MCI";
    case Diagnosis::AD: return "AD";
  }
  return "?";
}

std::string to_string(Sex s) { return s == Sex::F ? "F" : "M"; }

std::string to_string(Direction d) {
  return d == Direction::Atrophy ? "Atrophy" : "Enlargement";
}

std::string to_string(Severity s) {
  switch (s) {
    case Severity::No: return "No";
    case Severity::Mild: return "Mild";
    case Severity::Severe: return "Severe";
  }
  return "?";
}

Diagnosis diagnosis_from_string(const std::string& s) {
  if (s == "NC") return Diagnosis::NC;
  if (s == "MCI") return Diagnosis::MCI;
  if (s == "AD") return Diagnosis::AD;
  throw ConfigError("unknown diagnosis '" + s + "'");
}

Sex sex_from_string(const std::string& s) {
  if (s == "F") return Sex::F;
  if (s == "M") return Sex::M;
  throw ConfigError("unknown sex '" + s + "'");
}

Direction direction_from_string(const std::string& s) {
  if (s == "Atrophy") return Direction::Atrophy;
  if (s == "Enlargement") return Direction::Enlargement;
  throw ConfigError("unknown direction '" + s + "'");
}

Severity severity_from_string(const std::string& s) {
  if (s == "No") return Severity::No;
  if (s == "Mild") return Severity::Mild;
  if (s == "Severe") return Severity::Severe;
  throw ConfigError("unknown severity '" + s + "'");
}

}  // namespace evidx
