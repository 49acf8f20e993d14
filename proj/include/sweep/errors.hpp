#pragma once

#include <stdexcept>
#include <string>

namespace sweep {

enum class Errc {
  InfeasiblePoint,
  DegenerateActiveSystem,
  NotInCone,
  EmptyPolyhedron,
  ConeResidual,
  BadMesh,
  SimulationFailed,
  NoCertificate,
  UnsupportedSet,
  InvalidInput,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace sweep
