#include "ocdsp/cpe.hpp"

namespace ocdsp {

const char* to_string(CpeMethod m) {
  switch (m) {
    case CpeMethod::Nlms: return "nlms";
    case CpeMethod::Differential: return "differential";
    case CpeMethod::Bwa: return "bwa";
    case CpeMethod::Vv: return "vv";
  }
  return "?";
}

CpeMethod cpe_method_from_string(const std::string& name) {
  if (name == "nlms") return CpeMethod::Nlms;
  if (name == "differential") return CpeMethod::Differential;
  if (name == "bwa") return CpeMethod::Bwa;
  if (name == "vv") return CpeMethod::Vv;
  throw ConfigError("cpe", "method", "unknown method '" + name + "' (nlms | differential | bwa | vv)");
}

}  // namespace ocdsp
