#include "lyaplab/errors.hpp"

namespace lyaplab {

ConfigError::ConfigError(std::string where, const std::string& what)
    : Error(where + ": " + what), where_(std::move(where)) {}

}  // namespace lyaplab
