#include "msp_dst/tracker/strategy.hpp"

#include "msp_dst/common/error.hpp"

namespace msp {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::pure_context:
      return "pure_context";
    case Strategy::changed_state:
      return "changed_state";
    case Strategy::full_state:
      return "full_state";
    case Strategy::msp:
      return "msp";
  }
  return "msp";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "pure_context") return Strategy::pure_context;
  if (s == "changed_state") return Strategy::changed_state;
  if (s == "full_state") return Strategy::full_state;
  if (s == "msp") return Strategy::msp;
  throw ConfigError("unknown strategy: " + std::string(s) +
                    " (expected pure_context, changed_state, full_state or msp)");
}

}  // namespace msp
