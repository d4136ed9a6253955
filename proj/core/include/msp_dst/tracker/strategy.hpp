#pragma once

#include <string>
#include <string_view>

namespace msp {

// How per-turn head outputs are composed into the running dialogue state.
enum class Strategy { pure_context, changed_state, full_state, msp };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

// Four type classes {none, dontcare, mentioned, hit} with a pool; three
// classes {none, dontcare, hit} for the pool-free strategies.
inline int num_type_classes(Strategy s) { return s == Strategy::msp ? 4 : 3; }
inline bool uses_pool(Strategy s) { return s == Strategy::msp; }

}  // namespace msp
