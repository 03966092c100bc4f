#include "war/counters.hpp"

namespace war {

OpCounters& counters() {
    thread_local OpCounters c;
    return c;
}

} // namespace war
