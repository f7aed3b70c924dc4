#ifndef CACHEMISS_POLICY_HPP
#define CACHEMISS_POLICY_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cachemiss {

enum class Policy { rnd, fifo, lru };

inline const char* to_string(Policy p) {
    switch (p) {
    case Policy::rnd: return "rnd";
    case Policy::fifo: return "fifo";
    case Policy::lru: return "lru";
    }
    return "?";
}

inline Policy parse_policy(std::string_view s) {
    if (s == "rnd" || s == "random" || s == "RND") return Policy::rnd;
    if (s == "fifo" || s == "FIFO") return Policy::fifo;
    if (s == "lru" || s == "LRU") return Policy::lru;
    throw std::invalid_argument("unknown policy: " + std::string(s));
}

} // namespace cachemiss

#endif
