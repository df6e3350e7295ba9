#pragma once

#include <string>
#include <string_view>

namespace themetrek {

/// Porter (1980) suffix-stripping stemmer, original rule set, no exception
/// lists. Input is expected lower-case ASCII; other bytes count as consonants.
std::string porter_stem(std::string_view word);

}  // namespace themetrek
