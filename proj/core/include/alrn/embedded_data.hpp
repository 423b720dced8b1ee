#pragma once

#include <string_view>

// Copies of the versioned files under core/data, compiled into the library.
namespace alrn::embedded {

std::string_view stopwords_en_v1();
std::string_view stemmer_rules_v1();
std::string_view synth_spec_v1();

}  // namespace alrn::embedded
