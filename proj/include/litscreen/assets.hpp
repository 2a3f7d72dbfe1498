#pragma once

#include <string_view>

namespace litscreen::assets {

/// Bundled default data files, embedded at build time from data/.
std::string_view lemma_table();
std::string_view cluster_config();
std::string_view keyword_config();

}  // namespace litscreen::assets
