#pragma once

#include <memory>

#include "cpsg/gateway.hpp"

namespace cpsg {

// Deterministic in-process stand-in for a live model server. Replies are pure
// functions of (model_name, request), derived from a stable hash, so a
// recorded cassette is reproducible across runs and platforms. Used by the
// test suites and by `--backend scripted` for offline demo runs.
std::unique_ptr<Transport> make_scripted_transport(std::size_t embedding_dim = 32);

}  // namespace cpsg
