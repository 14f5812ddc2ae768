#pragma once

#include <stdexcept>
#include <string>

namespace screamloc {

enum class Errc {
    invalid_input,
    file_not_found,
    unsupported_format,
    corrupt_header,
    clip_too_short,
    empty_clip,
    single_class_data,
    dimension_mismatch,
    length_mismatch,
    rate_mismatch,
    degenerate_correlation,
    id_mismatch,
    unknown_mic_id,
    grid_too_coarse,
    degenerate_geometry,
    non_finite_loss,
    nyquist_violation,
    duration_too_short,
    config,
    geometry_mismatch,
    data,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace screamloc
