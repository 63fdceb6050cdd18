#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace vgp {

/// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    /// Finalizes and returns the lowercase hex digest. The object must not be
    /// updated afterwards.
    std::string hex_digest();

    static std::string of_string(const std::string& s);
    static std::string of_file(const std::string& path);

private:
    void process_block(const std::uint8_t* block);
    std::uint32_t state_[8];
    std::uint64_t bit_count_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
    bool finalized_ = false;
};

} // namespace vgp
